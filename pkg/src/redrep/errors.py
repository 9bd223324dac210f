"""Exception hierarchy.

``DataError`` subclasses signal bad input (exit code 2 from the CLI); anything
else deriving from ``RedRepError`` is treated as an internal failure.
"""


class RedRepError(Exception):
    pass


class DataError(RedRepError):
    pass


class MalformedLine(DataError):
    def __init__(self, lineno, line, reason="wrong field count"):
        super().__init__(f"line {lineno}: {reason}: {line!r}")
        self.lineno = lineno


class UnknownLabel(DataError):
    def __init__(self, lineno, label):
        super().__init__(f"line {lineno}: unknown label {label!r}")
        self.lineno = lineno


class MixedLabeling(DataError):
    pass


class EmptyDocument(DataError):
    pass


class UnlabeledCorpus(DataError):
    pass


class EmptyCorpus(DataError):
    pass


class InconsistentSpans(DataError):
    pass


class IndexNotFrozen(RedRepError):
    pass


class EmptyData(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class UnsupportedVersion(DataError):
    pass


class CorruptFile(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class DegenerateAgreement(DataError):
    pass


class InvalidConfig(DataError):
    pass


class RunFailed(RedRepError):
    def __init__(self, run_index, seed, cause):
        super().__init__(f"run {run_index} (seed {seed}) failed: {cause}")
        self.run_index = run_index
        self.seed = seed
