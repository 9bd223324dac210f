"""Independent reference computations used by the tests.

Nothing here calls into the kernels; scores are summed in plain Python.
"""

import itertools
import math

import numpy as np

from redrep.corpus import Sentence
from redrep.features import FeatureVector
from redrep.models import CrfModel, LogRegModel

L = 4


def sent(words, labels=None, id="t", language="hi"):
    return Sentence.from_words(id, words, labels, language)


def random_vectors(rng, n, num_features, density=3):
    vecs = []
    for _ in range(n):
        k = int(rng.integers(1, density + 1))
        ids = np.sort(rng.choice(num_features, size=k, replace=False))
        vecs.append(FeatureVector(ids.astype(np.int64), rng.normal(size=k)))
    return vecs


def random_crf(rng, num_features, scale=1.0, integer=False):
    def draw(*shape):
        if integer:
            return rng.integers(-2, 3, size=shape).astype(np.float64)
        return rng.normal(scale=scale, size=shape)

    return CrfModel(draw(L, num_features), draw(L, L), draw(L), draw(L))


# -- brute-force oracles: plain Python, no kernels -------------------------


def unary_scores(W, vectors):
    return [[sum(W[y][int(f)] * float(v) for f, v in zip(vec.ids, vec.values)) for y in range(L)] for vec in vectors]


def path_score(model, vectors, path):
    E = unary_scores(model.unary.tolist(), vectors)
    s = model.begin[path[0]] + model.end[path[-1]]
    for t, y in enumerate(path):
        s += E[t][y]
    for a, b in zip(path, path[1:]):
        s += model.transitions[a][b]
    return float(s)


def brute_log_partition(model, vectors):
    scores = [path_score(model, vectors, p) for p in itertools.product(range(L), repeat=len(vectors))]
    m = max(scores)
    return m + math.log(math.fsum(math.exp(s - m) for s in scores))


def brute_viterbi(model, vectors):
    """Maximum-score path; among exact ties, the one whose labels read from
    the end backwards are smallest (what first-max backtracking yields)."""
    best = None
    for p in itertools.product(range(L), repeat=len(vectors)):
        s = path_score(model, vectors, p)
        key = (-s, tuple(reversed(p)))
        if best is None or key < best[0]:
            best = (key, p, s)
    return list(best[1]), best[2]


def finite_difference(f, params, h=1e-5):
    """Central differences of scalar ``f()`` w.r.t. every entry of each
    array in ``params`` (mutated in place and restored)."""
    grads = []
    for p in params:
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + h
            up = f()
            p[idx] = orig - h
            down = f()
            p[idx] = orig
            g[idx] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def max_rel_error(analytic, numeric):
    worst = 0.0
    for a, n in zip(analytic, numeric):
        diff = np.abs(a - n)
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-12)
        worst = max(worst, float(np.max(np.where(diff == 0, 0.0, diff / denom))))
    return worst


def softmax_oracle(scores):
    m = max(scores)
    exps = [math.exp(s - m) for s in scores]
    z = math.fsum(exps)
    return [e / z for e in exps]


def zero_logreg(num_features):
    return LogRegModel(np.zeros((L, num_features)))
