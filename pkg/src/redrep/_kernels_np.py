"""Pure-numpy kernels. Reference path and fallback when numba is disabled."""

import numpy as np


def logsumexp(x, axis=None):
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    if axis is None:
        return out.reshape(())[()]
    return np.squeeze(out, axis=axis)


def _rows(indptr):
    return np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))


def emissions(W, indptr, ids, vals):
    n = len(indptr) - 1
    L = W.shape[0]
    E = np.zeros((n, L))
    if len(ids) == 0:
        return E
    rows = _rows(indptr)
    contrib = W[:, ids] * vals
    for y in range(L):
        E[:, y] = np.bincount(rows, weights=contrib[y], minlength=n)
    return E


def forward(E, T, begin, end):
    n, L = E.shape
    alpha = np.empty((n, L))
    alpha[0] = begin + E[0]
    for t in range(1, n):
        alpha[t] = logsumexp(alpha[t - 1][:, None] + T, axis=0) + E[t]
    return alpha, logsumexp(alpha[n - 1] + end)


def backward(E, T, begin, end):
    n, L = E.shape
    beta = np.empty((n, L))
    beta[n - 1] = end
    for t in range(n - 2, -1, -1):
        beta[t] = logsumexp(T + (E[t + 1] + beta[t + 1])[None, :], axis=1)
    return beta, logsumexp(begin + E[0] + beta[0])


def viterbi(E, T, begin, end):
    n, L = E.shape
    delta = begin + E[0]
    back = np.zeros((n, L), dtype=np.int64)
    for t in range(1, n):
        cand = delta[:, None] + T
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(L)] + E[t]
    final = delta + end
    path = np.empty(n, dtype=np.int64)
    path[n - 1] = np.argmax(final)
    score = final[path[n - 1]]
    for t in range(n - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, float(score)


def sequence_score(E, T, begin, end, y):
    s = begin[y[0]] + end[y[-1]] + E[np.arange(len(y)), y].sum()
    if len(y) > 1:
        s += T[y[:-1], y[1:]].sum()
    return float(s)


def crf_accumulate(W, T, begin, end, indptr, ids, vals, y, gW, gT, gbegin, gend, scale):
    """Add ``scale * d loglik`` into the gradient buffers; return loglik
    (no regularization)."""
    E = emissions(W, indptr, ids, vals)
    n, L = E.shape
    alpha, logz = forward(E, T, begin, end)
    beta, _ = backward(E, T, begin, end)
    node = np.exp(alpha + beta - logz)
    obs = np.zeros((n, L))
    obs[np.arange(n), y] = 1.0
    diff = obs - node
    if len(ids):
        rows = _rows(indptr)
        np.add.at(gW.T, ids, scale * diff[rows] * vals[:, None])
    if n > 1:
        pair = np.exp(alpha[:-1, :, None] + T[None] + (E[1:] + beta[1:])[:, None, :] - logz)
        np.add.at(gT, (y[:-1], y[1:]), scale)
        gT -= scale * pair.sum(axis=0)
    gbegin[y[0]] += scale
    gbegin -= scale * node[0]
    gend[y[-1]] += scale
    gend -= scale * node[n - 1]
    return sequence_score(E, T, begin, end, y) - logz


def crf_marginals(E, T, begin, end):
    alpha, logz = forward(E, T, begin, end)
    beta, _ = backward(E, T, begin, end)
    return np.exp(alpha + beta - logz)


def logreg_accumulate(W, indptr, ids, vals, y, gW, scale):
    S = emissions(W, indptr, ids, vals)
    n = S.shape[0]
    logp = S - logsumexp(S, axis=1)[:, None]
    diff = -np.exp(logp)
    diff[np.arange(n), y] += 1.0
    if len(ids):
        rows = _rows(indptr)
        np.add.at(gW.T, ids, scale * diff[rows] * vals[:, None])
    return float(logp[np.arange(n), y].sum())


def softmax_rows(S):
    return np.exp(S - logsumexp(S, axis=1)[:, None])
