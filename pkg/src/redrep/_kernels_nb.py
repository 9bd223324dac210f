"""numba versions of the kernels in ``_kernels_np``; same signatures."""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _lse(x):
    m = -np.inf
    for v in x:
        if v > m:
            m = v
    if not math.isfinite(m):
        return m
    s = 0.0
    for v in x:
        s += math.exp(v - m)
    return m + math.log(s)


@njit(cache=True)
def emissions(W, indptr, ids, vals):
    n = indptr.shape[0] - 1
    L = W.shape[0]
    E = np.zeros((n, L))
    for t in range(n):
        for k in range(indptr[t], indptr[t + 1]):
            f = ids[k]
            v = vals[k]
            for y in range(L):
                E[t, y] += W[y, f] * v
    return E


@njit(cache=True)
def forward(E, T, begin, end):
    n, L = E.shape
    alpha = np.empty((n, L))
    buf = np.empty(L)
    for j in range(L):
        alpha[0, j] = begin[j] + E[0, j]
    for t in range(1, n):
        for j in range(L):
            for i in range(L):
                buf[i] = alpha[t - 1, i] + T[i, j]
            alpha[t, j] = _lse(buf) + E[t, j]
    for j in range(L):
        buf[j] = alpha[n - 1, j] + end[j]
    return alpha, _lse(buf)


@njit(cache=True)
def backward(E, T, begin, end):
    n, L = E.shape
    beta = np.empty((n, L))
    buf = np.empty(L)
    for i in range(L):
        beta[n - 1, i] = end[i]
    for t in range(n - 2, -1, -1):
        for i in range(L):
            for j in range(L):
                buf[j] = T[i, j] + E[t + 1, j] + beta[t + 1, j]
            beta[t, i] = _lse(buf)
    for j in range(L):
        buf[j] = begin[j] + E[0, j] + beta[0, j]
    return beta, _lse(buf)


@njit(cache=True)
def _viterbi(E, T, begin, end):
    n, L = E.shape
    delta = np.empty(L)
    nxt = np.empty(L)
    back = np.zeros((n, L), dtype=np.int64)
    for j in range(L):
        delta[j] = begin[j] + E[0, j]
    for t in range(1, n):
        for j in range(L):
            best = 0
            bv = delta[0] + T[0, j]
            for i in range(1, L):
                v = delta[i] + T[i, j]
                if v > bv:
                    bv = v
                    best = i
            back[t, j] = best
            nxt[j] = bv + E[t, j]
        delta[:] = nxt
    path = np.empty(n, dtype=np.int64)
    best = 0
    bv = delta[0] + end[0]
    for j in range(1, L):
        v = delta[j] + end[j]
        if v > bv:
            bv = v
            best = j
    path[n - 1] = best
    for t in range(n - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, bv


def viterbi(E, T, begin, end):
    path, score = _viterbi(E, T, begin, end)
    return path, float(score)


@njit(cache=True)
def _sequence_score(E, T, begin, end, y):
    n = y.shape[0]
    s = begin[y[0]] + end[y[n - 1]]
    for t in range(n):
        s += E[t, y[t]]
    for t in range(1, n):
        s += T[y[t - 1], y[t]]
    return s


def sequence_score(E, T, begin, end, y):
    return float(_sequence_score(E, T, begin, end, y))


@njit(cache=True)
def crf_accumulate(W, T, begin, end, indptr, ids, vals, y, gW, gT, gbegin, gend, scale):
    E = emissions(W, indptr, ids, vals)
    n, L = E.shape
    alpha, logz = forward(E, T, begin, end)
    beta, _ = backward(E, T, begin, end)
    for t in range(n):
        for j in range(L):
            d = -math.exp(alpha[t, j] + beta[t, j] - logz)
            if j == y[t]:
                d += 1.0
            d *= scale
            for k in range(indptr[t], indptr[t + 1]):
                gW[j, ids[k]] += d * vals[k]
            if t == 0:
                gbegin[j] += d
            if t == n - 1:
                gend[j] += d
    for t in range(1, n):
        gT[y[t - 1], y[t]] += scale
        for i in range(L):
            for j in range(L):
                gT[i, j] -= scale * math.exp(alpha[t - 1, i] + T[i, j] + E[t, j] + beta[t, j] - logz)
    return _sequence_score(E, T, begin, end, y) - logz


@njit(cache=True)
def crf_marginals(E, T, begin, end):
    alpha, logz = forward(E, T, begin, end)
    beta, _ = backward(E, T, begin, end)
    return np.exp(alpha + beta - logz)


@njit(cache=True)
def logreg_accumulate(W, indptr, ids, vals, y, gW, scale):
    S = emissions(W, indptr, ids, vals)
    n, L = S.shape
    total = 0.0
    for t in range(n):
        z = _lse(S[t])
        total += S[t, y[t]] - z
        for j in range(L):
            d = -math.exp(S[t, j] - z)
            if j == y[t]:
                d += 1.0
            d *= scale
            for k in range(indptr[t], indptr[t + 1]):
                gW[j, ids[k]] += d * vals[k]
    return total


@njit(cache=True)
def softmax_rows(S):
    n, L = S.shape
    P = np.empty((n, L))
    for t in range(n):
        z = _lse(S[t])
        for j in range(L):
            P[t, j] = math.exp(S[t, j] - z)
    return P
