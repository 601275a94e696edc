"""Naive double-loop reference implementations.

These follow the textbook definitions pair by pair and share no code with
the blocked kernels; they exist to check them.
"""

import itertools
import math

import numpy as np


def naive_correlation(x):
    """Dense correlation matrix from the centered-sum definition, pair by pair."""
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    cols = [x[:, i].tolist() for i in range(p)]
    centered = []
    for col in cols:
        mean = math.fsum(col) / n
        centered.append([v - mean for v in col])
    norms = [math.sqrt(math.fsum(v * v for v in c)) for c in centered]
    out = np.eye(p)
    for i in range(p):
        for j in range(i + 1, p):
            num = math.fsum(a * b for a, b in zip(centered[i], centered[j]))
            out[i, j] = out[j, i] = num / (norms[i] * norms[j])
    return out


def naive_l_statistic(x):
    r = naive_correlation(x)
    p = r.shape[0]
    best, arg = -1.0, None
    for i in range(p):
        for j in range(i + 1, p):
            if abs(r[i, j]) > best:
                best, arg = abs(r[i, j]), (i, j)
    return best, arg


def naive_w_statistic(x):
    """max_{i<j} |x_i . x_j| with one dot product per pair."""
    x = np.asarray(x, dtype=float)
    p = x.shape[1]
    cols = [np.ascontiguousarray(x[:, i]) for i in range(p)]
    best, arg = -1.0, None
    for i in range(p):
        ci = cols[i]
        for j in range(i + 1, p):
            v = abs(float(np.dot(ci, cols[j])))
            if v > best:
                best, arg = v, (i, j)
    return best, arg


def naive_t_statistic(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    p = u.shape[1]
    best, arg = -1.0, None
    for i in range(p):
        for j in range(p):
            if i == j:
                continue
            s = abs(math.fsum(a * b for a, b in zip(u[:, i].tolist(), v[:, j].tolist())))
            if s > best:
                best, arg = s, (i, j)
    return best, arg


def exact_w_statistic(x):
    """As :func:`naive_w_statistic` but with correctly rounded (fsum) sums."""
    x = np.asarray(x, dtype=float)
    p = x.shape[1]
    cols = [x[:, i].tolist() for i in range(p)]
    best, arg = -1.0, None
    for i in range(p):
        for j in range(i + 1, p):
            s = abs(math.fsum(a * b for a, b in zip(cols[i], cols[j])))
            if s > best:
                best, arg = s, (i, j)
    return best, arg


def naive_max_product(x, m):
    """Exhaustive maximum over all m-subsets."""
    vals = [abs(float(v)) for v in x]
    return max(math.prod(c) for c in itertools.combinations(vals, m))
