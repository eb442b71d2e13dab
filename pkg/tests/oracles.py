"""Independent reference computations: plain Python loops and linear algebra, no package code."""
import itertools
import math

import numpy as np


def admissible(trans, perm, omega, word):
    w = omega
    for x, y in zip(word, word[1:]):
        if not trans[w][x][y]:
            return False
        w = perm[w]
    return True


def words(trans, perm, omega, n, a):
    return [w for w in itertools.product(range(a), repeat=n) if admissible(trans, perm, omega, w)]


def path_count(trans, perm, omega, n):
    """Number of admissible n-words, as the entry sum of an ordered matrix product."""
    a = len(trans[0])
    v = np.ones(a, dtype=object)
    w = omega
    mats = []
    for _ in range(n - 1):
        mats.append(np.array(trans[w], dtype=object))
        w = perm[w]
    for M in reversed(mats):
        v = M.dot(v)
    return int(sum(v))


def spectral_radius(M, iters=2000):
    """Power iteration on a nonnegative matrix."""
    v = np.ones(len(M))
    lam = 0.0
    for _ in range(iters):
        u = M @ v
        lam = np.linalg.norm(u, 1) / np.linalg.norm(v, 1)
        v = u / np.linalg.norm(u, 1)
    return lam


def diag_sum(n):
    """sum over binary n-words of max(2^{#0}, 3^{#1}), by binomial grouping."""
    return sum(math.comb(n, k) * max(2 ** (n - k), 3 ** k) for k in range(n + 1))


def log_sum_exp(vals):
    vals = list(vals)
    top = max(vals)
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(math.exp(v - top) for v in vals))


def stationary(P):
    """Left eigenvector for eigenvalue 1 by dense linear algebra."""
    vals, vecs = np.linalg.eig(np.asarray(P, dtype=float).T)
    v = np.real(vecs[:, np.argmin(abs(vals - 1))])
    return v / v.sum()


def entropy_rate(pi, P):
    return -sum(pi[i] * P[i][j] * math.log(P[i][j]) for i in range(len(P)) for j in range(len(P)) if P[i][j] > 0)


def cocycle_q_scan(step=1e-3):
    """max_q H(q) + max(q log 2, (1-q) log 3) on a grid."""
    best, arg = -math.inf, None
    for i in range(1, int(round(1 / step))):
        q = i * step
        v = -q * math.log(q) - (1 - q) * math.log(1 - q) + max(q * math.log(2), (1 - q) * math.log(3))
        if v > best:
            best, arg = v, q
    return best, arg
