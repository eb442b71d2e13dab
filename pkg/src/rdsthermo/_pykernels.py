"""Pure numpy implementations of the hot kernels.

Every routine here performs the same sequence of IEEE operations as its
counterpart in ``_ckernels.pyx`` so both backends agree bit for bit.
"""
import numpy as np

NAME = "python"

BLOCK = 1024


def admissible_words(trans, allowed0):
    """All admissible words along a fixed orbit, in lexicographic order.

    Parameters
    ----------
    trans : ndarray, shape (L-1, a, a), uint8
        ``trans[i]`` governs the step from position ``i`` to ``i+1``.
    allowed0 : ndarray, shape (a,), bool
        Symbols permitted at position 0.

    Returns
    -------
    words : ndarray, shape (N, L), int16
    """
    words = np.flatnonzero(allowed0).astype(np.int16)[:, None]
    for step in trans:
        ok = step[words[:, -1]] != 0
        rows, syms = np.nonzero(ok)
        words = np.concatenate([words[rows], syms.astype(np.int16)[:, None]], axis=1)
    return np.ascontiguousarray(words)


def _matmul_ordered(left, right):
    # left @ right for stacks of square matrices, summing over k in order
    n, q, _ = left.shape
    out = np.empty_like(left)
    for r in range(q):
        for c in range(q):
            acc = left[:, r, 0] * right[:, 0, c]
            for k in range(1, q):
                acc = acc + left[:, r, k] * right[:, k, c]
            out[:, r, c] = acc
    return out


def prefix_products(words, mats):
    """Ordered products ``M_{L-1}(x_{L-1}) ... M_0(x_0)`` for every word.

    ``mats`` has shape (L, a, q, q): one matrix per position and symbol.
    """
    words = np.asarray(words)
    n_words, length = words.shape
    if length == 0:
        q = mats.shape[-1]
        return np.broadcast_to(np.eye(q), (n_words, q, q)).copy()
    prod = mats[0][words[:, 0]].copy()
    for i in range(1, length):
        prod = _matmul_ordered(mats[i][words[:, i]], prod)
    return prod


def neumaier_tree_sum(x, threads=1):
    """Compensated block sums combined by a fixed pairwise tree.

    The result depends only on ``x``; ``threads`` is accepted for API
    parity with the compiled backend and ignored.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return 0.0
    nb = -(-x.size // BLOCK)
    padded = np.zeros(nb * BLOCK)
    padded[: x.size] = x
    blocks = padded.reshape(nb, BLOCK)
    s = np.zeros(nb)
    c = np.zeros(nb)
    for j in range(BLOCK):
        v = blocks[:, j]
        t = s + v
        c = c + np.where(np.abs(s) >= np.abs(v), (s - t) + v, (v - t) + s)
        s = t
    return _tree(s + c)


def _tree(vals):
    vals = np.asarray(vals, dtype=np.float64)
    while vals.size > 1:
        half = vals.size // 2
        paired = vals[0 : 2 * half : 2] + vals[1 : 2 * half : 2]
        if vals.size % 2:
            paired = np.append(paired, vals[-1])
        vals = paired
    return float(vals[0])


def max_weight_subset(weights, conflict):
    """Exhaustive search over all subsets containing no conflicting pair.

    ``conflict[i]`` is a bitmask of the indices that may not share a
    subset with ``i``. Returns ``(best_sum, best_mask)``; ties resolve to
    the smallest mask.
    """
    weights = np.asarray(weights, dtype=np.float64)
    conflict = np.asarray(conflict, dtype=np.uint64)
    n = weights.size
    if n > 24:
        raise MemoryError(f"{n} candidates exceed the subset enumeration bound")
    masks = np.arange(1 << n, dtype=np.uint64)
    ok = np.ones(masks.size, dtype=bool)
    sums = np.zeros(masks.size)
    for i in range(n):
        has_i = ((masks >> np.uint64(i)) & np.uint64(1)).astype(bool)
        ok &= ~(has_i & ((masks & conflict[i]) != 0))
        sums = np.where(has_i, sums + weights[i], sums)
    sums = np.where(ok, sums, -np.inf)
    best = int(np.argmax(sums))
    return float(sums[best]), best
