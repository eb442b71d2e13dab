# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Mirrors ``_pykernels`` operation for operation."""
import numpy as np
cimport numpy as cnp
from concurrent.futures import ThreadPoolExecutor
from libc.math cimport fabs
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

NAME = "cython"

DEF BLOCK = 1024


def admissible_words(const unsigned char[:, :, ::1] trans, allowed0):
    cdef Py_ssize_t steps = trans.shape[0]
    cdef Py_ssize_t a = trans.shape[1]
    cdef Py_ssize_t length = steps + 1
    cdef Py_ssize_t i, j, k, pos, n_words
    cdef const unsigned char[::1] first = np.ascontiguousarray(allowed0, dtype=np.uint8)

    # count by dynamic programming from the right
    cnp_counts = np.ones(a, dtype=np.int64)
    cdef int64_t[::1] counts = cnp_counts
    cdef int64_t[::1] nxt
    for i in range(steps - 1, -1, -1):
        nxt_arr = np.zeros(a, dtype=np.int64)
        nxt = nxt_arr
        for j in range(a):
            for k in range(a):
                if trans[i, j, k]:
                    nxt[j] += counts[k]
        counts = nxt
    n_words = 0
    for j in range(a):
        if first[j]:
            n_words += counts[j]

    out_arr = np.empty((n_words, length), dtype=np.int16)
    cdef short[:, ::1] out = out_arr
    if n_words == 0:
        return out_arr

    cdef short[::1] cur = np.full(length, -1, dtype=np.int16)
    cdef Py_ssize_t row = 0
    cdef short s
    pos = 0
    with nogil:
        while pos >= 0:
            s = cur[pos] + 1
            while s < a:
                if pos == 0:
                    if first[s]:
                        break
                elif trans[pos - 1, cur[pos - 1], s]:
                    break
                s += 1
            if s >= a:
                cur[pos] = -1
                pos -= 1
                continue
            cur[pos] = s
            if pos == length - 1:
                for k in range(length):
                    out[row, k] = cur[k]
                row += 1
            else:
                pos += 1
    return out_arr


cdef inline void _matmul(const double* left, const double* right, double* out, Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t r, c, k
    cdef double acc
    for r in range(q):
        for c in range(q):
            acc = left[r * q] * right[c]
            for k in range(1, q):
                acc = acc + left[r * q + k] * right[k * q + c]
            out[r * q + c] = acc


def prefix_products(words, mats):
    cdef const short[:, ::1] w = np.ascontiguousarray(words, dtype=np.int16)
    cdef const double[:, :, :, ::1] m = np.ascontiguousarray(mats, dtype=np.float64)
    cdef Py_ssize_t n_words = w.shape[0]
    cdef Py_ssize_t length = w.shape[1]
    cdef Py_ssize_t q = m.shape[2]
    cdef Py_ssize_t qq = q * q
    cdef Py_ssize_t i, j, start, r
    out_arr = np.empty((n_words, q, q), dtype=np.float64)
    if length == 0:
        out_arr[...] = np.eye(q)
        return out_arr
    cdef double[:, :, ::1] out = out_arr
    # stack[i] holds the product through position i for the current prefix
    cdef double[:, ::1] stack = np.empty((length, qq), dtype=np.float64)
    with nogil:
        for j in range(n_words):
            start = 0
            if j > 0:
                while start < length and w[j, start] == w[j - 1, start]:
                    start += 1
                if start == length:
                    start = length - 1
            for i in range(start, length):
                if i == 0:
                    for r in range(qq):
                        stack[0, r] = m[0, w[j, 0], r // q, r % q]
                else:
                    _matmul(&m[i, w[j, i], 0, 0], &stack[i - 1, 0], &stack[i, 0], q)
            for r in range(qq):
                out[j, r // q, r % q] = stack[length - 1, r]
    return out_arr


cdef void _block_sums(const double[::1] x, double[::1] dest, Py_ssize_t b0, Py_ssize_t b1) noexcept nogil:
    cdef Py_ssize_t b, j, lo, hi
    cdef double s, c, t, v
    cdef Py_ssize_t n = x.shape[0]
    for b in range(b0, b1):
        lo = b * BLOCK
        hi = lo + BLOCK
        if hi > n:
            hi = n
        s = 0.0
        c = 0.0
        for j in range(lo, hi):
            v = x[j]
            t = s + v
            if fabs(s) >= fabs(v):
                c = c + ((s - t) + v)
            else:
                c = c + ((v - t) + s)
            s = t
        dest[b] = s + c


def _run_blocks(x, dest, Py_ssize_t b0, Py_ssize_t b1):
    cdef const double[::1] xv = x
    cdef double[::1] dv = dest
    with nogil:
        _block_sums(xv, dv, b0, b1)


def neumaier_tree_sum(x, int threads=1):
    xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xa.shape[0]
    if n == 0:
        return 0.0
    cdef Py_ssize_t nb = (n + BLOCK - 1) // BLOCK
    dest = np.empty(nb, dtype=np.float64)
    if threads <= 1 or nb < 2 * threads:
        _run_blocks(xa, dest, 0, nb)
    else:
        step = (nb + threads - 1) // threads
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = [pool.submit(_run_blocks, xa, dest, lo, min(lo + step, nb))
                    for lo in range(0, nb, step)]
            for f in futs:
                f.result()
    return _tree(dest)


cdef double _tree(double[::1] vals):
    cdef Py_ssize_t size = vals.shape[0]
    cdef Py_ssize_t i, half
    buf_arr = np.array(vals, dtype=np.float64)
    cdef double[::1] buf = buf_arr
    while size > 1:
        half = size // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if size % 2:
            buf[half] = buf[size - 1]
            size = half + 1
        else:
            size = half
    return buf[0]


def max_weight_subset(weights, conflict):
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const uint64_t[::1] cf = np.ascontiguousarray(conflict, dtype=np.uint64)
    cdef Py_ssize_t n = w.shape[0]
    if n > 30:
        raise MemoryError(f"{n} candidates exceed the subset enumeration bound")
    cdef uint64_t mask, total = (<uint64_t>1) << n
    cdef uint64_t best_mask = 0
    cdef double best = -np.inf
    cdef double s
    cdef Py_ssize_t i
    cdef bint ok
    with nogil:
        for mask in range(total):
            ok = True
            s = 0.0
            for i in range(n):
                if (mask >> i) & 1:
                    if mask & cf[i]:
                        ok = False
                        break
                    s = s + w[i]
            if ok and s > best:
                best = s
                best_mask = mask
    return best, int(best_mask)
