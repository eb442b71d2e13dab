"""Both kernel backends must agree bit for bit."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rdsthermo import _pykernels as py
from rdsthermo import kernels

try:
    from rdsthermo import _ckernels as cy
except ImportError:  # pragma: no cover
    cy = None

needs_ext = pytest.mark.skipif(cy is None, reason="compiled extension not built")


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    import os
    pure = os.environ.get("RDSTHERMO_PURE", "") not in ("", "0")
    assert kernels.BACKEND == ("python" if pure or cy is None else "cython")


def test_pure_env_forces_fallback():
    import subprocess, sys
    out = subprocess.run(
        [sys.executable, "-c", "from rdsthermo import kernels; print(kernels.BACKEND)"],
        capture_output=True, text=True, env={"RDSTHERMO_PURE": "1", "PATH": ""}, check=True)
    assert out.stdout.strip() == "python"


@needs_ext
@settings(max_examples=60, deadline=None)
@given(st.integers(2, 3), st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_admissible_words_agree(a, L, seed):
    rng = np.random.default_rng(seed)
    trans = (rng.random((L - 1, a, a)) < 0.7).astype(np.uint8)
    allowed = rng.random(a) < 0.8
    wp, wc = py.admissible_words(trans, allowed), cy.admissible_words(trans, allowed)
    assert wp.dtype == wc.dtype and np.array_equal(wp, wc)
    # lexicographic and admissible
    rows = [tuple(r) for r in wp]
    assert rows == sorted(rows)
    for r in wp:
        assert allowed[r[0]]
        assert all(trans[i, r[i], r[i + 1]] for i in range(L - 1))


@needs_ext
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 6), st.integers(0, 2**32 - 1))
def test_prefix_products_bitwise(q, L, seed):
    rng = np.random.default_rng(seed)
    mats = rng.normal(size=(L, 2, q, q))
    words = rng.integers(0, 2, size=(25, L)).astype(np.int16)
    words = np.unique(words, axis=0) if L else words
    a, b = py.prefix_products(words, mats), cy.prefix_products(words, mats)
    assert np.array_equal(a, b)
    if L:
        ref = np.eye(q)
        for i in range(L):
            ref = mats[i][words[0, i]] @ ref
        np.testing.assert_allclose(a[0], ref, rtol=1e-12, atol=1e-12)


@needs_ext
@pytest.mark.parametrize("n", [0, 1, 7, 1023, 1024, 1025, 5000, 70001])
def test_tree_sum_bitwise_and_thread_invariant(n):
    x = np.random.default_rng(n).normal(size=n) * 10.0 ** np.random.default_rng(n + 1).integers(-8, 8, size=n)
    ref = py.neumaier_tree_sum(x)
    for th in (1, 3, 8):
        assert py.neumaier_tree_sum(x, th) == ref
        assert cy.neumaier_tree_sum(x, th) == ref
    if n:
        assert abs(ref - np.sum(x.astype(np.longdouble))) <= 1e-12 * np.abs(x).sum()


def test_tree_sum_compensates():
    x = np.array([1.0, 1e100, 1.0, -1e100])
    assert kernels.neumaier_tree_sum(x) == 2.0


@needs_ext
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_max_weight_subset_agree(n, seed):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=n)
    conf = np.zeros(n, dtype=np.uint64)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.3:
                conf[i] |= np.uint64(1 << j)
                conf[j] |= np.uint64(1 << i)
    rp, rc = py.max_weight_subset(w, conf), cy.max_weight_subset(w, conf)
    assert rp == rc
    # brute-force oracle
    best = max(
        sum(w[i] for i in range(n) if m >> i & 1)
        for m in range(1 << n)
        if all(not (m >> i & 1 and int(conf[i]) & m) for i in range(n))
    )
    assert rp[0] == pytest.approx(best, abs=1e-12)
