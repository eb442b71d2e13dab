import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rdsthermo.core import BaseSystem, RandomSFT, Word, skew_step
from rdsthermo.errors import DomainError
from rdsthermo.potentials import (
    Additive,
    Constant,
    MatrixCocycle,
    Zero,
    check_subadditive,
    eval,
    power,
    table_from_exp,
)

from conftest import LOG2, LOG3, bern_log2, diag, full, s2, zero_cocycle


def W(sys, s, omega=0):
    return Word(sys, omega, tuple(s))


def test_zero():
    sys = full()
    assert eval(Zero(sys), 5, W(sys, (0, 1, 1, 0, 1))) == 0.0


def test_constant():
    sys = full()
    assert eval(Constant(sys, -1.0), 3, W(sys, (0, 1, 1))) == -3.0


def test_additive_sum():
    sys = full()
    assert eval(bern_log2(sys), 3, W(sys, (0, 1, 1, 0))) == pytest.approx(2 * LOG2, abs=1e-15)


def test_cocycle_example():
    sys = full()
    assert eval(diag(sys), 2, W(sys, (0, 1, 0))) == pytest.approx(LOG3, abs=1e-15)


def test_cocycle_two_norm():
    sys = full()
    M = np.array([[[[1.0, 1.0], [0.0, 1.0]], [[2.0, 0.0], [0.0, 0.5]]]])
    phi = MatrixCocycle(sys, M, "2")
    got = eval(phi, 2, W(sys, (0, 1)))
    assert got == pytest.approx(math.log(np.linalg.norm(M[0, 1] @ M[0, 0], 2)), abs=1e-13)


def test_zero_product_is_neg_inf():
    sys = full()
    assert eval(zero_cocycle(sys), 1, W(sys, (0,))) == -math.inf


def test_short_word_rejected():
    sys = full()
    with pytest.raises(DomainError):
        eval(Additive(sys, 2, np.zeros((1, 2, 2))), 2, W(sys, (0, 1)))


def test_bad_table_shape():
    with pytest.raises(DomainError):
        Additive(full(), 1, np.zeros((1, 3)))


def test_exp_table_positive():
    with pytest.raises(DomainError):
        table_from_exp([[0, 1]])


class TestSubadditivity:
    def test_additive_equality(self):
        rep = check_subadditive(bern_log2(), full(), 6)
        assert rep.ok and abs(rep.worst_margin) <= 1e-12

    def test_constant(self):
        rep = check_subadditive(Constant(full(), -1.0), full(), 5)
        assert rep.worst_margin == pytest.approx(0.0, abs=1e-15)

    def test_cocycle_strict(self):
        sys = full()
        phi = diag(sys)
        # f_2("01") = log 3 <= log 2 + log 3
        assert eval(phi, 2, W(sys, (0, 1))) <= eval(phi, 1, W(sys, (0,))) + eval(phi, 1, W(sys, (1,)))
        rep = check_subadditive(phi, sys, 6)
        assert rep.ok and rep.worst_margin >= -1e-14

    def test_zero_cocycle(self):
        assert check_subadditive(zero_cocycle(), full(), 4).ok

    def test_detects_violation(self):
        class Super(Constant):
            def values(self, n, omega, words):
                return np.full(len(words), float(n * n))

        rep = check_subadditive(Super(full(), 0.0), full(), 3)
        assert not rep.ok and rep.witness is not None

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_cocycles_are_subadditive(self, seed):
        rng = np.random.default_rng(seed)
        sys = s2()
        phi = MatrixCocycle(sys, np.abs(rng.normal(size=(2, 2, 3, 3))), ["inf", "2"][seed % 2])
        assert check_subadditive(phi, sys, 5).worst_margin >= -1e-12


@pytest.mark.parametrize("omega", [0, 1])
def test_additive_telescopes(omega):
    sys = s2()
    rng = np.random.default_rng(omega)
    for d in (1, 2):
        phi = Additive(sys, d, rng.normal(size=(2,) + (2,) * d))
        for n in range(1, 7):
            for r in sys.word_array(omega, n + d - 1):
                w = Word(sys, omega, tuple(int(s) for s in r))
                total, cur = 0.0, w
                for i in range(n):
                    total += eval(phi, 1, Word(sys, cur.fiber, cur.symbols[:d]))
                    if i < n - 1:
                        cur = skew_step(sys, cur)
                assert eval(phi, n, w) == pytest.approx(total, abs=1e-13)


class TestPower:
    def test_k1_identity(self):
        sys = full()
        phi = diag(sys)
        p = power(phi, 1)
        words = sys.word_array(0, 4)
        assert np.array_equal(p.values(4, 0, words), phi.values(4, 0, words))

    def test_additive_k2(self):
        sys = full()
        p = power(bern_log2(sys), 2)
        psys = p.sys
        for code, (x, y) in enumerate(itertools.product((0, 1), repeat=2)):
            got = eval(p, 1, Word(psys, 0, (code,)))
            assert got == pytest.approx((x + y) * LOG2, abs=1e-15)

    def test_cocycle_k2_matches_f2(self):
        sys = full()
        phi = diag(sys)
        p = power(phi, 2)
        for code, xy in enumerate(itertools.product((0, 1), repeat=2)):
            assert eval(p, 1, Word(p.sys, 0, (code,))) == pytest.approx(eval(phi, 2, Word(sys, 0, xy)), abs=1e-15)

    def test_shift(self):
        sys = full()
        phi = diag(sys).shift(0.5)
        assert eval(phi, 3, W(sys, (0, 0, 0))) == pytest.approx(3 * LOG2 + 1.5)

    def test_bad_k(self):
        with pytest.raises(DomainError):
            power(Zero(full()), 0)


def test_f1_norm():
    assert bern_log2().f1_norm() == pytest.approx(LOG2)
    assert diag().f1_norm() == pytest.approx(LOG3)
    assert zero_cocycle().f1_norm() == math.inf
