import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rdsthermo.core import (
    BaseSystem,
    MetricParams,
    RandomSFT,
    Word,
    bowen_distance,
    bowen_separated,
    decode_block,
    encode_block,
    enumerate_words,
    first_disagreement,
    is_admissible,
    skew_step,
)
from rdsthermo.errors import DomainError

from conftest import full, golden, s2


def brute_words(sys, omega, n):
    return [w for w in itertools.product(range(sys.alphabet), repeat=n) if sys.is_admissible(omega, w)]


class TestBase:
    def test_rejects_non_permutation(self):
        with pytest.raises(DomainError):
            BaseSystem([0, 0], [0.5, 0.5])

    def test_rejects_non_invariant_weights(self):
        with pytest.raises(DomainError):
            BaseSystem([1, 0], [0.3, 0.7])

    def test_rejects_unnormalized(self):
        with pytest.raises(DomainError):
            BaseSystem([0, 1], [0.5, 0.6])

    def test_uniform_on_cycles(self):
        b = BaseSystem.uniform_on_cycles([1, 2, 0, 3])
        assert b.weights.sum() == pytest.approx(1.0)
        assert b.weights[0] == b.weights[1] == b.weights[2]

    def test_orbit_and_power(self):
        b = BaseSystem([1, 2, 0], [1 / 3] * 3)
        assert b.orbit(0, 4) == [0, 1, 2, 0]
        assert b.step(1, 5) == 0
        assert list(b.power(2).perm) == [2, 0, 1]


class TestAdmissibility:
    def test_full_shift_anything(self):
        sys = full()
        assert all(is_admissible(sys, 0, w) for w in itertools.product((0, 1), repeat=5))

    def test_golden_forbids_11(self):
        assert not is_admissible(golden(), 0, (1, 1))

    def test_s2_indexing(self):
        # the 1->1 step out of position 1 sits over fiber theta(0) = 1
        sys = s2()
        assert not is_admissible(sys, 0, (0, 1, 1))
        assert is_admissible(sys, 0, (1, 1, 0))
        assert is_admissible(sys, 1, (0, 1, 1))

    def test_dead_end_rejected(self):
        with pytest.raises(DomainError):
            RandomSFT(BaseSystem([0], [1.0]), 2, np.array([[[1, 1], [0, 0]]], dtype=np.uint8))

    def test_word_checks_admissibility(self):
        with pytest.raises(DomainError):
            Word(golden(), 0, (1, 1))


class TestEnumeration:
    def test_full_shift_count(self):
        assert len(list(enumerate_words(full(), 0, 3))) == 8

    def test_golden_count(self):
        assert len(list(enumerate_words(golden(), 0, 5))) == 13

    def test_s2_path_count(self):
        sys = s2()
        A0, A1 = sys.transitions.astype(int)
        assert len(list(enumerate_words(sys, 0, 4))) == (A0 @ A1 @ A0).sum()

    def test_lexicographic(self):
        words = [w.symbols for w in enumerate_words(full(3), 0, 3)]
        assert words == sorted(words) and len(words) == 27

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 6))
    def test_matches_brute_force(self, seed, n):
        rng = np.random.default_rng(seed)
        a, m = int(rng.integers(2, 4)), int(rng.integers(1, 4))
        perm = list(rng.permutation(m))
        trans = (rng.random((m, a, a)) < 0.6).astype(np.uint8)
        trans[:, np.arange(a), rng.permutation(a)] = 1  # no dead rows or columns
        sys = RandomSFT(BaseSystem.uniform_on_cycles(perm), a, trans)
        for omega in range(m):
            got = [tuple(int(s) for s in r) for r in sys.word_array(omega, n)]
            assert got == brute_words(sys, omega, n)
            assert sys.count_words(omega, n) == len(got)


class TestSkew:
    def test_drop_first(self):
        w = skew_step(full(), Word(full(), 0, (0, 1, 1, 0)))
        assert w.symbols == (1, 1, 0) and w.fiber == 0

    def test_s2(self):
        w = skew_step(s2(), Word(s2(), 0, (0, 1)))
        assert (w.fiber, w.symbols) == (1, (1,))

    def test_iterate(self):
        sys = s2()
        w = Word(sys, 0, (0, 1, 0, 1, 0))
        for _ in range(4):
            w = skew_step(sys, w)
        assert len(w) == 1 and w.fiber == sys.base.step(0, 4)

    def test_needs_length_two(self):
        with pytest.raises(DomainError):
            skew_step(full(), Word(full(), 0, (0,)))


class TestMetric:
    @pytest.mark.parametrize("eps,t", [(0.6, 0), (0.5, 0), (0.3, 1), (0.25, 1), (0.2, 2), (0.01, 6)])
    def test_depth(self, eps, t):
        assert MetricParams(eps).depth == t

    def test_domain(self):
        for eps in (0.0, 1.0, 1.5):
            with pytest.raises(DomainError):
                MetricParams(eps)
        with pytest.raises(DomainError):
            MetricParams(0.5, lam=1.0)

    def test_from_depth_roundtrip(self):
        for t in range(10):
            assert MetricParams.from_depth(t).depth == t
            assert MetricParams.from_depth(t, lam=0.3).depth == t

    def test_examples(self):
        sys = full()
        W = lambda s: Word(sys, 0, s)
        assert bowen_separated(MetricParams(0.6), W((0, 1)), W((0, 0)), 2)
        assert not bowen_separated(MetricParams(0.6), W((0, 1, 0)), W((0, 1, 1)), 2)
        assert bowen_separated(MetricParams(0.2), W((0, 0, 0, 0)), W((0, 0, 0, 1)), 2)

    def test_short_words_rejected(self):
        sys = full()
        with pytest.raises(DomainError):
            bowen_separated(MetricParams(0.2), Word(sys, 0, (0, 0)), Word(sys, 0, (0, 1)), 2)

    @pytest.mark.parametrize("lam", [0.5, 0.3])
    def test_closed_form_exhaustive(self, lam):
        sys = full()
        for t in range(0, 3):
            mp = MetricParams.from_depth(t, lam)
            for n in range(1, 6 - t):
                words = list(itertools.product((0, 1), repeat=n + t + 3))
                for u in words[::3]:
                    for v in words:
                        d = bowen_distance(mp, first_disagreement(u, v), n)
                        assert bowen_separated(mp, Word(sys, 0, u), Word(sys, 0, v), n) == (d > mp.epsilon)


class TestPowerSystem:
    def test_block_codes(self):
        for code in range(8):
            assert encode_block(decode_block(code, 2, 3), 2) == code

    def test_power_counts(self):
        sys = s2()
        p = sys.power(2)
        assert p.alphabet == 4 and list(p.base.perm) == [0, 1]
        for omega in range(2):
            for n in range(1, 5):
                assert p.count_words(omega, n) == sys.count_words(omega, 2 * n)

    def test_power_one_identity(self):
        sys = golden()
        p = sys.power(1)
        assert np.array_equal(p.transitions, sys.transitions)
