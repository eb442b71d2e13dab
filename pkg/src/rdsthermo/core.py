"""Finite random subshifts of finite type.

A base system is a finite probability space ``{0, ..., m-1}`` with an
invertible measure preserving permutation ``theta``. Over each base point
``w`` sits the fiber ``E_w`` of one-sided sequences admissible for the
transition matrices ``A_w, A_{theta w}, ...``; the fiber map is the left
shift. Points are represented by finite words (cylinder representatives).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .errors import DomainError

WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BaseSystem:
    """Weighted points with an invertible measure preserving permutation."""

    perm: tuple
    weights: np.ndarray

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        weights = np.array(self.weights, dtype=np.float64)
        m = len(perm)
        if m == 0:
            raise DomainError("base system needs at least one point")
        if sorted(perm) != list(range(m)):
            raise DomainError(f"perm {perm} is not a bijection of 0..{m - 1}")
        if weights.shape != (m,):
            raise DomainError(f"expected {m} weights, got shape {weights.shape}")
        if np.any(weights < 0):
            raise DomainError("weights must be nonnegative")
        if abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise DomainError(f"weights sum to {weights.sum()!r}, not 1")
        bad = [w for w in range(m) if weights[perm[w]] != weights[w]]
        if bad:
            raise DomainError(f"weights are not theta-invariant at base points {bad}")
        weights.setflags(write=False)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform_on_cycles(cls, perm):
        """Canonical weights: every cycle gets equal total mass, spread evenly."""
        perm = tuple(perm)
        cycles = _cycles(perm)
        weights = np.empty(len(perm))
        for cyc in cycles:
            weights[list(cyc)] = 1.0 / (len(cycles) * len(cyc))
        return cls(perm, weights)

    @property
    def size(self) -> int:
        return len(self.perm)

    def step(self, omega: int, n: int = 1) -> int:
        for _ in range(n):
            omega = self.perm[omega]
        return omega

    def orbit(self, omega: int, n: int) -> list:
        """``[omega, theta omega, ..., theta^{n-1} omega]``."""
        out = []
        for _ in range(n):
            out.append(omega)
            omega = self.perm[omega]
        return out

    def cycles(self) -> list:
        return _cycles(self.perm)

    def power(self, k: int) -> "BaseSystem":
        return BaseSystem(tuple(self.step(w, k) for w in range(self.size)), self.weights)


def _cycles(perm):
    seen = set()
    out = []
    for start in range(len(perm)):
        if start in seen:
            continue
        cyc = []
        w = start
        while w not in seen:
            seen.add(w)
            cyc.append(w)
            w = perm[w]
        out.append(tuple(cyc))
    return out


@dataclass(frozen=True, eq=False)
class RandomSFT:
    """Bundle random subshift over a finite base.

    ``transitions[w]`` is the 0/1 matrix used for the step out of a symbol
    sitting over base point ``w``. ``symbols[w]`` flags the symbols that may
    appear over ``w``; it is all-true except for power lifts, where only
    admissible blocks are live super-symbols.
    """

    base: BaseSystem
    alphabet: int
    transitions: np.ndarray
    symbols: np.ndarray = None

    def __post_init__(self):
        m, a = self.base.size, int(self.alphabet)
        if a < 1:
            raise DomainError("alphabet must be positive")
        trans = np.array(self.transitions)
        if trans.shape != (m, a, a):
            raise DomainError(f"transitions must have shape {(m, a, a)}, got {trans.shape}")
        if not np.all((trans == 0) | (trans == 1)):
            raise DomainError("transition matrices must be 0/1")
        trans = trans.astype(np.uint8)
        if self.symbols is None:
            live = np.ones((m, a), dtype=bool)
        else:
            live = np.array(self.symbols, dtype=bool)
            if live.shape != (m, a):
                raise DomainError(f"symbol masks must have shape {(m, a)}")
        for w in range(m):
            nxt = self.base.perm[w]
            A = trans[w]
            if np.any(A[~live[w]]) or np.any(A[:, ~live[nxt]]):
                raise DomainError(f"fiber {w}: transitions touch dead symbols")
            rows = A.sum(axis=1)[live[w]]
            cols = A.sum(axis=0)[live[nxt]]
            if np.any(rows == 0):
                raise DomainError(f"fiber {w}: a row of A has no 1 (dead end)")
            if np.any(cols == 0):
                raise DomainError(f"fiber {w}: a column of A has no 1")
        trans.setflags(write=False)
        live.setflags(write=False)
        object.__setattr__(self, "alphabet", a)
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "symbols", live)

    @classmethod
    def full_shift(cls, a: int, base: BaseSystem | None = None) -> "RandomSFT":
        base = base or BaseSystem((0,), [1.0])
        return cls(base, a, np.ones((base.size, a, a), dtype=np.uint8))

    @property
    def m(self) -> int:
        return self.base.size

    def _check_fiber(self, omega):
        if not 0 <= omega < self.m:
            raise DomainError(f"fiber {omega} outside 0..{self.m - 1}")

    def is_admissible(self, omega: int, symbols: Sequence[int]) -> bool:
        self._check_fiber(omega)
        symbols = list(symbols)
        if not symbols:
            raise DomainError("empty symbol sequence")
        for s in symbols:
            if not 0 <= s < self.alphabet:
                raise DomainError(f"symbol {s} outside 0..{self.alphabet - 1}")
        if not self.symbols[omega, symbols[0]]:
            return False
        w = omega
        for x, y in zip(symbols, symbols[1:]):
            if not self.transitions[w, x, y]:
                return False
            w = self.base.perm[w]
        return True

    def orbit_transitions(self, omega: int, length: int) -> np.ndarray:
        """Stack of the ``length-1`` matrices met by a word of ``length``."""
        orbit = self.base.orbit(omega, max(length - 1, 0))
        return np.ascontiguousarray(self.transitions[orbit].reshape(-1, self.alphabet, self.alphabet))

    def word_array(self, omega: int, n: int) -> np.ndarray:
        """Admissible ``n``-words at ``omega`` as rows, lexicographically."""
        self._check_fiber(omega)
        if n < 1:
            raise DomainError("word length must be >= 1")
        return kernels.admissible_words(self.orbit_transitions(omega, n), self.symbols[omega])

    def count_words(self, omega: int, n: int) -> int:
        """Path count ``1^T A_w A_{theta w} ... 1`` in exact integer arithmetic."""
        self._check_fiber(omega)
        if n < 1:
            raise DomainError("word length must be >= 1")
        vec = self.symbols[omega].astype(object)
        for A in self.orbit_transitions(omega, n):
            vec = vec.dot(A.astype(object))
        return int(sum(vec))

    def word(self, omega: int, symbols: Sequence[int]) -> "Word":
        return Word(self, omega, tuple(int(s) for s in symbols))

    def canonical_extension(self, omega: int, symbols: Sequence[int], length: int) -> tuple:
        """Extend an admissible word by always taking the smallest allowed successor."""
        out = list(symbols)
        w = self.base.step(omega, len(out) - 1)
        while len(out) < length:
            out.append(int(np.flatnonzero(self.transitions[w, out[-1]])[0]))
            w = self.base.perm[w]
        return tuple(out)

    def power(self, k: int) -> "RandomSFT":
        """The system ``T^k`` over ``theta^k`` with k-blocks as super-symbols.

        Super-symbol codes are the base-``a`` values of the blocks, so code
        order is lexicographic block order.
        """
        if k < 1:
            raise DomainError("power must be >= 1")
        if k == 1:
            return self
        a, m = self.alphabet, self.m
        big = a**k
        base_k = self.base.power(k)
        live = np.zeros((m, big), dtype=bool)
        for w in range(m):
            for block in self.word_array(w, k):
                live[w, encode_block(block, a)] = True
        trans = np.zeros((m, big, big), dtype=np.uint8)
        for w in range(m):
            last = self.base.step(w, k - 1)
            nxt = base_k.perm[w]
            for u in np.flatnonzero(live[w]):
                u_last = u % a
                for v in np.flatnonzero(live[nxt]):
                    v_first = v // a ** (k - 1)
                    trans[w, u, v] = self.transitions[last, u_last, v_first]
        return RandomSFT(base_k, big, trans, live)


def encode_block(block, a: int) -> int:
    code = 0
    for s in block:
        code = code * a + int(s)
    return code


def decode_block(code: int, a: int, k: int) -> tuple:
    out = []
    for _ in range(k):
        code, r = divmod(code, a)
        out.append(r)
    return tuple(reversed(out))


def lift_symbols(symbols: Sequence[int], a: int, k: int) -> tuple:
    """Group a word into complete k-blocks (a trailing partial block is dropped)."""
    return tuple(encode_block(symbols[i : i + k], a) for i in range(0, len(symbols) - k + 1, k))


def unlift_symbols(codes: Sequence[int], a: int, k: int) -> tuple:
    out = []
    for c in codes:
        out.extend(decode_block(c, a, k))
    return tuple(out)


def unlift_array(words: np.ndarray, a: int, k: int) -> np.ndarray:
    """Vectorized :func:`unlift_symbols` over the rows of ``words``."""
    words = np.asarray(words, dtype=np.int64)
    digits = [(words // a ** (k - 1 - i)) % a for i in range(k)]
    return np.stack(digits, axis=-1).reshape(words.shape[0], -1).astype(np.int16)


@dataclass(frozen=True)
class Word:
    """A finite admissible word over a fiber; stands for its cylinder."""

    sys: RandomSFT = field(repr=False, compare=False)
    fiber: int
    symbols: tuple

    def __post_init__(self):
        if not self.sys.is_admissible(self.fiber, self.symbols):
            raise DomainError(f"{self.symbols} is not admissible at fiber {self.fiber}")

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return f"({self.fiber}, {''.join(map(str, self.symbols))})"


def is_admissible(sys: RandomSFT, omega: int, symbols: Sequence[int]) -> bool:
    return sys.is_admissible(omega, symbols)


def enumerate_words(sys: RandomSFT, omega: int, n: int) -> Iterator[Word]:
    """Yield every admissible ``n``-word at ``omega`` once, lexicographically."""
    for row in sys.word_array(omega, n):
        yield Word(sys, omega, tuple(int(s) for s in row))


def skew_step(sys: RandomSFT, w: Word) -> Word:
    """Skew product ``(omega, x) -> (theta omega, shifted x)`` on a representative."""
    if len(w) < 2:
        raise DomainError("cannot shift a 1-word: no residual symbols")
    return Word(sys, sys.base.perm[w.fiber], w.symbols[1:])


@dataclass(frozen=True)
class MetricParams:
    """Symbol metric ``d(x, y) = lam ** (first disagreement index)`` and scale ``epsilon``."""

    epsilon: float
    lam: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise DomainError("lambda must lie in (0, 1)")
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError("epsilon must lie in (0, 1)")

    @classmethod
    def from_depth(cls, t: int, lam: float = 0.5) -> "MetricParams":
        if t < 0:
            raise DomainError("depth must be >= 0")
        return cls(lam ** (t + 0.5), lam)

    @property
    def depth(self) -> int:
        # unique t with lam**(t+1) <= epsilon < lam**t
        t = 0
        while self.lam ** (t + 1) > self.epsilon:
            t += 1
        return t


def first_disagreement(u: Sequence[int], v: Sequence[int]) -> int | None:
    for j, (x, y) in enumerate(zip(u, v)):
        if x != y:
            return j
    return None


def bowen_distance(mp: MetricParams, j: int | None, n: int) -> float:
    """``d_n`` for points whose first disagreement is at index ``j``."""
    if j is None:
        return 0.0
    return mp.lam ** max(j - n + 1, 0)


def bowen_separated(mp: MetricParams, u: Word, v: Word, n: int) -> bool:
    """Decide ``d_n(x, y) > epsilon`` for any points extending ``u`` and ``v``."""
    if u.fiber != v.fiber:
        raise DomainError(f"words live on different fibers ({u.fiber} vs {v.fiber})")
    need = n + mp.depth
    if len(u) < need or len(v) < need:
        raise DomainError(f"words need length >= {need} to decide separation at horizon {n}")
    j = first_disagreement(u.symbols[:need], v.symbols[:need])
    return j is not None and j < need

