"""Subadditive potential sequences ``Phi = {f_n}`` on a random subshift.

All potentials here are locally constant: ``f_n`` only reads the first
``locality(n)`` symbols of a point. Values are extended reals carried as
Python/numpy floats, with ``-inf`` legal (``exp(-inf) == 0``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import RandomSFT, Word, unlift_array
from .errors import DomainError

ExtReal = float
NEG_INF = -math.inf


class PotentialSeq:
    """Base class. Subclasses implement :meth:`locality` and :meth:`values`."""

    kind = "abstract"

    sys: RandomSFT

    def locality(self, n: int) -> int:
        raise NotImplementedError

    def values(self, n: int, omega: int, words: np.ndarray) -> np.ndarray:
        """``f_n(omega, .)`` on each row of ``words`` (rows at least ``locality(n)`` long)."""
        raise NotImplementedError

    def power(self, k: int) -> "PotentialSeq":
        raise NotImplementedError

    def shift(self, c: float) -> "PotentialSeq":
        """The sequence ``f_n + n c``."""
        raise NotImplementedError

    def deficit(self, n: int) -> int:
        """Smallest separation depth at which ``f_n`` is constant on separating cylinders."""
        return max(self.locality(n) - n, 0)

    def f1_sup(self) -> np.ndarray:
        """``sup_x |f_1(omega, x)|`` per fiber (``inf`` where ``f_1`` hits ``-inf``)."""
        L = max(self.locality(1), 1)
        out = np.empty(self.sys.m)
        for w in range(self.sys.m):
            vals = self.values(1, w, self.sys.word_array(w, L))
            out[w] = np.max(np.abs(vals)) if vals.size else 0.0
        return out

    def f1_norm(self) -> float:
        """``||f_1|| = sum_w P(w) sup_x |f_1(w, x)|``."""
        sup = self.f1_sup()
        weights = self.sys.base.weights
        if np.any(np.isinf(sup[weights > 0])):
            return math.inf
        return float(np.dot(weights, np.where(weights > 0, sup, 0.0)))

    def _check_n(self, n):
        if n < 1:
            raise DomainError("potential index n must be >= 1")


@dataclass(frozen=True, eq=False)
class Zero(PotentialSeq):
    sys: RandomSFT
    kind = "zero"

    def locality(self, n):
        return 0

    def values(self, n, omega, words):
        self._check_n(n)
        return np.zeros(len(words))

    def power(self, k):
        return Zero(self.sys.power(k))

    def shift(self, c):
        return Constant(self.sys, c)


@dataclass(frozen=True, eq=False)
class Constant(PotentialSeq):
    """``f_n = n c`` everywhere."""

    sys: RandomSFT
    c: float
    kind = "constant"

    def locality(self, n):
        return 0

    def values(self, n, omega, words):
        self._check_n(n)
        return np.full(len(words), n * self.c)

    def power(self, k):
        return Constant(self.sys.power(k), k * self.c)

    def shift(self, c):
        return Constant(self.sys, self.c + c)


@dataclass(frozen=True, eq=False)
class Additive(PotentialSeq):
    """Birkhoff sums ``f_n = sum_{i<n} f_1 o Theta^i`` of a depth-``d`` table.

    ``table`` has shape ``(m, a, ..., a)`` with ``depth`` symbol axes:
    ``table[w][s_0, ..., s_{d-1}] = f_1(w, s)``.
    """

    sys: RandomSFT
    depth: int
    table: np.ndarray
    kind = "additive"

    def __post_init__(self):
        a, m, d = self.sys.alphabet, self.sys.m, int(self.depth)
        if d < 1:
            raise DomainError("additive depth must be >= 1")
        table = np.array(self.table, dtype=np.float64)
        if table.shape != (m,) + (a,) * d:
            raise DomainError(f"table must have shape {(m,) + (a,) * d}, got {table.shape}")
        if not np.all(np.isfinite(table)):
            raise DomainError("additive tables must be finite")
        table.setflags(write=False)
        object.__setattr__(self, "depth", d)
        object.__setattr__(self, "table", table)

    def locality(self, n):
        return n + self.depth - 1

    def values(self, n, omega, words):
        self._check_n(n)
        words = np.asarray(words)
        need = self.locality(n)
        if words.shape[1] < need:
            raise DomainError(f"words need length >= {need}")
        flat = self.table.reshape(self.sys.m, -1)
        a, d = self.sys.alphabet, self.depth
        acc = np.zeros(len(words))
        w = omega
        for i in range(n):
            codes = np.zeros(len(words), dtype=np.int64)
            for s in range(d):
                codes = codes * a + words[:, i + s]
            acc = acc + flat[w][codes]
            w = self.sys.base.perm[w]
        return acc

    def power(self, k):
        if k == 1:
            return self
        lifted = self.sys.power(k)
        a, d = self.sys.alphabet, self.depth
        d_new = 1 + -(-(d - 1) // k)
        big = lifted.alphabet
        table = np.zeros((lifted.m,) + (big,) * d_new)
        flat = table.reshape(lifted.m, -1)
        for w in range(lifted.m):
            blocks = lifted.word_array(w, d_new)
            vals = self.values(k, w, unlift_array(blocks, a, k))
            codes = np.zeros(len(blocks), dtype=np.int64)
            for s in range(d_new):
                codes = codes * big + blocks[:, s]
            flat[w][codes] = vals
        return Additive(lifted, d_new, table)

    def shift(self, c):
        return Additive(self.sys, self.depth, self.table + c)


@dataclass(frozen=True, eq=False)
class MatrixCocycle(PotentialSeq):
    """``f_n(w, x) = log || M_{theta^{n-1} w}(x_{n-1}) ... M_w(x_0) ||``.

    ``matrices`` has shape ``(m, a, q, q)``. ``norm`` is ``"inf"`` (max
    absolute row sum) or ``"2"`` (spectral norm). A vanishing product gives
    ``-inf``.
    """

    sys: RandomSFT
    matrices: np.ndarray
    norm: str = "inf"
    kind = "cocycle"

    def __post_init__(self):
        mats = np.array(self.matrices, dtype=np.float64)
        m, a = self.sys.m, self.sys.alphabet
        if mats.ndim != 4 or mats.shape[:2] != (m, a) or mats.shape[2] != mats.shape[3]:
            raise DomainError(f"matrices must have shape (m={m}, a={a}, q, q), got {mats.shape}")
        if np.any(mats < 0) or not np.all(np.isfinite(mats)):
            raise DomainError("cocycle matrices must be finite and nonnegative")
        if self.norm not in ("inf", "2"):
            raise DomainError(f"unknown norm {self.norm!r}")
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @property
    def q(self) -> int:
        return self.matrices.shape[2]

    def locality(self, n):
        return n

    def products(self, n, omega, words):
        words = np.asarray(words)
        if words.shape[1] < n:
            raise DomainError(f"words need length >= {n}")
        mats = np.ascontiguousarray(self.matrices[self.sys.base.orbit(omega, n)])
        return kernels.prefix_products(np.ascontiguousarray(words[:, :n], dtype=np.int16), mats)

    def values(self, n, omega, words):
        self._check_n(n)
        prods = self.products(n, omega, words)
        if self.norm == "inf":
            norms = np.abs(prods).sum(axis=2).max(axis=1) if len(prods) else np.zeros(0)
        else:
            norms = np.linalg.norm(prods, ord=2, axis=(1, 2)) if len(prods) else np.zeros(0)
        with np.errstate(divide="ignore"):
            return np.log(norms)

    def power(self, k):
        if k == 1:
            return self
        lifted = self.sys.power(k)
        a = self.sys.alphabet
        blocks = unlift_array(np.arange(lifted.alphabet)[:, None], a, k)
        mats = np.stack([self.products(k, w, blocks) for w in range(self.sys.m)])
        return MatrixCocycle(lifted, mats, self.norm)

    def shift(self, c):
        return MatrixCocycle(self.sys, self.matrices * math.exp(c), self.norm)


def eval(phi: PotentialSeq, n: int, w: Word) -> ExtReal:
    """``f_n`` at any point of the cylinder ``w``."""
    need = phi.locality(n)
    if len(w) < need:
        raise DomainError(f"word of length {len(w)} too short; f_{n} needs {need} symbols")
    row = np.array([w.symbols], dtype=np.int16)
    return float(phi.values(n, w.fiber, row)[0])


def power(phi: PotentialSeq, k: int) -> PotentialSeq:
    """``Phi^k = {f_{kn}}`` as a sequence on the k-power system."""
    if k < 1:
        raise DomainError("k must be >= 1")
    return phi.power(k)


@dataclass
class SubadditivityReport:
    worst_margin: float
    witness: Word | None
    split: tuple | None
    checked: int

    @property
    def ok(self) -> bool:
        return self.worst_margin >= -1e-9


def split_margins(phi: PotentialSeq, omega: int, words: np.ndarray, n: int, m: int) -> np.ndarray:
    """``f_n(w) + f_m(Theta^n w) - f_{n+m}(w)``; ``-inf`` on the left counts as ``+inf``."""
    sys = phi.sys
    left = phi.values(n + m, omega, words)
    right = phi.values(n, omega, words) + phi.values(m, sys.base.step(omega, n), words[:, n:])
    with np.errstate(invalid="ignore"):
        margin = right - left
    margin[np.isneginf(left)] = math.inf
    return margin


def check_subadditive(phi: PotentialSeq, sys: RandomSFT, n_max: int) -> SubadditivityReport:
    """Exhaustively test ``f_{n+m} <= f_n + f_m o Theta^n`` for ``n + m <= n_max``."""
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    L = max(phi.locality(n_max), n_max)
    worst, witness, split, checked = math.inf, None, None, 0
    for omega in range(sys.m):
        words = sys.word_array(omega, L)
        for n in range(1, n_max):
            for m in range(1, n_max - n + 1):
                margin = split_margins(phi, omega, words, n, m)
                checked += len(margin)
                i = int(np.argmin(margin))
                if margin[i] < worst:
                    worst = float(margin[i])
                    witness = Word(sys, omega, tuple(int(s) for s in words[i]))
                    split = (n, m)
    return SubadditivityReport(worst, witness, split, checked)


def table_from_exp(weights) -> np.ndarray:
    """Log of a table of positive Boltzmann factors."""
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(weights <= 0):
        raise DomainError("exp-table entries must be positive")
    return np.log(weights)


__all__ = [
    "ExtReal",
    "NEG_INF",
    "PotentialSeq",
    "Zero",
    "Constant",
    "Additive",
    "MatrixCocycle",
    "eval",
    "power",
    "check_subadditive",
    "SubadditivityReport",
]
