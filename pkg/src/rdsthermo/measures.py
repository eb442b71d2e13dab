"""Invariant random Markov measures and the measure-side functionals.

A random Markov measure is given fiberwise by an initial distribution
``p_w`` and a row-stochastic kernel ``P_w`` supported in ``A_w``;
Theta-invariance is the disintegration condition ``p_w P_w = p_{theta w}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import MetricParams, RandomSFT, decode_block
from .errors import BudgetError, DegenerateMeasureError, DomainError
from .potentials import PotentialSeq
from .pressure import MAX_WORDS, greedy_separated_set

PROB_TOL = 1e-12
INVARIANCE_TOL = 1e-10
STATIONARY_TOL = 1e-12
MAX_SQUARINGS = 200


def _xlogx(p):
    p = np.asarray(p, dtype=np.float64)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def shannon(p) -> float:
    """Entropy of a probability vector, with ``0 log 0 = 0``."""
    return float(-_xlogx(p).sum())


def stationary_vector(K: np.ndarray) -> np.ndarray:
    """Left fixed vector of a row-stochastic matrix by accelerated power iteration.

    Iterates on the lazy chain ``(I + K) / 2`` (same fixed vectors, no
    periodicity) and squares the iteration matrix each round, so round
    ``j`` applies ``2^j`` steps. Starts from the uniform vector.
    """
    a = K.shape[0]
    M = 0.5 * (np.eye(a) + K)
    p = np.full(a, 1.0 / a)
    for _ in range(MAX_SQUARINGS):
        p = p @ M
        p = p / p.sum()
        if np.abs(p @ K - p).sum() <= STATIONARY_TOL:
            return p
        M = M @ M
    raise ArithmeticError("stationary vector did not converge")


@dataclass(frozen=True, eq=False)
class RandomMarkovMeasure:
    """Theta-invariant measure with Markov fiber measures.

    ``initial`` has shape (m, a), ``kernel`` shape (m, a, a). Rows of dead
    symbols (power lifts only) are zero.
    """

    sys: RandomSFT
    initial: np.ndarray
    kernel: np.ndarray

    def __post_init__(self):
        sys = self.sys
        m, a = sys.m, sys.alphabet
        p = np.array(self.initial, dtype=np.float64)
        P = np.array(self.kernel, dtype=np.float64)
        if p.shape != (m, a) or P.shape != (m, a, a):
            raise DomainError(f"initial must be {(m, a)} and kernel {(m, a, a)}")
        if np.any(p < 0) or np.any(P < 0):
            raise DomainError("probabilities must be nonnegative")
        if np.any(np.abs(p.sum(axis=1) - 1) > PROB_TOL):
            raise DomainError("each initial distribution must sum to 1")
        rows = P.sum(axis=2)
        live = sys.symbols
        if np.any(np.abs(rows[live] - 1) > PROB_TOL) or np.any(rows[~live] != 0):
            raise DomainError("kernel rows must sum to 1 (0 for dead symbols)")
        if np.any((P > 0) & (sys.transitions == 0)):
            raise DomainError("kernel support must lie inside the transition matrices")
        for w in range(m):
            if np.abs(p[w] @ P[w] - p[sys.base.perm[w]]).max() > INVARIANCE_TOL:
                raise DomainError(f"not Theta-invariant: p_{w} P_{w} != p_theta{w}")
        p.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "initial", p)
        object.__setattr__(self, "kernel", P)

    @classmethod
    def from_kernels(cls, sys: RandomSFT, kernel) -> "RandomMarkovMeasure":
        """Derive invariant initials cycle by cycle from freely chosen kernels."""
        P = np.array(kernel, dtype=np.float64)
        if P.shape != sys.transitions.shape:
            raise DomainError(f"kernel must have shape {sys.transitions.shape}")
        rows = P.sum(axis=2)
        if np.any(P < 0) or np.any(np.abs(rows[sys.symbols] - 1) > PROB_TOL):
            raise DomainError("kernel rows must be probability vectors")
        p = np.zeros((sys.m, sys.alphabet))
        for cyc in sys.base.cycles():
            K = np.eye(sys.alphabet)
            for w in cyc:
                K = K @ P[w]
            cur = stationary_vector(K)
            for w in cyc:
                p[w] = cur
                cur = cur @ P[w]
        return cls(sys, p, P)

    @classmethod
    def uniform(cls, sys: RandomSFT) -> "RandomMarkovMeasure":
        """Uniform transitions over the allowed successors."""
        A = sys.transitions.astype(np.float64)
        rows = A.sum(axis=2, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            P = np.where(rows > 0, A / rows, 0.0)
        return cls.from_kernels(sys, P)

    @classmethod
    def bernoulli(cls, sys: RandomSFT, probs) -> "RandomMarkovMeasure":
        probs = np.asarray(probs, dtype=np.float64)
        P = np.broadcast_to(probs, (sys.m, sys.alphabet, sys.alphabet)).copy()
        p = np.broadcast_to(probs, (sys.m, sys.alphabet)).copy()
        return cls(sys, p, P)

    def masses(self, omega: int, words: np.ndarray) -> np.ndarray:
        """Cylinder masses ``mu_omega[w]`` for each row of ``words``."""
        words = np.asarray(words)
        mass = self.initial[omega][words[:, 0]]
        w = omega
        for i in range(words.shape[1] - 1):
            mass = mass * self.kernel[w][words[:, i], words[:, i + 1]]
            w = self.sys.base.perm[w]
        return mass


def cylinder_mass(mu: RandomMarkovMeasure, w) -> float:
    return float(mu.masses(w.fiber, np.array([w.symbols]))[0])


def fiber_entropy(mu: RandomMarkovMeasure) -> float:
    """``h_mu^(r)(T)`` in closed form: the base average of per-fiber Markov entropy rates."""
    weights = mu.sys.base.weights
    total = 0.0
    for w in range(mu.sys.m):
        rate = -(mu.initial[w][:, None] * _xlogx(mu.kernel[w])).sum()
        total += weights[w] * rate
    return float(total)


def entropy_partition_limit(mu: RandomMarkovMeasure, n: int) -> float:
    """``(1/n) sum_w P(w) H_{mu_w}(n-cylinders)``: the finite-n entropy of the alphabet partition."""
    if n < 1:
        raise DomainError("n must be >= 1")
    sys = mu.sys
    total = 0.0
    for w in range(sys.m):
        if sys.base.weights[w] == 0:
            continue
        if sys.count_words(w, n) > MAX_WORDS:
            raise BudgetError(f"too many {n}-cylinders at fiber {w}")
        total += sys.base.weights[w] * shannon(mu.masses(w, sys.word_array(w, n)))
    return float(total / n)


def integrate(masses: np.ndarray, values: np.ndarray) -> float:
    """``sum mass * value`` over atoms of positive mass; ``-inf`` dominates."""
    pos = masses > 0
    vals = values[pos]
    if np.any(vals == -math.inf):
        return -math.inf
    return kernels.neumaier_tree_sum(masses[pos] * vals)


@dataclass
class PhiStarResult:
    schedule: list
    values: list
    stderr: list
    method: str
    reported: float = field(init=False)
    envelope: float = field(init=False)

    def __post_init__(self):
        self.reported = self.values[-1]
        self.envelope = min(self.values)

    def to_dict(self):
        return {
            "schedule": self.schedule,
            "values": self.values,
            "stderr": self.stderr,
            "method": self.method,
            "reported": self.reported,
            "envelope": self.envelope,
        }

    def csv_rows(self):
        out, env = [], math.inf
        for n, v, s in zip(self.schedule, self.values, self.stderr):
            env = min(env, v)
            out.append((n, v, env, s))
        return out


def exact_integral(mu: RandomMarkovMeasure, phi: PotentialSeq, n: int) -> float:
    """``int f_n d mu`` by summing over ``locality(n)``-cylinders."""
    sys = mu.sys
    L = max(phi.locality(n), 1)
    total = 0.0
    for w in range(sys.m):
        weight = sys.base.weights[w]
        if weight == 0:
            continue
        words = sys.word_array(w, L)
        part = integrate(mu.masses(w, words), phi.values(n, w, words))
        if part == -math.inf:
            return -math.inf
        total += weight * part
    return float(total)


def _exact_cost(sys, L):
    return sum(sys.count_words(w, L) for w in range(sys.m))


MC_BLOCK = 4096


def sample_paths(mu: RandomMarkovMeasure, length: int, n_paths: int, seed: int, block: int):
    """One block of paths; block ``b`` draws from its own Philox stream so blocks are independent of scheduling."""
    sys = mu.sys
    rng = np.random.Generator(np.random.Philox(key=(int(block) << 64) | (int(seed) & (2**64 - 1))))
    fibers = rng.choice(sys.m, size=n_paths, p=sys.base.weights)
    u = rng.random((n_paths, length))
    words = np.empty((n_paths, length), dtype=np.int16)
    cum_init = np.cumsum(mu.initial, axis=1)
    cum_kernel = np.cumsum(mu.kernel, axis=2)
    cur_fiber = fibers.copy()
    words[:, 0] = _draw(cum_init[cur_fiber], u[:, 0])
    for i in range(1, length):
        words[:, i] = _draw(cum_kernel[cur_fiber, words[:, i - 1]], u[:, i])
        cur_fiber = np.asarray(sys.base.perm)[cur_fiber]
    return fibers, words


def _draw(cum, u):
    idx = (u[:, None] >= cum).sum(axis=1)
    return np.minimum(idx, cum.shape[1] - 1)


def mc_integral(mu, phi, n, n_paths=100_000, seed=0):
    """Monte Carlo ``int f_n d mu`` and its standard error."""
    L = max(phi.locality(n), 1)
    vals = []
    for b, start in enumerate(range(0, n_paths, MC_BLOCK)):
        size = min(MC_BLOCK, n_paths - start)
        fibers, words = sample_paths(mu, L, size, seed, b)
        out = np.empty(size)
        for w in np.unique(fibers):
            sel = fibers == w
            out[sel] = phi.values(n, int(w), words[sel])
        vals.append(out)
    vals = np.concatenate(vals)
    if np.any(vals == -math.inf):
        return -math.inf, 0.0
    mean = kernels.neumaier_tree_sum(vals) / vals.size
    err = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else math.inf
    return mean, err


def phi_star(mu: RandomMarkovMeasure, phi: PotentialSeq, schedule, *, mc_paths: int = 100_000,
             seed: int = 0, allow_mc: bool = True, force_mc: bool = False) -> PhiStarResult:
    """``Phi*(mu) = lim (1/n) int f_n d mu`` along ``schedule``.

    Exact cylinder sums are used while the word count stays under the
    budget; beyond it, seeded Monte Carlo (when allowed).
    """
    schedule = [int(n) for n in schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])) or schedule[0] < 1:
        raise DomainError("schedule must be a nonempty increasing list of positive horizons")
    values, errs, methods = [], [], set()
    for n in schedule:
        L = max(phi.locality(n), 1)
        exact_ok = not force_mc and _exact_cost(mu.sys, L) <= MAX_WORDS
        if exact_ok:
            values.append(exact_integral(mu, phi, n) / n)
            errs.append(0.0)
            methods.add("exact")
        elif allow_mc:
            mean, err = mc_integral(mu, phi, n, mc_paths, seed)
            values.append(mean / n)
            errs.append(err / n)
            methods.add("mc")
        else:
            raise BudgetError(f"exact Phi* at n={n} exceeds budget and Monte Carlo is disabled")
    method = "+".join(sorted(methods))
    return PhiStarResult(schedule, values, errs, method)


@dataclass(frozen=True, eq=False)
class AtomicFiberMeasure:
    """Finitely supported fiber measures: per fiber, rows of ``words`` with ``weights``."""

    sys: RandomSFT
    words: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.words) != self.sys.m or len(self.weights) != self.sys.m:
            raise DomainError("need one atom list per fiber")
        for w, (wd, wt) in enumerate(zip(self.words, self.weights)):
            if len(wd) != len(wt):
                raise DomainError(f"fiber {w}: words and weights differ in length")
            if np.any(np.asarray(wt) < 0) or abs(float(np.sum(wt)) - 1) > 1e-12:
                raise DomainError(f"fiber {w}: weights must be nonnegative and sum to 1")

    def length(self, omega: int) -> int:
        return self.words[omega].shape[1]

    def prefix_masses(self, omega: int, q: int) -> np.ndarray:
        """Masses of the distinct ``q``-prefixes in the support."""
        words = self.words[omega]
        if words.shape[1] < q:
            raise DomainError(f"atoms at fiber {omega} shorter than {q}")
        _, inv = np.unique(words[:, :q], axis=0, return_inverse=True)
        return np.bincount(inv.ravel(), weights=self.weights[omega])

    def conditional_entropy(self, q: int) -> float:
        """``H(join of q alphabet partitions | base)``."""
        base = self.sys.base.weights
        return float(sum(base[w] * shannon(self.prefix_masses(w, q)) for w in range(self.sys.m) if base[w] > 0))

    def integral(self, phi: PotentialSeq, n: int, shift: int = 0) -> float:
        """``int f_n o Theta^shift d nu``."""
        sys = self.sys
        total = 0.0
        for w in range(sys.m):
            weight = sys.base.weights[w]
            if weight == 0:
                continue
            src = self.words[w][:, shift:]
            part = integrate(np.asarray(self.weights[w]), phi.values(n, sys.base.step(w, shift), src))
            if part == -math.inf:
                return -math.inf
            total += weight * part
        return float(total)


def gibbs_atomic(sys: RandomSFT, phi: PotentialSeq, mp: MetricParams, n: int, length: int | None = None) -> AtomicFiberMeasure:
    """Atomic measures ``nu_w`` proportional to ``exp f_n`` on a maximal separated set.

    Representatives are extended to ``length`` symbols (default ``2n + t``)
    by smallest admissible continuation.
    """
    t = mp.depth
    length = 2 * n + t if length is None else length
    if length < n + t:
        raise DomainError(f"length must be >= n + t = {n + t}")
    words, weights = [], []
    for w in range(sys.m):
        G = greedy_separated_set(sys, phi, mp, w, n)
        rows = np.array([sys.canonical_extension(w, g.symbols, length) for g in G], dtype=np.int16)
        vals = phi.values(n, w, rows)
        top = vals.max()
        if top == -math.inf:
            raise DegenerateMeasureError(f"every weight vanishes at fiber {w}; no Gibbs normalization")
        e = np.exp(vals - top)
        words.append(rows)
        weights.append(e / kernels.neumaier_tree_sum(e))
    return AtomicFiberMeasure(sys, tuple(words), tuple(weights))


def cesaro_average(nu: AtomicFiberMeasure, n: int) -> AtomicFiberMeasure:
    """``(1/n) sum_{i<n} Theta^i nu``; atoms are truncated to a common length."""
    sys = nu.sys
    if n < 1:
        raise DomainError("n must be >= 1")
    if n == 1:
        return nu
    inv = [0] * sys.m
    for w, nxt in enumerate(sys.base.perm):
        inv[nxt] = w
    short = min(nu.length(w) for w in range(sys.m))
    if short < n:
        raise DomainError(f"atoms of length {short} cannot be shifted {n - 1} times")
    keep = short - (n - 1)
    words, weights = [], []
    for target in range(sys.m):
        rows, wts = [], []
        src = target
        for i in range(n):
            rows.append(nu.words[src][:, i : i + keep])
            wts.append(np.asarray(nu.weights[src]) / n)
            src = inv[src]
        words.append(np.concatenate(rows))
        weights.append(np.concatenate(wts))
    return AtomicFiberMeasure(sys, tuple(words), tuple(weights))


@dataclass
class Lemma2Report:
    rows: list  # (n, k, lhs, rhs, margin)

    @property
    def worst_margin(self) -> float:
        return min((r[4] for r in self.rows), default=math.inf)

    @property
    def ok(self) -> bool:
        return self.worst_margin >= -1e-9


def lemma2_check(sys: RandomSFT, phi: PotentialSeq, nu_family: dict, k: int) -> Lemma2Report:
    """Finite-n form of the block-decomposition bound.

    ``int f_n d nu_n <= ((n-k+1)/k) int f_k d mu'_n + 2k ||f_1||`` where
    ``mu'_n`` averages ``Theta^s nu_n`` over ``s <= n-k``.
    """
    norm = phi.f1_norm()
    rows = []
    for n, nu in sorted(nu_family.items()):
        if not k < n:
            raise DomainError(f"need k < n, got k={k}, n={n}")
        lhs = nu.integral(phi, n)
        parts = [nu.integral(phi, k, shift=s) for s in range(n - k + 1)]
        if math.isinf(norm):
            rhs = math.inf
        elif any(p == -math.inf for p in parts):
            rhs = -math.inf
        else:
            rhs = math.fsum(parts) / k + 2 * k * norm
        if lhs == -math.inf:
            margin = math.inf
        else:
            margin = rhs - lhs
        rows.append((n, k, lhs, rhs, margin))
    return Lemma2Report(rows)


def lift_measure(mu: RandomMarkovMeasure, k: int) -> RandomMarkovMeasure:
    """The same measure viewed on the k-power system."""
    if k == 1:
        return mu
    sys = mu.sys
    lifted = sys.power(k)
    a, big = sys.alphabet, lifted.alphabet
    blocks = [decode_block(c, a, k) for c in range(big)]
    init = np.zeros((sys.m, big))
    P = np.zeros((sys.m, big, big))
    for w in range(sys.m):
        for u in range(big):
            if not lifted.symbols[w, u]:
                continue
            U = np.array([blocks[u]])
            init[w, u] = mu.masses(w, U)[0]
            last = sys.base.step(w, k - 1)
            for v in np.flatnonzero(lifted.transitions[w, u]):
                P[w, u, v] = _chain(mu, last, blocks[u][-1], blocks[v])
    return RandomMarkovMeasure(lifted, init, P)


def _chain(mu, w, prev, block):
    # probability of emitting ``block`` after ``prev`` when the next step leaves fiber ``w``
    p = 1.0
    for s in block:
        p *= mu.kernel[w][prev, s]
        prev = s
        w = mu.sys.base.perm[w]
    return p
