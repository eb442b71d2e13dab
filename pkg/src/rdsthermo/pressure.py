"""Topological pressure of a subadditive sequence on a random subshift.

For a locally constant potential and a scale ``epsilon`` of depth ``t``,
a maximal ``(omega, epsilon, n)``-separated set holds exactly one point in
each admissible ``(n+t)``-cylinder, so the separated-set supremum is the
partition function ``Z_n(omega) = sum_w exp f_n(omega, w)`` over those
cylinders. The brute-force routine recomputes it from the metric alone.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import MetricParams, RandomSFT, Word, bowen_separated
from .errors import BudgetError, DomainError
from .potentials import PotentialSeq

MAX_WORDS = 10**7
MAX_BRUTEFORCE = 20


def logsumexp(values: np.ndarray, threads: int = 1) -> float:
    """``log sum exp(values)`` with the deterministic compensated tree sum."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return -math.inf
    top = float(values.max())
    if top == -math.inf:
        return -math.inf
    return top + math.log(kernels.neumaier_tree_sum(np.exp(values - top), threads))


def _checked_words(sys: RandomSFT, omega: int, length: int) -> np.ndarray:
    count = sys.count_words(omega, length)
    if count > MAX_WORDS:
        raise BudgetError(f"{count} words of length {length} at fiber {omega} exceed budget {MAX_WORDS}")
    return sys.word_array(omega, length)


def _check_depth(phi: PotentialSeq, n: int, t: int):
    if t < 0:
        raise DomainError("depth t must be >= 0")
    need = phi.deficit(n)
    if t < need:
        raise DomainError(f"depth t={t} too small: f_{n} needs t >= {need}")


def partition_function(sys: RandomSFT, phi: PotentialSeq, omega: int, n: int, t: int, threads: int = 1) -> float:
    """``log pi_T(Phi)(omega, epsilon, n)`` for ``epsilon`` of depth ``t``; ``-inf`` if every term vanishes."""
    if n < 1:
        raise DomainError("horizon n must be >= 1")
    _check_depth(phi, n, t)
    words = _checked_words(sys, omega, n + t)
    return logsumexp(phi.values(n, omega, words), threads)


def _candidates(sys, phi, mp, omega, n):
    t = mp.depth
    _check_depth(phi, n, t)
    words = _checked_words(sys, omega, n + t)
    return words, phi.values(n, omega, words)


def separated_pressure_bruteforce(sys: RandomSFT, phi: PotentialSeq, mp: MetricParams, omega: int, n: int) -> float:
    """Literal supremum of ``sum_{x in F} exp f_n`` over all separated families.

    Candidates are one representative per ``(n+t)``-cylinder; every subset
    is tried, with pairwise separation decided by the Bowen metric.
    """
    words, vals = _candidates(sys, phi, mp, omega, n)
    if len(words) > MAX_BRUTEFORCE:
        raise BudgetError(f"{len(words)} cylinders exceed the subset enumeration bound {MAX_BRUTEFORCE}")
    reps = [Word(sys, omega, tuple(int(s) for s in row)) for row in words]
    conflict = np.zeros(len(reps), dtype=np.uint64)
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            if not bowen_separated(mp, reps[i], reps[j], n):
                conflict[i] |= np.uint64(1 << j)
                conflict[j] |= np.uint64(1 << i)
    if len(vals) == 0 or vals.max() == -math.inf:
        return -math.inf
    top = float(vals.max())
    best, _ = kernels.max_weight_subset(np.exp(vals - top), conflict)
    return top + math.log(best)


def greedy_separated_set(sys: RandomSFT, phi: PotentialSeq, mp: MetricParams, omega: int, n: int) -> list:
    """Max-first selection: repeatedly take the heaviest point separated from all chosen ones.

    Ties are broken lexicographically. Two representatives are separated
    iff their ``(n+t)``-prefixes differ, which lets the check run on a set
    of prefixes.
    """
    words, vals = _candidates(sys, phi, mp, omega, n)
    need = n + mp.depth
    order = np.lexsort((np.arange(len(vals)), -vals))
    chosen, seen = [], set()
    for i in order:
        key = words[i, :need].tobytes()
        if key not in seen:
            seen.add(key)
            chosen.append(Word(sys, omega, tuple(int(s) for s in words[i])))
    return chosen


@dataclass
class PressureEstimate:
    """Convergence record for ``A_n / n`` with ``A_n = sum_w P(w) log Z_n(w)``."""

    schedule: list
    log_partition: list
    depth_t: int
    values: list = field(init=False)
    upper_envelope: float = field(init=False)
    reported: float = field(init=False)

    def __post_init__(self):
        self.log_partition = [float(a) for a in self.log_partition]
        self.values = [a / n for a, n in zip(self.log_partition, self.schedule)]
        self.upper_envelope = min(self.values)
        if any(a == -math.inf for a in self.log_partition):
            self.reported = -math.inf
        else:
            self.reported = self.values[-1]

    def running_envelope(self) -> list:
        out, cur = [], math.inf
        for v in self.values:
            cur = min(cur, v)
            out.append(cur)
        return out

    def fekete_margin(self) -> float:
        """``min A_n + A_m - A_{n+m}`` over scheduled triples (``inf`` if none apply)."""
        table = dict(zip(self.schedule, self.log_partition))
        worst = math.inf
        for n in self.schedule:
            for m in self.schedule:
                if n + m in table and table[n + m] != -math.inf:
                    worst = min(worst, table[n] + table[m] - table[n + m])
        return worst

    def to_dict(self) -> dict:
        return {
            "schedule": list(self.schedule),
            "depth_t": self.depth_t,
            "log_partition": list(self.log_partition),
            "values": list(self.values),
            "upper_envelope": self.upper_envelope,
            "reported": self.reported,
        }

    def csv_rows(self) -> list:
        return [
            (n, a, v, e)
            for n, a, v, e in zip(self.schedule, self.log_partition, self.values, self.running_envelope())
        ]


def averaged_log_partition(sys, phi, n, t, threads=1) -> float:
    """``A_n``: the base-weighted average of ``log Z_n(omega)``."""
    weights = sys.base.weights
    fibers = [w for w in range(sys.m) if weights[w] > 0]
    if threads > 1 and len(fibers) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            logs = list(pool.map(lambda w: partition_function(sys, phi, w, n, t), fibers))
    else:
        logs = [partition_function(sys, phi, w, n, t, threads) for w in fibers]
    total = 0.0
    for w, lz in zip(fibers, logs):
        if lz == -math.inf:
            return -math.inf
        total += weights[w] * lz
    return float(total)


def default_depth(phi: PotentialSeq, schedule) -> int:
    return max(phi.deficit(n) for n in schedule)


def estimate_pressure(sys: RandomSFT, phi: PotentialSeq, t: int | None, schedule, threads: int = 1) -> PressureEstimate:
    """Estimate ``pi_T(Phi)`` by ``A_{n_max} / n_max`` alongside the envelope ``min_n A_n / n``."""
    schedule = [int(n) for n in schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])) or schedule[0] < 1:
        raise DomainError("schedule must be a nonempty increasing list of positive horizons")
    if t is None:
        t = default_depth(phi, schedule)
    logs = [averaged_log_partition(sys, phi, n, t, threads) for n in schedule]
    return PressureEstimate(schedule, logs, t)


def pressure_of_power(sys: RandomSFT, phi: PotentialSeq, k: int, t: int | None, schedule, threads: int = 1) -> PressureEstimate:
    """Pressure of ``Phi^k`` for ``T^k``; horizons count k-blocks."""
    return estimate_pressure(sys.power(k), phi.power(k), t, schedule, threads)
