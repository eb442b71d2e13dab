"""Numerical checks of the variational principle and of the identities behind it.

``objective(mu) = h_mu(T) + Phi*(mu)`` is maximized over invariant random
Markov measures and compared with the pressure estimate.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import MetricParams, RandomSFT
from .errors import BudgetError
from .measures import (
    MAX_WORDS,
    RandomMarkovMeasure,
    cesaro_average,
    fiber_entropy,
    gibbs_atomic,
    integrate,
    lift_measure,
    phi_star,
    shannon,
)
from .optimize import nelder_mead
from .potentials import PotentialSeq
from .pressure import PressureEstimate, estimate_pressure, partition_function, pressure_of_power

DEFAULT_HORIZON = 12


def objective(mu: RandomMarkovMeasure, phi: PotentialSeq, schedule=(DEFAULT_HORIZON,), **phi_star_opts) -> float:
    """``h_mu(T) + Phi*(mu)`` with ``Phi*`` read at the last horizon; ``-inf`` dominates."""
    ps = phi_star(mu, phi, schedule, **phi_star_opts).reported
    if ps == -math.inf:
        return -math.inf
    return fiber_entropy(mu) + ps


class KernelFamily:
    """Softmax coordinates on the support of each live kernel row.

    The first allowed entry of each row carries logit 0; the others are
    free. Initials come from cycle stationarity, so every point of the
    family is an invariant measure.
    """

    def __init__(self, sys: RandomSFT):
        self.sys = sys
        self.rows = []
        for w in range(sys.m):
            for i in np.flatnonzero(sys.symbols[w]):
                allowed = np.flatnonzero(sys.transitions[w, i])
                self.rows.append((w, int(i), allowed))
        self.dim = sum(len(al) - 1 for _, _, al in self.rows)

    def kernel(self, x) -> np.ndarray:
        P = np.zeros(self.sys.transitions.shape)
        pos = 0
        for w, i, allowed in self.rows:
            z = np.zeros(len(allowed))
            z[1:] = x[pos : pos + len(allowed) - 1]
            pos += len(allowed) - 1
            e = np.exp(z - z.max())
            P[w, i, allowed] = e / e.sum()
        return P

    def measure(self, x) -> RandomMarkovMeasure:
        return RandomMarkovMeasure.from_kernels(self.sys, self.kernel(x))

    def random_point(self, rng, scale=2.0) -> np.ndarray:
        return rng.normal(0.0, scale, self.dim)


class _CachedObjective:
    """``objective`` at a single horizon with the potential values precomputed."""

    def __init__(self, sys, phi, horizon):
        self.sys, self.phi, self.horizon = sys, phi, horizon
        L = max(phi.locality(horizon), 1)
        if sum(sys.count_words(w, L) for w in range(sys.m)) > MAX_WORDS:
            raise BudgetError("objective horizon exceeds the exact enumeration budget")
        self.cache = [
            (w, sys.base.weights[w], sys.word_array(w, L))
            for w in range(sys.m)
            if sys.base.weights[w] > 0
        ]
        self.cache = [(w, p, words, phi.values(horizon, w, words)) for w, p, words in self.cache]

    def __call__(self, mu: RandomMarkovMeasure) -> float:
        total = 0.0
        for w, p, words, vals in self.cache:
            part = integrate(mu.masses(w, words), vals)
            if part == -math.inf:
                return -math.inf
            total += p * part
        return fiber_entropy(mu) + total / self.horizon


@dataclass
class VariationalOptions:
    starts: int = 16
    max_evals: int = 2000
    tol: float = 1e-8
    seed: int = 0
    horizon: int = DEFAULT_HORIZON
    pressure_schedule: list | None = None
    depth: int | None = None
    threads: int = 1


@dataclass
class VariationalReport:
    best_measure: RandomMarkovMeasure
    objective: float
    pressure: PressureEstimate
    gap: float
    allowance: float
    regime: str
    trace: list = field(default_factory=list)
    starts: list = field(default_factory=list)  # (start, objective, evals, converged)

    @property
    def upper_ok(self) -> bool:
        """No measure beats the pressure beyond numerical slack."""
        if self.regime != "finite":
            return True
        return self.gap >= -(1e-6 + self.allowance)

    def to_dict(self):
        return {
            "objective": self.objective,
            "pressure": self.pressure.to_dict(),
            "gap": self.gap,
            "allowance": self.allowance,
            "regime": self.regime,
            "best_kernel": self.best_measure.kernel.tolist(),
            "best_initial": self.best_measure.initial.tolist(),
            "starts": [list(s) for s in self.starts],
        }


def truncation_allowance(phi: PotentialSeq, horizon: int) -> float:
    """Boundary-term budget ``2 ||f_1|| / n`` for an objective read at horizon ``n``."""
    return 2.0 * phi.f1_norm() / horizon


def _regime(obj, pressure):
    if obj == -math.inf and pressure == -math.inf:
        return "neg_inf"
    if obj == -math.inf:
        return "discrepancy"
    return "finite"


def maximize(sys: RandomSFT, phi: PotentialSeq, opts: VariationalOptions | None = None) -> VariationalReport:
    """Multi-start Nelder-Mead over the Markov family, reported against the pressure."""
    opts = opts or VariationalOptions()
    schedule = opts.pressure_schedule or list(range(1, opts.horizon + 1))
    pressure = estimate_pressure(sys, phi, opts.depth, schedule, opts.threads)
    family = KernelFamily(sys)
    evaluate = _CachedObjective(sys, phi, opts.horizon)

    def loss(x):
        v = evaluate(family.measure(x))
        return math.inf if v == -math.inf else -v

    def run(start):
        rng = np.random.default_rng([opts.seed, start])
        x0 = np.zeros(family.dim) if start == 0 else family.random_point(rng)
        res = nelder_mead(loss, x0, max_evals=opts.max_evals, tol=opts.tol)
        mu = family.measure(res.x)
        return start, -res.fun, mu, res

    if opts.threads > 1:
        with ThreadPoolExecutor(max_workers=opts.threads) as pool:
            results = list(pool.map(run, range(opts.starts)))
    else:
        results = [run(s) for s in range(opts.starts)]

    def key(r):
        # larger objective first, then lexicographically smallest kernel
        return (-r[1], tuple(r[2].kernel.ravel()))

    best = min(results, key=key)
    obj = best[1]
    regime = _regime(obj, pressure.reported)
    gap = pressure.reported - obj if regime == "finite" else math.nan
    return VariationalReport(
        best_measure=best[2],
        objective=obj,
        pressure=pressure,
        gap=gap,
        allowance=truncation_allowance(phi, opts.horizon),
        regime=regime,
        trace=best[3].trace,
        starts=[(s, o, r.evals, r.converged) for s, o, _, r in results],
    )


@dataclass
class SweepReport:
    samples: int
    violations: int
    worst_excess: float
    all_neg_inf: bool
    pressure_envelope: float
    allowance: float

    @property
    def remark_consistent(self) -> bool:
        return (self.pressure_envelope == -math.inf) == self.all_neg_inf

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.remark_consistent


def upper_bound_sweep(sys, phi, pressure: PressureEstimate, samples=1000, seed=0, horizon=DEFAULT_HORIZON) -> SweepReport:
    """Random invariant Markov measures never beat the pressure envelope (beyond slack)."""
    family = KernelFamily(sys)
    evaluate = _CachedObjective(sys, phi, horizon)
    allowance = truncation_allowance(phi, horizon)
    bound = pressure.upper_envelope + 1e-6 + allowance
    rng = np.random.default_rng(seed)
    violations, worst, all_neg = 0, -math.inf, True
    for _ in range(samples):
        obj = evaluate(family.measure(family.random_point(rng)))
        if obj != -math.inf:
            all_neg = False
            excess = obj - pressure.upper_envelope
            worst = max(worst, excess)
            if obj > bound:
                violations += 1
    return SweepReport(samples, violations, worst, all_neg, pressure.upper_envelope, allowance)


@dataclass
class GibbsIdentityReport:
    n: int
    identity_residuals: list  # per fiber
    inequality_margins: list  # per (test measure, fiber): log Z - (H + int f)

    @property
    def worst_residual(self):
        return max((abs(r) for r in self.identity_residuals), default=0.0)

    @property
    def worst_margin(self):
        return min(self.inequality_margins, default=math.inf)

    @property
    def ok(self):
        return self.worst_residual <= 1e-9 and self.worst_margin >= -1e-9


def gibbs_identity_check(sys: RandomSFT, phi: PotentialSeq, mp: MetricParams, n: int, test_measures=()) -> GibbsIdentityReport:
    """Check ``H(nu_w) + int f_n d nu_w = log sum_G exp f_n`` and the Gibbs inequality for test measures.

    Entropies are over the partition into ``(n+t)``-cylinders, each of
    which holds at most one atom of the separated set.
    """
    t = mp.depth
    nu = gibbs_atomic(sys, phi, mp, n, length=n + t)
    residuals, margins = [], []
    logz = [partition_function(sys, phi, w, n, t) for w in range(sys.m)]
    for w in range(sys.m):
        weights = nu.weights[w]
        vals = phi.values(n, w, nu.words[w])
        lhs = shannon(weights) + integrate(weights, vals)
        residuals.append(lhs - logz[w])
    for mu in test_measures:
        for w in range(sys.m):
            words = sys.word_array(w, n + t)
            masses = mu.masses(w, words)
            lhs = shannon(masses) + integrate(masses, phi.values(n, w, words))
            margins.append(logz[w] - lhs)
    return GibbsIdentityReport(n, residuals, margins)


@dataclass
class ChunkingReport:
    n: int
    q: int
    lhs: float
    rhs: float

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def ok(self):
        return self.margin >= -1e-9


def chunking_check(sys: RandomSFT, phi: PotentialSeq, mp: MetricParams, n: int, q: int, nu=None) -> ChunkingReport:
    """``q H_nu(n-join) <= n H_{mu_n}(q-join) + 2 q^2 log a`` with ``mu_n`` the Cesaro average of ``nu``."""
    if not 1 < q < n:
        raise ValueError(f"need 1 < q < n, got q={q}, n={n}")
    if nu is None:
        nu = gibbs_atomic(sys, phi, mp, n, length=max(n + mp.depth, n + q - 1))
    mu_n = cesaro_average(nu, n)
    lhs = q * nu.conditional_entropy(n)
    rhs = n * mu_n.conditional_entropy(q) + 2 * q * q * math.log(sys.alphabet)
    return ChunkingReport(n, q, lhs, rhs)


@dataclass
class PowerReport:
    k: int
    entropy_power: float
    entropy_scaled: float
    pressure_power: float
    pressure_scaled: float

    @property
    def entropy_diff(self):
        return abs(self.entropy_power - self.entropy_scaled)

    @property
    def pressure_diff(self):
        if self.pressure_power == self.pressure_scaled == -math.inf:
            return 0.0
        return abs(self.pressure_power - self.pressure_scaled)

    def ok(self, pressure_tol=1e-9):
        return self.entropy_diff <= 1e-9 and self.pressure_diff <= pressure_tol


def power_consistency(sys: RandomSFT, phi: PotentialSeq, k: int, schedule, mu=None, t=None, threads=1) -> PowerReport:
    """Entropy and pressure of ``T^k`` against ``k`` times those of ``T``, at matched horizons.

    ``schedule`` counts k-blocks; the reference run uses ``k n`` symbols.
    """
    mu = mu or RandomMarkovMeasure.uniform(sys)
    lifted = lift_measure(mu, k)
    p_k = pressure_of_power(sys, phi, k, t, schedule, threads)
    p_1 = estimate_pressure(sys, phi, None if t is None else k * t, [k * n for n in schedule], threads)
    scaled = k * p_1.reported
    return PowerReport(k, fiber_entropy(lifted), k * fiber_entropy(mu), p_k.reported, scaled)
