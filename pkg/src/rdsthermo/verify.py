"""The invariant suite behind ``rdsthermo verify``."""
from __future__ import annotations

import math

import numpy as np

from .core import MetricParams
from .errors import BudgetError
from .measures import RandomMarkovMeasure, gibbs_atomic, lemma2_check
from .potentials import MatrixCocycle, check_subadditive
from .pressure import (
    MAX_BRUTEFORCE,
    estimate_pressure,
    partition_function,
    separated_pressure_bruteforce,
)
from .variational import (
    KernelFamily,
    chunking_check,
    gibbs_identity_check,
    power_consistency,
    upper_bound_sweep,
)

COCYCLE_POWER_TOL = 5e-2


def _check(name, ok, **info):
    return {"name": name, "status": "pass" if ok else "fail", **info}


def _skip(name, reason):
    return {"name": name, "status": "skipped", "reason": reason}


def oracle_equivalence(sys, phi, max_total=4, tol=1e-12):
    """Brute-force separated sums against partition functions for ``n + t <= max_total``."""
    worst, cases = 0.0, 0
    for n in range(1, max_total + 1):
        for t in range(phi.deficit(n), max_total - n + 1):
            mp = MetricParams.from_depth(t)
            for w in range(sys.m):
                if sys.count_words(w, n + t) > MAX_BRUTEFORCE:
                    continue
                brute = separated_pressure_bruteforce(sys, phi, mp, w, n)
                exact = partition_function(sys, phi, w, n, t)
                cases += 1
                if math.isinf(brute) or math.isinf(exact):
                    diff = 0.0 if brute == exact else math.inf
                else:
                    diff = abs(brute - exact)
                worst = max(worst, diff)
    return cases, worst


def random_measures(sys, count, seed):
    family = KernelFamily(sys)
    rng = np.random.default_rng(seed)
    return [family.measure(family.random_point(rng)) for _ in range(count)]


def run_suite(cfg, threads=1, tolerance=1e-9):
    sys, phi, vs = cfg.sys, cfg.phi, cfg.verify
    seed = cfg.optimizer.seed
    checks = []

    sub = check_subadditive(phi, sys, vs.n_max)
    checks.append(_check("subadditivity", sub.worst_margin >= -tolerance,
                         worst_margin=sub.worst_margin, checked=sub.checked,
                         witness=str(sub.witness) if sub.witness else None))

    cases, worst = oracle_equivalence(sys, phi, vs.oracle_max)
    checks.append(_check("oracle_equivalence", worst <= 1e-12, cases=cases, worst_abs_diff=worst))

    pe = estimate_pressure(sys, phi, cfg.depth, cfg.schedules["pressure"], threads)
    fek = pe.fekete_margin()
    finite = pe.reported != -math.inf
    env_ok = (not finite) or pe.reported <= pe.upper_envelope + tolerance
    checks.append(_check("fekete", (fek >= -tolerance) and env_ok, worst_margin=fek,
                         reported=pe.reported, upper_envelope=pe.upper_envelope))

    mono_ok, stab_ok, rows = True, True, 0
    for n in range(1, 7):
        t0 = phi.deficit(n)
        base = estimate_pressure(sys, phi, t0, [n]).log_partition[0]
        prev = base
        for t in range(t0 + 1, t0 + 3):
            cur = estimate_pressure(sys, phi, t, [n]).log_partition[0]
            rows += 1
            if base != -math.inf:
                mono_ok &= cur >= prev - tolerance
                stab_ok &= abs(cur - base) <= (t - t0) * math.log(sys.alphabet) + tolerance
            prev = cur
    checks.append(_check("epsilon_monotone_stable", mono_ok and stab_ok, cases=rows))

    if not finite:
        for name in ("gibbs_identity", "chunking", "lemma2"):
            checks.append(_skip(name, "partition function is -inf: no Gibbs normalization"))
    else:
        tests = [RandomMarkovMeasure.uniform(sys)] + random_measures(sys, 3, seed)
        worst_res, worst_gap, chunk_worst, chunk_cases = 0.0, math.inf, math.inf, 0
        for n in vs.gibbs_n:
            mp = MetricParams.from_depth(max(cfg.depth or 0, phi.deficit(n)))
            try:
                rep = gibbs_identity_check(sys, phi, mp, n, tests)
            except BudgetError:
                continue
            worst_res = max(worst_res, rep.worst_residual)
            worst_gap = min(worst_gap, rep.worst_margin)
            for q in vs.chunk_q:
                if 1 < q < n:
                    ch = chunking_check(sys, phi, mp, n, q)
                    chunk_cases += 1
                    chunk_worst = min(chunk_worst, ch.margin)
        checks.append(_check("gibbs_identity", worst_res <= tolerance and worst_gap >= -tolerance,
                             worst_residual=worst_res, worst_inequality_margin=worst_gap))
        checks.append(_check("chunking", chunk_worst >= -tolerance, cases=chunk_cases, worst_margin=chunk_worst))

        l2_worst, l2_cases = math.inf, 0
        for k in vs.lemma2_k:
            family = {}
            for n in vs.lemma2_n:
                if k < n:
                    mp = MetricParams.from_depth(max(cfg.depth or 0, phi.deficit(n)))
                    family[n] = gibbs_atomic(sys, phi, mp, n, length=max(phi.locality(n), n + mp.depth))
            rep = lemma2_check(sys, phi, family, k)
            l2_cases += len(rep.rows)
            l2_worst = min(l2_worst, rep.worst_margin)
        checks.append(_check("lemma2", l2_worst >= -tolerance, cases=l2_cases, worst_margin=l2_worst))

    k = vs.power_k
    top = max(cfg.schedules["pressure"]) // k
    if top >= 1:
        pw = power_consistency(sys, phi, k, list(range(1, top + 1)), t=None, threads=threads)
        tol = COCYCLE_POWER_TOL if isinstance(phi, MatrixCocycle) else tolerance
        checks.append(_check("power_consistency", pw.ok(tol), k=k, entropy_diff=pw.entropy_diff,
                             pressure_diff=pw.pressure_diff, pressure_tol=tol))

    sweep = upper_bound_sweep(sys, phi, pe, vs.samples, seed, cfg.optimizer.horizon)
    checks.append(_check("variational_upper_bound", sweep.violations == 0, samples=sweep.samples,
                         violations=sweep.violations, worst_excess=sweep.worst_excess,
                         allowance=sweep.allowance))
    checks.append(_check("remark_neg_inf", sweep.remark_consistent,
                         pressure_neg_inf=pe.upper_envelope == -math.inf,
                         all_objectives_neg_inf=sweep.all_neg_inf))

    ok = all(c["status"] != "fail" for c in checks)
    return {"ok": ok, "tolerance": tolerance, "checks": checks}
