"""Experiment configuration: JSON schema, parsing, and canonical serialization."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .core import BaseSystem, MetricParams, RandomSFT
from .errors import DomainError
from .measures import RandomMarkovMeasure
from .potentials import Additive, Constant, MatrixCocycle, PotentialSeq, Zero, table_from_exp
from .variational import VariationalOptions

SCHEMA_PATH = Path(__file__).with_name("schema.json")
SCHEMA = json.loads(SCHEMA_PATH.read_text())


class ConfigError(ValueError):
    """Schema or consistency violation; ``where`` names the offending field."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass
class VerifySettings:
    n_max: int = 6
    oracle_max: int = 4
    gibbs_n: list = field(default_factory=lambda: [1, 2, 3, 4, 5, 6, 7, 8])
    chunk_q: list = field(default_factory=lambda: [2, 3])
    lemma2_n: list = field(default_factory=lambda: [4, 5, 6, 7, 8, 9, 10])
    lemma2_k: list = field(default_factory=lambda: [1, 2, 3])
    samples: int = 1000
    power_k: int = 2


@dataclass
class ExperimentConfig:
    raw: dict
    sys: RandomSFT
    phi: PotentialSeq
    metric: MetricParams | None
    depth: int | None
    schedules: dict
    optimizer: VariationalOptions
    measure: RandomMarkovMeasure | None
    power_k: int
    verify: VerifySettings
    output_dir: str
    formats: list

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.raw).encode()).hexdigest()


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _system(spec) -> RandomSFT:
    perm = spec["perm"]
    if "weights" in spec:
        base = BaseSystem(perm, spec["weights"])
    else:
        base = BaseSystem.uniform_on_cycles(perm)
    a = spec["alphabet"]
    trans = spec.get("transitions")
    if trans is None:
        trans = np.ones((len(perm), a, a), dtype=np.uint8)
    return RandomSFT(base, a, np.array(trans))


def _potential(spec, sys) -> PotentialSeq:
    kind = spec["kind"]
    if kind == "zero":
        return Zero(sys)
    if kind == "constant":
        return Constant(sys, float(spec["c"]))
    if kind == "additive":
        table = spec["table"] if "table" in spec else table_from_exp(spec["exp_table"])
        return Additive(sys, spec.get("depth", 1), np.array(table, dtype=np.float64))
    return MatrixCocycle(sys, np.array(spec["matrices"], dtype=np.float64), spec.get("norm", "inf"))


def _build(raw: dict) -> ExperimentConfig:
    where = "system"
    try:
        sys = _system(raw["system"])
        where = "potential"
        phi = _potential(raw["potential"], sys)
        where = "metric"
        metric, depth = None, None
        if "metric" in raw:
            m = raw["metric"]
            lam = m.get("lambda", 0.5)
            metric = MetricParams(m["epsilon"], lam) if "epsilon" in m else MetricParams.from_depth(m.get("depth", 0), lam)
            depth = metric.depth
        where = "measure"
        measure = None
        if "measure" in raw:
            ms = raw["measure"]
            if "initial" in ms:
                measure = RandomMarkovMeasure(sys, ms["initial"], ms["kernels"])
            else:
                measure = RandomMarkovMeasure.from_kernels(sys, ms["kernels"])
    except (DomainError, ArithmeticError) as exc:
        raise ConfigError(where, str(exc)) from None
    sched = raw.get("schedules", {})
    schedules = {
        "pressure": sched.get("pressure", list(range(1, 13))),
        "phistar": sched.get("phistar", list(range(1, 13))),
        "entropy": sched.get("entropy", list(range(1, 11))),
    }
    for name, s in schedules.items():
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ConfigError(f"schedules.{name}", "horizons must be strictly increasing")
    opt = raw.get("optimizer", {})
    optimizer = VariationalOptions(
        starts=opt.get("starts", 16),
        max_evals=opt.get("max_evals", 2000),
        tol=opt.get("tol", 1e-8),
        seed=opt.get("seed", 0),
        horizon=opt.get("horizon", 12),
        pressure_schedule=schedules["pressure"],
        depth=depth,
    )
    verify = VerifySettings(**raw.get("verify", {}))
    out = raw.get("output", {})
    return ExperimentConfig(
        raw=raw,
        sys=sys,
        phi=phi,
        metric=metric,
        depth=depth,
        schedules=schedules,
        optimizer=optimizer,
        measure=measure,
        power_k=raw.get("power", {}).get("k", 2),
        verify=verify,
        output_dir=out.get("dir", "out"),
        formats=out.get("formats", ["json", "csv"]),
    )


def _check_dims(raw):
    s = raw["system"]
    m, a = len(s["perm"]), s["alphabet"]
    if "weights" in s and len(s["weights"]) != m:
        raise ConfigError("system.weights", f"expected {m} entries")
    if "transitions" in s:
        shape = np.shape(s["transitions"])
        if shape != (m, a, a):
            raise ConfigError("system.transitions", f"expected shape {(m, a, a)}, got {shape}")
    p = raw["potential"]
    if p["kind"] == "additive":
        key = "table" if "table" in p else "exp_table"
        want = (m,) + (a,) * p.get("depth", 1)
        if np.shape(p[key]) != want:
            raise ConfigError(f"potential.{key}", f"expected shape {want}, got {np.shape(p[key])}")
    if p["kind"] == "cocycle":
        shape = np.shape(p["matrices"])
        if len(shape) != 4 or shape[:2] != (m, a) or shape[2] != shape[3]:
            raise ConfigError("potential.matrices", f"expected shape ({m}, {a}, q, q), got {shape}")


def parse(raw: dict) -> ExperimentConfig:
    """Validate ``raw`` against the schema and build the model objects."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(where, err.message)
    _check_dims(raw)
    return _build(raw)


def load(path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    return parse(raw)


def serialize(cfg: ExperimentConfig) -> dict:
    """Canonical config: every default made explicit."""
    sys, phi = cfg.sys, cfg.phi
    system = {
        "perm": list(sys.base.perm),
        "weights": sys.base.weights.tolist(),
        "alphabet": sys.alphabet,
        "transitions": sys.transitions.astype(int).tolist(),
    }
    if isinstance(phi, Zero):
        potential = {"kind": "zero"}
    elif isinstance(phi, Constant):
        potential = {"kind": "constant", "c": phi.c}
    elif isinstance(phi, Additive):
        potential = {"kind": "additive", "depth": phi.depth, "table": phi.table.tolist()}
    else:
        potential = {"kind": "cocycle", "matrices": phi.matrices.tolist(), "norm": phi.norm}
    out = {
        "system": system,
        "potential": potential,
        "schedules": dict(cfg.schedules),
        "optimizer": {
            "starts": cfg.optimizer.starts,
            "max_evals": cfg.optimizer.max_evals,
            "tol": cfg.optimizer.tol,
            "seed": cfg.optimizer.seed,
            "horizon": cfg.optimizer.horizon,
        },
        "power": {"k": cfg.power_k},
        "verify": dict(vars(cfg.verify)),
        "output": {"dir": cfg.output_dir, "formats": list(cfg.formats)},
    }
    if cfg.metric is not None:
        out["metric"] = {"lambda": cfg.metric.lam, "epsilon": cfg.metric.epsilon}
    if cfg.measure is not None:
        out["measure"] = {"initial": cfg.measure.initial.tolist(), "kernels": cfg.measure.kernel.tolist()}
    return out


def jsonable(obj):
    """Recursively convert numpy scalars and non-finite floats (as strings) for strict JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj
