"""Command line entry point: ``rdsthermo <command> --config PATH``.

Exit codes: 0 success, 1 invariant violation (``verify``), 2 bad
configuration or arguments, 3 enumeration budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, jsonable, load
from .errors import BudgetError
from .measures import RandomMarkovMeasure, entropy_partition_limit, fiber_entropy, phi_star
from .pressure import estimate_pressure, pressure_of_power
from .variational import maximize, power_consistency
from .verify import run_suite

log = logging.getLogger("rdsthermo")

COMMANDS = ("pressure", "entropy", "phistar", "varprinciple", "verify", "power")


def _header(cfg, seed):
    return {"tool": "rdsthermo", "version": __version__, "config_sha256": cfg.digest(), "seed": seed}


class Writer:
    def __init__(self, out_dir, formats, header):
        self.dir = Path(out_dir)
        self.formats = formats
        self.header = header
        self.dir.mkdir(parents=True, exist_ok=True)

    def json(self, name, payload):
        if "json" not in self.formats:
            return
        doc = jsonable({"header": self.header, **payload})
        path = self.dir / f"{name}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        log.info("wrote %s", path)

    def csv(self, name, columns, rows):
        if "csv" not in self.formats:
            return
        path = self.dir / f"{name}.csv"
        with path.open("w", newline="") as fh:
            for key in ("tool", "version", "config_sha256", "seed"):
                fh.write(f"# {key}={self.header[key]}\n")
            w = csv.writer(fh)
            w.writerow(columns)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, float) else v for v in jsonable(list(row))])
        log.info("wrote %s", path)


def _measure(cfg):
    return cfg.measure if cfg.measure is not None else RandomMarkovMeasure.uniform(cfg.sys)


def cmd_pressure(cfg, args, out):
    pe = estimate_pressure(cfg.sys, cfg.phi, cfg.depth, cfg.schedules["pressure"], args.threads)
    out.json("pressure", {"command": "pressure", "result": pe.to_dict()})
    out.csv("pressure", ["n", "A_n", "A_n_over_n", "envelope"], pe.csv_rows())
    return 0


def cmd_entropy(cfg, args, out):
    mu = _measure(cfg)
    closed = fiber_entropy(mu)
    values = [entropy_partition_limit(mu, n) for n in cfg.schedules["entropy"]]
    rows, env = [], float("inf")
    for n, v in zip(cfg.schedules["entropy"], values):
        env = min(env, v)
        rows.append((n, v, env, 0.0))
    out.json("entropy", {"command": "entropy", "result": {
        "fiber_entropy": closed, "schedule": cfg.schedules["entropy"], "values": values}})
    out.csv("entropy", ["n", "value", "envelope", "stderr"], rows)
    return 0


def cmd_phistar(cfg, args, out):
    res = phi_star(_measure(cfg), cfg.phi, cfg.schedules["phistar"], seed=args.seed)
    out.json("phistar", {"command": "phistar", "result": res.to_dict()})
    out.csv("phistar", ["n", "value", "envelope", "stderr"], res.csv_rows())
    return 0


def cmd_varprinciple(cfg, args, out):
    opts = cfg.optimizer
    opts.seed, opts.threads = args.seed, args.threads
    rep = maximize(cfg.sys, cfg.phi, opts)
    out.json("varprinciple", {"command": "varprinciple", "result": rep.to_dict()})
    out.csv("trace", ["iteration", "objective", "simplex_diameter"],
            [(i, -v, d) for i, v, d in rep.trace])
    return 0


def cmd_power(cfg, args, out):
    k = cfg.power_k
    sched = [n for n in range(1, max(cfg.schedules["pressure"]) // k + 1)] or [1]
    pe = pressure_of_power(cfg.sys, cfg.phi, k, None, sched, args.threads)
    rep = power_consistency(cfg.sys, cfg.phi, k, sched, _measure(cfg), threads=args.threads)
    out.json("power", {"command": "power", "result": {
        "k": k, "pressure": pe.to_dict(), "entropy_power": rep.entropy_power,
        "entropy_scaled": rep.entropy_scaled, "pressure_power": rep.pressure_power,
        "pressure_scaled": rep.pressure_scaled}})
    out.csv("power", ["n", "A_n", "A_n_over_n", "envelope"], pe.csv_rows())
    return 0


def cmd_verify(cfg, args, out):
    cfg.optimizer.seed = args.seed
    res = run_suite(cfg, threads=args.threads, tolerance=args.tolerance)
    out.json("verify", {"command": "verify", "result": res})
    for c in res["checks"]:
        log.info("%-26s %s", c["name"], c["status"])
    return 0 if res["ok"] else 1


HANDLERS = {
    "pressure": cmd_pressure,
    "entropy": cmd_entropy,
    "phistar": cmd_phistar,
    "varprinciple": cmd_varprinciple,
    "verify": cmd_verify,
    "power": cmd_power,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="rdsthermo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides output.dir)")
        p.add_argument("--seed", type=int, metavar="U64", help="RNG seed (overrides optimizer.seed)")
        p.add_argument("--threads", type=int, default=1, metavar="N")
        p.add_argument("--format", choices=["json", "csv", "both"], default=None)
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "verify":
            p.add_argument("--tolerance", type=float, default=1e-9, metavar="FLOAT")
    return parser


def run(command, config_path, argv=()):
    """Programmatic form of the CLI; returns the exit status."""
    return main([command, "--config", str(config_path), *argv])


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = load(args.config)
    except ConfigError as exc:
        print(f"config error at {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    if args.seed is None:
        args.seed = cfg.optimizer.seed
    if not 0 <= args.seed < 2**64:
        print("--seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    if args.threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return 2
    formats = cfg.formats if args.format is None else (["json", "csv"] if args.format == "both" else [args.format])
    out = Writer(args.out or cfg.output_dir, formats, _header(cfg, args.seed))
    try:
        return HANDLERS[args.command](cfg, args, out)
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
