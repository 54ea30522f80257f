"""Command-line front end: verification suites, reports and constants.

Every subcommand writes ``<out>/<subcommand>.json`` (records sorted by
check id and parameters, tagged with ``schema_version``) and a CSV summary
next to it.  The exit code is 0 exactly when no record has status ``fail``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import bessel, constants, propagator, resolvent, schrodinger
from .core.lattice import Box, LatticeSequence, random_sequence
from .resolvent import SpectralPoint
from .verdict import FAIL, SKIPPED, VerdictRecord

SCHEMA_VERSION = 1
JOBS_ENV = "LATTICE_DISPERSE_JOBS"
DEMOS = ("demo_rank_one_d3.json", "demo_two_point_d3.json", "demo_small_coupling_d3.json",
         "demo_sparse_rho_d3.json", "demo_four_point_d5.json")


@dataclass
class RunConfig:
    """Everything a run depends on; fixed seed gives identical reports."""
    seed: int = 0
    dims: list[int] = field(default_factory=lambda: [1, 2, 3])
    tol: float = resolvent.DEFAULT_TOL
    out: str = "reports"
    jobs: int = 1
    samples: int = 5
    t_grid: list[float] = field(default_factory=lambda: [2.0 ** k for k in range(8)])
    q_grid: list[float] = field(default_factory=lambda: [2.0, 3.0, 4.0])
    gamma_grid: list[float] = field(default_factory=lambda: [0.0, 0.5])
    kappa_grid: list[float] = field(default_factory=lambda: [0.0, 0.25, 0.5])
    a: float = 1.0
    lam_step: float = 0.05
    holder_gamma: float = 0.4
    potential: list | None = None
    p: float = 1.0
    dim: int | None = None
    box_radius: int | None = None
    T_list: list[float] = field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0])


class ConfigError(ValueError):
    pass


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        # bare names resolve against the shipped demo configs
        shipped = resources.files("lattice_disperse") / "data" / path
        if not shipped.is_file():
            raise ConfigError(f"config file {path} not found")
        text = shipped.read_text()
    else:
        text = p.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if isinstance(data, list):
        data = {"potential": data}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return data


def make_config(args: argparse.Namespace) -> RunConfig:
    """Config file first, flags on top, then the jobs environment fallback."""
    data = load_config(getattr(args, "config", None))
    known = RunConfig.__dataclass_fields__
    cfg = RunConfig(**{k: v for k, v in data.items() if k in known})
    for name in ("seed", "tol", "out", "jobs"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "dims", None):
        cfg.dims = [int(x) for x in args.dims.split(",")]
    if getattr(args, "jobs", None) is None and "jobs" not in data and os.environ.get(JOBS_ENV):
        try:
            cfg.jobs = int(os.environ[JOBS_ENV])
        except ValueError:
            raise ConfigError(f"{JOBS_ENV} must be an integer") from None
    if cfg.jobs < 1:
        raise ConfigError("jobs must be >= 1")
    return cfg


def config_potential(cfg: RunConfig) -> schrodinger.Potential:
    if cfg.potential is None:
        raise ConfigError("this subcommand needs a potential (use --config)")
    return schrodinger.load_potential({"potential": cfg.potential, "dim": cfg.dim, "p": cfg.p})


def demo_potentials(dims) -> list[tuple[str, schrodinger.Potential, int]]:
    out = []
    for name in DEMOS:
        data = json.loads((resources.files("lattice_disperse") / "data" / name).read_text())
        if data["dim"] in dims:
            out.append((name, schrodinger.load_potential(data), data["box_radius"]))
    return out


# ---------------------------------------------------------------------------
# tasks: module-level functions returning lists of records, so they can be
# shipped to worker processes

def _skipped(check_id: str, params: dict, provenance: str, reason: str) -> VerdictRecord:
    return VerdictRecord(check_id, params, math.nan, math.nan, SKIPPED, provenance,
                         {"note": reason})


def task_bessel_accuracy():
    return [bessel.verify_accuracy(range(-50, 51), np.linspace(0.0, 100.0, 10_000))]


def task_bessel_bounds():
    return [bessel.verify_pointwise_bounds(range(-50, 51), np.linspace(0.0, 200.0, 4001))]


def task_weighted_lp(p, gamma, n_max):
    if not p > 2 + 2 * gamma:
        return [_skipped("bessel.weighted_lp", {"p": p, "gamma": gamma}, "bessel-weighted-lp",
                         "needs p > 2 + 2 gamma")]
    # |J_{-n}| = |J_n|, so n >= 0 covers |n| <= n_max
    return [bessel.verify_weighted_lp(p, gamma, n) for n in range(n_max + 1)]


def task_unitarity(d, ts):
    return [propagator.verify_unitarity(d, t) for t in ts]


def task_dispersive(pairs, q, kappa, a, ts):
    recs = []
    for u, v in pairs:
        for t in ts:
            recs.append(propagator.verify_dispersive(u, v, q, kappa, a, t))
    return recs


def task_time_integral(d, gamma, ns):
    return [propagator.verify_time_integral(n, d, gamma) for n in ns]


def task_resolvent_bounds(pairs, q, lam_pairs, gamma, tol):
    recs = []
    for u, v in pairs:
        for l1, l2 in lam_pairs:
            try:
                recs += resolvent.verify_resolvent_bounds(u, v, q, SpectralPoint.plus_i0(l1),
                                                          SpectralPoint.plus_i0(l2), gamma, tol)
            except constants.ConstantDomainError as exc:
                recs.append(_skipped("resolvent.operator_bound", {"d": u.dim, "q": q},
                                     "resolvent-operator-bound", str(exc)))
                return recs
    return recs


def task_r02_holder(d, gamma, lam_pairs, tol):
    ms = [np.zeros(d, int), np.eye(d, dtype=int)[0], np.arange(d) % 3]
    if not d > 2 + 2 * gamma:
        return [_skipped("resolvent.r02_holder", {"d": d, "gamma": gamma}, "resolvent-r02-holder",
                         "needs d > 2 + 2 gamma")]
    return [resolvent.verify_r02_holder(m, SpectralPoint.plus_i0(a), SpectralPoint.plus_i0(b),
                                        gamma, tol)
            for m in ms for a, b in lam_pairs]


def task_r01(d, radius, tol):
    box = Box(radius, d)
    return [resolvent.verify_r01_contraction(SpectralPoint.plus_i0(-1.0),
                                             SpectralPoint.plus_i0(-0.9), box, tol)]


def task_scan(name, V, step, tol):
    grid = schrodinger.default_grid(V, step)
    scan = schrodinger.bs_scan(V, grid, tol=tol)
    recs = []
    for det in scan.detections:
        recs.append(VerdictRecord("schrodinger.bs_detection",
                                  {"potential": name, "lam": det.lam},
                                  det.residual, schrodinger.DETECTION_TOL,
                                  "pass" if det.certificate["certified"] else FAIL,
                                  "bs-correspondence", det.to_dict()))
    worst = min((x["distance_to_one"] for x in scan.interior), default=math.inf)
    recs.append(VerdictRecord("schrodinger.embedded_scan",
                              {"potential": name, "points": len(scan.interior)},
                              worst, schrodinger.DETECTION_TOL, "descriptive", "embedded-scan",
                              {"count_outside_band": scan.count,
                               "interior_candidates": [x for x in scan.interior if x["candidate"]]}))
    return recs


def task_spectrum(name, V, radius):
    box = Box(radius, V.dim)
    recs = [schrodinger.verify_bs_correspondence(V, box),
            schrodinger.verify_multiplicity(V, box)]
    if V.dim >= 5:
        recs.append(schrodinger.verify_finiteness_conditions(V, box=box))
    for r in recs:
        r.parameters["potential"] = name
    return recs


def task_rank_one(g, d, radius):
    return schrodinger.verify_rank_one(g, d, Box(radius, d))


def task_small_coupling(name, V, radius):
    r = schrodinger.verify_small_coupling(V, Box(radius, V.dim))
    r.parameters["potential"] = name
    return [r]


def task_identity(name, V, radius, zs):
    recs = []
    for lam, mu in zs:
        r = schrodinger.verify_resolvent_identity(V, SpectralPoint(lam, mu), Box(radius, V.dim))
        r.parameters["potential"] = name
        recs.append(r)
    return recs


def task_waveop(name, V, T_list, radius):
    f = LatticeSequence.delta((0,) * V.dim)
    support = max(f.support_radius(), V.values.support_radius())
    radius = max(radius or 0, schrodinger.causality_radius(max(T_list), support))
    r = schrodinger.wave_operator_probe(V, f, T_list, Box(radius, V.dim))
    r.parameters["potential"] = name
    return [r]


# ---------------------------------------------------------------------------
# subcommand plans

def _pairs(rng, d, count, radius, real=False):
    return [(random_sequence(rng, d, radius, complex_values=not real),
             random_sequence(rng, d, radius, complex_values=not real)) for _ in range(count)]


def plan_bessel(cfg: RunConfig):
    tasks = [(task_bessel_accuracy, ()), (task_bessel_bounds, ())]
    for p in (3.0, 4.0, 6.0):
        for g in cfg.gamma_grid:
            tasks.append((task_weighted_lp, (p, g, 30)))
    return tasks


def plan_dispersive(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed)
    tasks = []
    for d in sorted(cfg.dims):
        if d <= 3:
            tasks.append((task_unitarity, (d, cfg.t_grid)))
        for q in cfg.q_grid:
            tasks.append((task_dispersive, (_pairs(rng, d, cfg.samples, 3), q, 0.0, cfg.a,
                                            cfg.t_grid)))
        if d == 1:
            for kappa in cfg.kappa_grid:
                if kappa:
                    tasks.append((task_dispersive, (_pairs(rng, 1, cfg.samples, 6), 4.0, kappa,
                                                    cfg.a, cfg.t_grid)))
        if d >= 3:
            ns = [np.zeros(d, int), np.eye(d, dtype=int)[0], np.arange(d) % 3]
            tasks.append((task_time_integral, (d, 0.0, ns)))
            tasks.append((task_time_integral, (d, cfg.holder_gamma, ns)))
    return tasks


def plan_resolvent(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed + 1)
    tasks = []
    for d in sorted(cfg.dims):
        if d < 3:
            continue
        # pairs straddling the thresholds +-1, +-(d-2), +-d
        thresholds = range(-d, d + 1, 2)
        lam_pairs = [(t - 0.02, t + 0.02) for t in thresholds]
        gamma = min(cfg.holder_gamma, 0.5 * (d - 2) - 1e-3)
        tasks.append((task_resolvent_bounds, (_pairs(rng, d, cfg.samples, 1), 2.0, lam_pairs,
                                              gamma, cfg.tol)))
        tasks.append((task_r02_holder, (d, gamma, lam_pairs, cfg.tol)))
        if d == 3:
            tasks.append((task_r01, (d, 4, cfg.tol)))
    return tasks


def plan_scan(cfg: RunConfig, potentials):
    return [(task_scan, (name, V, cfg.lam_step, cfg.tol)) for name, V, _ in potentials]


def plan_spectrum(cfg: RunConfig, potentials):
    return [(task_spectrum, (name, V, r)) for name, V, r in potentials]


def plan_waveop(cfg: RunConfig, potentials):
    return [(task_waveop, (name, V, cfg.T_list, r)) for name, V, r in potentials]


IDENTITY_Z = [(-4.0, 0.5), (0.0, 2.0), (1.0, 0.5), (-2.5, 0.5), (3.5, 0.5),
              (-1.0, 1.0), (2.0, 1.0), (0.5, 0.5), (-3.0, 0.75), (4.5, 0.5)]


def plan_suite(cfg: RunConfig):
    tasks = plan_bessel(cfg) + plan_dispersive(cfg) + plan_resolvent(cfg)
    demos = demo_potentials(cfg.dims)
    tasks += plan_scan(cfg, demos)
    by_name = {n: (V, r) for n, V, r in demos}
    if 3 in cfg.dims:
        tasks.append((task_rank_one, (5.0, 3, 20)))
        tasks.append((task_rank_one, (1.0, 3, 12)))
        for name in ("demo_two_point_d3.json", "demo_rank_one_d3.json"):
            V, _ = by_name[name]
            tasks.append((task_spectrum, (name, V, 12)))
        V, r = by_name["demo_small_coupling_d3.json"]
        tasks.append((task_small_coupling, ("demo_small_coupling_d3.json", V, r)))
        tasks.append((task_waveop, ("demo_small_coupling_d3.json", V, cfg.T_list, None)))
        for name in ("demo_rank_one_d3.json", "demo_two_point_d3.json",
                     "demo_small_coupling_d3.json"):
            V, _ = by_name[name]
            tasks.append((task_identity, (name, V, 12, IDENTITY_Z)))
    return tasks


# ---------------------------------------------------------------------------
# execution and reports

def _call(task):
    fn, args = task
    return fn(*args)


def run_tasks(tasks, jobs: int = 1) -> list[VerdictRecord]:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_call, tasks))
    else:
        results = [_call(t) for t in tasks]
    return [r for batch in results for r in batch]


def _finite(obj):
    """JSON-safe copy: infinities become strings."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def sort_records(records: list[VerdictRecord]) -> list[dict]:
    rows = [_finite(r.to_dict()) for r in records]
    return sorted(rows, key=lambda r: (r["check_id"], json.dumps(r["parameters"], sort_keys=True)))


def write_report(command: str, cfg: RunConfig, records: list[VerdictRecord]) -> tuple[Path, Path]:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = sort_records(records)
    config = {k: v for k, v in asdict(cfg).items() if k not in ("out", "jobs")}
    report = {"schema_version": SCHEMA_VERSION, "command": command,
              "config": _finite(config), "records": rows}
    jpath = out / f"{command}.json"
    jpath.write_text(json.dumps(report, indent=1, sort_keys=True, allow_nan=False) + "\n")
    cpath = out / f"{command}.csv"
    with cpath.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check_id", "status", "lhs", "rhs", "margin", "provenance", "parameters"])
        for r in rows:
            w.writerow([r["check_id"], r["status"], r["lhs"], r["rhs"], r["margin"],
                        r["provenance"], json.dumps(r["parameters"], sort_keys=True)])
    return jpath, cpath


def summarize(records: list[VerdictRecord]) -> dict:
    counts: dict[str, int] = {}
    for r in records:
        counts[r.status] = counts.get(r.status, 0) + 1
    return dict(sorted(counts.items()))


def _finish(command: str, cfg: RunConfig, records: list[VerdictRecord]) -> int:
    jpath, cpath = write_report(command, cfg, records)
    counts = summarize(records)
    print(f"{command}: " + ", ".join(f"{k}={v}" for k, v in counts.items()))
    for r in records:
        if r.status == FAIL:
            print(f"  FAIL {r.check_id} lhs={r.lhs:.6g} rhs={r.rhs:.6g} {r.parameters}")
    print(f"report: {jpath}\nsummary: {cpath}")
    return 1 if counts.get(FAIL) else 0


def cmd_constants(args) -> int:
    if args.name not in constants.REGISTRY:
        print(f"unknown constant {args.name!r}; choose from {sorted(constants.REGISTRY)}",
              file=sys.stderr)
        return 2
    fn, names = constants.REGISTRY[args.name]
    if len(args.params) != len(names):
        print(f"{args.name} takes parameters {', '.join(names)}", file=sys.stderr)
        return 2
    try:
        vals = [float(x) for x in args.params]
    except ValueError as exc:
        print(f"bad parameter: {exc}", file=sys.stderr)
        return 2
    vals = [int(v) if n in ("d", "n") and v.is_integer() else v for n, v in zip(names, vals)]
    try:
        value = fn(*vals)
    except constants.ConstantDomainError as exc:
        print(f"inadmissible parameters: {exc}", file=sys.stderr)
        return 2
    print(format(float(value), ".17g"))
    return 0


def _potentials_for(cfg: RunConfig, args) -> list[tuple[str, schrodinger.Potential, int]]:
    if cfg.potential is not None:
        V = config_potential(cfg)
        radius = cfg.box_radius or max(8, 2 * V.values.support_radius() + 8)
        return [(Path(args.config).name, V, radius)]
    return demo_potentials(cfg.dims)


def run(command: str, cfg: RunConfig, args=None) -> int:
    if command == "bessel-verify":
        tasks = plan_bessel(cfg)
    elif command == "dispersive-verify":
        tasks = plan_dispersive(cfg)
    elif command == "resolvent-verify":
        tasks = plan_resolvent(cfg)
    elif command == "bs-scan":
        tasks = plan_scan(cfg, _potentials_for(cfg, args))
    elif command == "spectrum":
        tasks = plan_spectrum(cfg, _potentials_for(cfg, args))
    elif command == "waveop":
        tasks = plan_waveop(cfg, _potentials_for(cfg, args))
    elif command == "suite":
        tasks = plan_suite(cfg)
    else:
        raise ConfigError(f"unknown subcommand {command}")
    records = run_tasks(tasks, cfg.jobs)
    if command == "bs-scan":
        for r in records:
            if r.check_id == "schrodinger.bs_detection":
                print(f"detection {r.parameters['potential']}: lam = {r.details['lam']:.15g} "
                      f"(multiplicity {r.details['multiplicity']}, |nu - 1| = {r.lhs:.2e})")
    return _finish(command, cfg, records)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lattice-disperse",
                                     description="Dispersive and spectral checks for H = Delta + V on Z^d.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--dims", help="comma-separated dimensions, e.g. 1,2,3")
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float, help="resolvent quadrature tolerance")
        p.add_argument("--out", help="report directory (default: reports)")
        p.add_argument("--config", help="JSON config; bare names also resolve to shipped demos")
        p.add_argument("--jobs", type=int, help=f"worker processes (fallback: ${JOBS_ENV})")

    for name, text in (("bessel-verify", "Bessel accuracy and bound suites"),
                       ("dispersive-verify", "propagator unitarity and dispersive estimates"),
                       ("resolvent-verify", "weighted resolvent bounds"),
                       ("bs-scan", "Birman-Schwinger scan of a potential"),
                       ("spectrum", "boxed spectrum against the Birman-Schwinger scan"),
                       ("waveop", "wave-operator probe"),
                       ("suite", "everything")):
        common(sub.add_parser(name, help=text))
    c = sub.add_parser("constants", help="print a named constant")
    c.add_argument("name")
    c.add_argument("params", nargs="*")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "constants":
        return cmd_constants(args)
    try:
        cfg = make_config(args)
        return run(args.command, cfg, args)
    except (ConfigError, constants.ConstantDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
