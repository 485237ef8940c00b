"""Benchmark harness: experiment configs, trace CSVs and the ``bench`` command.

Config files are YAML documents; see ``configs/`` and the README for the
grammar. ``bench run CONFIG`` writes one ``<algorithm>.csv`` trace per
algorithm plus ``manifest.json`` into the output directory.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from . import __version__
from .cg import run_acg, run_cg
from .core import SolveTrace, StoppingCriterion, TraceRecord
from .driver import CGProbe, KnownOptimum, SocgsConfig, run_socgs
from .linesearch import LineSearchConfig
from .objectives import (
    load_sparse_samples,
    logistic_data,
    logistic_objective,
    random_quadratic,
    sparse_coding_data,
    sparse_coding_objective,
)
from .regions import make_region

OUT_ENV = "SOCGS_BENCH_OUT"

CSV_COLUMNS = (
    "iter",
    "f",
    "fw_gap",
    "primal_gap",
    "dist_opt",
    "lmo_calls",
    "fo_calls",
    "hessian_calls",
    "elapsed_s",
    "step_kind",
)

PROBLEMS = {
    "quadratic": {"region": "simplex", "n": 10, "cond": 100.0, "seed": 0},
    "sparse_coding": {"region": "birkhoff", "n": 8, "m": 500, "seed": 0},
    "logistic": {"region": "l1_ball", "n": 50, "m": 200, "tau": 1.0, "seed": 0},
}
ALGORITHM_KINDS = ("cg", "acg", "socgs")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class SolverError(RuntimeError):
    def __init__(self, algorithm: str, cause: BaseException):
        super().__init__(f"algorithm {algorithm!r} failed: {type(cause).__name__}: {cause}")
        self.algorithm = algorithm


# -- trace CSV ---------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trace_to_csv(trace: SolveTrace, include_elapsed: bool = True) -> str:
    buf = io.StringIO()
    columns = CSV_COLUMNS if include_elapsed else tuple(c for c in CSV_COLUMNS if c != "elapsed_s")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in trace.records:
        writer.writerow([_fmt(getattr(r, c)) for c in columns])
    return buf.getvalue()


def emit_csv(trace: SolveTrace, path) -> Path:
    """Write ``trace`` as CSV; floats use shortest round-trip ``repr``."""
    path = Path(path)
    try:
        path.write_text(trace_to_csv(trace))
    except OSError as exc:
        raise OSError(f"cannot write trace {path}: {exc.strerror or exc}") from exc
    return path


def _opt_float(s: str) -> Optional[float]:
    return None if s == "" else float(s)


def read_csv(path, algorithm: Optional[str] = None) -> SolveTrace:
    """Parse a trace written by `emit_csv`."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        records = []
        for row in reader:
            records.append(
                TraceRecord(
                    iter=int(row["iter"]),
                    f=float(row["f"]),
                    fw_gap=float(row["fw_gap"]),
                    primal_gap=_opt_float(row["primal_gap"]),
                    dist_opt=_opt_float(row["dist_opt"]),
                    lmo_calls=int(row["lmo_calls"]),
                    fo_calls=int(row["fo_calls"]),
                    hessian_calls=int(row["hessian_calls"]),
                    elapsed_s=float(row["elapsed_s"]),
                    step_kind=row["step_kind"],
                )
            )
    return SolveTrace(algorithm=algorithm or path.stem, records=tuple(records))


def strip_elapsed(csv_text: str) -> str:
    """Drop the ``elapsed_s`` column; the remainder is seed-deterministic."""
    rows = list(csv.reader(io.StringIO(csv_text)))
    j = rows[0].index("elapsed_s")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row[:j] + row[j + 1:])
    return buf.getvalue()


# -- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    kind: str
    oracle: str = "exact"
    omega: float = 0.0
    oracle_seed: int = 0
    lower_bound: str = "cg_probe"
    n_probe: int = 5
    inner_cap: int = 1000


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    params: dict
    region: str
    algorithms: tuple[AlgorithmSpec, ...]
    stop: StoppingCriterion
    reference_tolerance: float = 1e-12
    reference_max_iterations: int = 100000
    output: Optional[str] = None
    source: dict = field(default_factory=dict, compare=False)

    @property
    def seed(self):
        return self.params.get("seed")


def _get(d: dict, key: str, where: str, kind, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"{where}.{key}" if where else key, "missing required field")
        return default
    val = d[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if kind is float and isinstance(val, str):
        try:
            val = float(val)
        except ValueError:
            pass
    if val is not None and not isinstance(val, kind):
        raise ConfigError(f"{where}.{key}" if where else key, f"expected {getattr(kind, '__name__', kind)}, got {val!r}")
    return val


def _check_keys(d: dict, allowed, where: str):
    for key in d:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}" if where else str(key), "unknown field")


def parse_config(doc: Any) -> ExperimentConfig:
    """Validate a parsed YAML document into an `ExperimentConfig`."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a mapping")
    _check_keys(doc, {"problem", "region", "algorithms", "stop", "reference", "output"}, "")

    prob = doc.get("problem")
    if not isinstance(prob, dict):
        raise ConfigError("problem", "missing or not a mapping")
    name = _get(prob, "name", "problem", str, required=True)
    if name not in PROBLEMS:
        raise ConfigError("problem.name", f"unknown problem {name!r} (known: {', '.join(PROBLEMS)})")
    _check_keys(prob, {"name", "n", "m", "lam", "tau", "cond", "seed", "data"}, "problem")
    defaults = PROBLEMS[name]
    params: dict[str, Any] = {}
    params["n"] = _get(prob, "n", "problem", int, defaults["n"])
    if params["n"] is None or params["n"] < 1:
        raise ConfigError("problem.n", "must be a positive integer")
    data = _get(prob, "data", "problem", str)
    if data is not None and name != "logistic":
        raise ConfigError("problem.data", "only the logistic problem reads a data file")
    if data is not None:
        params["data"] = data
    seed = _get(prob, "seed", "problem", int, defaults["seed"])
    if seed is None and data is None:
        raise ConfigError("problem.seed", "synthetic data needs a seed")
    params["seed"] = seed
    if name == "quadratic":
        params["cond"] = _get(prob, "cond", "problem", float, defaults["cond"])
        if not params["cond"] >= 1:
            raise ConfigError("problem.cond", "condition number must be >= 1")
    if name in ("sparse_coding", "logistic"):
        params["m"] = _get(prob, "m", "problem", int, defaults["m"])
        if params["m"] is None or params["m"] < 1:
            raise ConfigError("problem.m", "must be a positive integer")
    if name == "logistic":
        lam = _get(prob, "lam", "problem", float, None)
        params["lam"] = lam
        if lam is not None and not lam > 0:
            raise ConfigError("problem.lam", "must be > 0")
        params["tau"] = _get(prob, "tau", "problem", float, defaults["tau"])
        if not params["tau"] > 0:
            raise ConfigError("problem.tau", "must be > 0")
    for key in ("lam", "tau", "cond", "m"):
        if key in prob and key not in params:
            raise ConfigError(f"problem.{key}", f"not a parameter of {name!r}")

    region = _get(doc, "region", "", str, defaults["region"])
    if region not in ("simplex", "l1_ball", "birkhoff"):
        raise ConfigError("region", f"unknown region {region!r}")
    if name == "sparse_coding" and region != "birkhoff":
        raise ConfigError("region", "sparse_coding is defined over the birkhoff region")

    algs_doc = doc.get("algorithms", ["acg", "socgs"])
    if not isinstance(algs_doc, list) or not algs_doc:
        raise ConfigError("algorithms", "must be a non-empty list")
    algs = []
    for i, a in enumerate(algs_doc):
        where = f"algorithms[{i}]"
        if isinstance(a, str):
            a = {"kind": a}
        if not isinstance(a, dict):
            raise ConfigError(where, "must be a name or a mapping")
        _check_keys(a, {"name", "kind", "oracle", "omega", "oracle_seed", "lower_bound", "n_probe", "inner_cap"}, where)
        kind = _get(a, "kind", where, str, required=True)
        if kind not in ALGORITHM_KINDS:
            raise ConfigError(f"{where}.kind", f"unknown algorithm {kind!r}")
        spec = AlgorithmSpec(
            name=_get(a, "name", where, str, kind),
            kind=kind,
            oracle=_get(a, "oracle", where, str, "exact"),
            omega=_get(a, "omega", where, float, 0.0),
            oracle_seed=_get(a, "oracle_seed", where, int, seed if seed is not None else 0),
            lower_bound=_get(a, "lower_bound", where, str, "cg_probe"),
            n_probe=_get(a, "n_probe", where, int, 5),
            inner_cap=_get(a, "inner_cap", where, int, 1000),
        )
        if spec.oracle not in ("exact", "perturbed", "identity"):
            raise ConfigError(f"{where}.oracle", f"unknown Hessian oracle {spec.oracle!r}")
        if not spec.omega >= 0:
            raise ConfigError(f"{where}.omega", "must be >= 0")
        if spec.lower_bound not in ("cg_probe", "known_optimum"):
            raise ConfigError(f"{where}.lower_bound", f"unknown estimator {spec.lower_bound!r}")
        if spec.n_probe < 1:
            raise ConfigError(f"{where}.n_probe", "must be >= 1")
        if spec.inner_cap < 1:
            raise ConfigError(f"{where}.inner_cap", "must be >= 1")
        if not spec.name or "/" in spec.name or spec.name.startswith("."):
            raise ConfigError(f"{where}.name", f"unusable as a file name: {spec.name!r}")
        algs.append(spec)
    names = [a.name for a in algs]
    if len(set(names)) != len(names):
        raise ConfigError("algorithms", "algorithm names must be unique")
    if "manifest" in names:
        raise ConfigError("algorithms", "'manifest' is reserved")

    stop_doc = doc.get("stop", {}) or {}
    if not isinstance(stop_doc, dict):
        raise ConfigError("stop", "must be a mapping")
    _check_keys(stop_doc, {"max_iterations", "fw_gap_tolerance", "wall_time"}, "stop")
    stop_args = dict(
        max_outer_iterations=_get(stop_doc, "max_iterations", "stop", int, 10000),
        fw_gap_tolerance=_get(stop_doc, "fw_gap_tolerance", "stop", float, 1e-7),
        wall_time_budget=_get(stop_doc, "wall_time", "stop", float, None),
    )
    try:
        stop = StoppingCriterion(**stop_args)
    except ValueError as exc:
        raise ConfigError("stop", str(exc)) from None

    ref_doc = doc.get("reference", {}) or {}
    if not isinstance(ref_doc, dict):
        raise ConfigError("reference", "must be a mapping")
    _check_keys(ref_doc, {"fw_gap_tolerance", "max_iterations"}, "reference")
    ref_tol = _get(ref_doc, "fw_gap_tolerance", "reference", float, 1e-12)
    ref_iters = _get(ref_doc, "max_iterations", "reference", int, 100000)

    return ExperimentConfig(
        problem=name,
        params=params,
        region=region,
        algorithms=tuple(algs),
        stop=stop,
        reference_tolerance=ref_tol,
        reference_max_iterations=ref_iters,
        output=_get(doc, "output", "", str, None),
        source=doc,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else "<yaml>"
        raise ConfigError(where, f"invalid YAML: {getattr(exc, 'problem', exc)}") from None
    return parse_config(doc)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Normalized config; `parse_config` of the result reproduces ``cfg``."""
    return {
        "problem": {"name": cfg.problem, **{k: v for k, v in cfg.params.items() if v is not None}},
        "region": cfg.region,
        "algorithms": [asdict(a) for a in cfg.algorithms],
        "stop": {
            "max_iterations": cfg.stop.max_outer_iterations,
            "fw_gap_tolerance": cfg.stop.fw_gap_tolerance,
            "wall_time": cfg.stop.wall_time_budget,
        },
        "reference": {
            "fw_gap_tolerance": cfg.reference_tolerance,
            "max_iterations": cfg.reference_max_iterations,
        },
        **({"output": cfg.output} if cfg.output is not None else {}),
    }


# -- problems and runs ---------------------------------------------------------


def build_problem(cfg: ExperimentConfig):
    """Instantiate ``(objective, region)`` from the config's seeded generator."""
    p = cfg.params
    n = p["n"]
    if cfg.problem == "quadratic":
        region = make_region(cfg.region, n)
        rng = np.random.default_rng((p["seed"], 1))
        # Minimizer near the region's barycenter: optimum on a high-dimensional face.
        center = region_barycenter(region) + 0.1 * rng.standard_normal(region.dim)
        return random_quadratic(region.dim, p["cond"], seed=p["seed"], center=center), region
    if cfg.problem == "sparse_coding":
        Z, Y, _ = sparse_coding_data(n, p["m"], seed=p["seed"])
        return sparse_coding_objective(Z, Y), make_region("birkhoff", n)
    if "data" in p:
        Z, y = load_sparse_samples(p["data"], n_features=n)
    else:
        Z, y = logistic_data(n, p["m"], seed=p["seed"])
    lam = p["lam"] if p.get("lam") is not None else 1.0 / Z.shape[0]
    return logistic_objective(Z, y, lam), make_region(cfg.region, n, p.get("tau", 1.0))


def region_barycenter(region) -> np.ndarray:
    if region.kind == "simplex":
        return np.full(region.dim, 1.0 / region.dim)
    if region.kind == "birkhoff":
        return np.full(region.dim, 1.0 / region.n)
    return np.zeros(region.dim)


REFERENCE_LINE_SEARCH = LineSearchConfig(tolerance=1e-15, max_evaluations=200)


def reference_solution(objective, region, tolerance=1e-12, max_iterations=100000):
    """High-accuracy away-step CG solve used as ``f*`` and ``x*``."""
    tr = run_acg(
        objective,
        region,
        region.lowest_vertex(),
        StoppingCriterion(max_iterations, tolerance),
        ls_cfg=REFERENCE_LINE_SEARCH,
    )
    return tr


def run_algorithm(spec: AlgorithmSpec, objective, region, stop: StoppingCriterion, audit=False) -> SolveTrace:
    x0 = region.lmo(objective.gradient(region.lowest_vertex().dense))
    if spec.kind == "acg":
        return run_acg(objective, region, x0, stop, audit=audit)
    if spec.kind == "cg":
        return run_cg(objective, region, x0, stop, audit=audit)
    lb = KnownOptimum(objective.f_opt) if spec.lower_bound == "known_optimum" else CGProbe(spec.n_probe)
    cfg = SocgsConfig(
        oracle=spec.oracle,
        omega=spec.omega,
        oracle_seed=spec.oracle_seed,
        lower_bound=lb,
        inner_cap=spec.inner_cap,
        stop=stop,
        audit=audit,
    )
    return run_socgs(objective, region, cfg, algorithm=spec.name)


def _relabel(trace: SolveTrace, name: str) -> SolveTrace:
    return SolveTrace(name, trace.records, trace.x, trace.active_set, trace.info)


def run_experiment(cfg: ExperimentConfig, out_dir, audit: bool = False) -> dict:
    """Run every configured algorithm; write traces and ``manifest.json``.

    Returns the manifest. Raises `SolverError` naming the algorithm that failed.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    objective, region = build_problem(cfg)

    t0 = time.perf_counter()
    ref = reference_solution(objective, region, cfg.reference_tolerance, cfg.reference_max_iterations)
    objective = objective.with_optimum(ref.final.f, ref.x)
    timing = {"reference": time.perf_counter() - t0}

    results = {}
    for spec in cfg.algorithms:
        try:
            trace = _relabel(run_algorithm(spec, objective, region, cfg.stop, audit=audit), spec.name)
        except Exception as exc:  # noqa: BLE001 - surfaced as exit code 3
            raise SolverError(spec.name, exc) from exc
        path = emit_csv(trace, out / f"{spec.name}.csv")
        last = trace.final
        results[spec.name] = {
            "trace": path.name,
            "kind": spec.kind,
            "iterations": last.iter,
            "final_f": last.f,
            "final_fw_gap": last.fw_gap,
            "final_primal_gap": last.primal_gap,
            "lmo_calls": last.lmo_calls,
            "fo_calls": last.fo_calls,
            "hessian_calls": last.hessian_calls,
            "converged": last.fw_gap <= cfg.stop.fw_gap_tolerance,
        }
        timing[spec.name] = last.elapsed_s

    manifest = {
        "library_version": __version__,
        "config": config_to_dict(cfg),
        "seed": cfg.seed,
        "problem": {
            "dim": objective.dim,
            "mu": objective.mu,
            "L": objective.L,
            "L2": objective.L2,
            "region": repr(region),
            "diameter": region.diameter,
        },
        "reference": {
            "f_opt": ref.final.f,
            "fw_gap": ref.final.fw_gap,
            "iterations": ref.final.iter,
            "method": "away-step CG, golden-section tolerance "
            f"{REFERENCE_LINE_SEARCH.tolerance:g} (exact step for quadratics), "
            f"target FW gap {cfg.reference_tolerance:g}",
            "x_opt": [float(v) for v in ref.x],
        },
        "results": results,
        "timing": {
            "note": "wall-clock seconds on this machine; informative only",
            "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "platform": platform.platform(),
            "seconds": timing,
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def output_dir(cli_out: Optional[str], cfg: ExperimentConfig) -> Path:
    return Path(cli_out or os.environ.get(OUT_ENV) or cfg.output or "bench_out")


# -- command line ----------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bench", description="SOCGS benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and the config)")
    p_run.add_argument("--audit", action="store_true", help="assert invariants after every step")
    sub.add_parser("list-problems", help="list problems and their defaults")
    sub.add_parser("version", help="print the library version")
    args = parser.parse_args(argv)

    if args.command == "version":
        print(__version__)
        return 0
    if args.command == "list-problems":
        for name, defaults in PROBLEMS.items():
            opts = " ".join(f"{k}={v}" for k, v in defaults.items())
            print(f"{name}\t{opts}")
        return 0

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"bench: config error in {args.config}: {exc}", file=sys.stderr)
        return 2
    out = output_dir(args.out, cfg)
    try:
        manifest = run_experiment(cfg, out, audit=args.audit)
    except SolverError as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        # data-file problems surface while building the objective
        print(f"bench: config error: {exc}", file=sys.stderr)
        return 2
    for name, res in manifest["results"].items():
        print(f"{name}\titers={res['iterations']}\tf={res['final_f']!r}\tfw_gap={res['final_fw_gap']:.3e}")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
