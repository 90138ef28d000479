"""Experiment runner CLI.

Subcommands:

* ``iel run <config.json>``        -- execute the tasks of one experiment and
  write ``report.json``, ``curves.csv`` and ``summary.txt`` to the output dir.
* ``iel distinguish <A> <B>``      -- compare two toral matrices by their
  entropy invariants (never claims isomorphism).
* ``iel exact --matrix <A>``       -- closed-form invariants of one matrix.
* ``iel bench``                    -- compare the compiled and numpy kernel
  backends on a reference workload.

Exit codes: 0 success, 1 config error, 2 estimator failure.  The environment
variable ``IEL_SEED`` overrides the config seed; the ``--seed`` flag overrides
both.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, backend, exact
from .estimators import (
    CurveCell,
    EntropyReport,
    EstimatorConfig,
    EstimatorError,
    FatBakerReport,
    InvariantReport,
    check_entropy_identity,
    estimate_fat_baker_inverse_entropy,
    estimate_folding_entropy,
    estimate_forward_entropy,
    estimate_inverse_entropy,
    estimate_lyapunov_spectrum,
    estimate_pointwise_dimension,
)
from .numerics import NumericsError
from .systems import FatBaker, System, SystemError_, ToralLinear, Tsujii, make_system

TASKS = ("exact", "forward", "inverse", "folding", "lyapunov", "identity",
         "dimension", "rigidity_pair")
ISO_TOL = 1e-9


class ConfigError(ValueError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    system: dict
    measure: str
    estimator: EstimatorConfig
    tasks: tuple[str, ...]
    output_dir: str

    def echo(self) -> dict:
        return {
            "experiment": self.experiment,
            "system": self.system,
            "measure": self.measure,
            "estimator": dataclasses.asdict(self.estimator) | {
                "radii": list(self.estimator.radii),
                "depths": list(self.estimator.depths),
            },
            "tasks": list(self.tasks),
            "output_dir": self.output_dir,
        }


def _field_line(text: str, name: str) -> str:
    token = f'"{name.split(".")[-1]}"'
    for i, line in enumerate(text.splitlines(), start=1):
        if token in line:
            return f" (near line {i})"
    return ""


def parse_experiment(data: dict, source_text: str = "") -> ExperimentConfig:
    def fail(field: str, message: str):
        raise ConfigError(f"field '{field}': {message}{_field_line(source_text, field)}", field)

    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("system", "tasks"):
        if key not in data:
            fail(key, "missing required field")
    sysd = data["system"]
    if not isinstance(sysd, dict) or "kind" not in sysd:
        fail("system.kind", "system must be an object with a 'kind'")
    try:
        system = build_system(sysd)
    except (SystemError_, NumericsError, KeyError, TypeError) as exc:
        fail("system", str(exc))
    measure = data.get("measure", system.default_measure())
    try:
        system.check_measure(measure)
    except SystemError_ as exc:
        fail("measure", str(exc))
    est = data.get("estimator", {})
    if not isinstance(est, dict):
        fail("estimator", "must be an object")
    known = {f.name for f in dataclasses.fields(EstimatorConfig)}
    unknown = set(est) - known
    if unknown:
        fail(f"estimator.{sorted(unknown)[0]}", "unknown estimator field")
    try:
        cfg = EstimatorConfig(**est)
    except (EstimatorError, TypeError, ValueError) as exc:
        field = str(exc).split()[0].rstrip(":")
        name = field if field in known else "estimator"
        fail(f"estimator.{name}" if field in known else "estimator", str(exc))
    tasks = data["tasks"]
    if not isinstance(tasks, list) or not tasks:
        fail("tasks", "must be a nonempty list")
    for t in tasks:
        if t not in TASKS:
            fail("tasks", f"unknown task {t!r}; valid: {', '.join(TASKS)}")
        err = _task_applicability(t, system, measure)
        if err:
            fail("tasks", f"task {t!r}: {err}")
    return ExperimentConfig(
        experiment=str(data.get("experiment", "experiment")),
        system=sysd,
        measure=measure,
        estimator=cfg,
        tasks=tuple(tasks),
        output_dir=str(data.get("output_dir", "iel-out")),
    )


def build_system(sysd: dict) -> System:
    params = {k: v for k, v in sysd.items() if k not in ("kind", "metric")}
    return make_system(sysd["kind"], metric=sysd.get("metric"), **params)


def _task_applicability(task: str, system: System, measure: str) -> str | None:
    kind = system.kind
    if task == "exact" and kind not in ("toral", "circle", "tsujii"):
        return "closed forms exist only for toral, circle and tsujii systems"
    if task == "folding" or task == "identity":
        if kind in ("fat-baker", "tsujii"):
            return "reference measure has no closed-form Jacobian"
    if task == "lyapunov" and kind == "shift":
        return "not a smooth system"
    if task == "dimension" and kind != "fat-baker":
        return "pointwise dimension applies to fat-baker systems"
    if task == "rigidity_pair":
        if kind == "toral":
            if system.dim != 2:
                return "rigidity pair needs a 2x2 toral matrix"
        elif kind != "tsujii":
            return "rigidity pair applies to 2x2 toral or tsujii systems"
    return None


# -- serialization ----------------------------------------------------------


def _val(value, provenance: str) -> dict:
    return {"value": value, "provenance": provenance}


def _slope_dict(est) -> dict:
    return {
        "slope": est.slope,
        "intercept": est.intercept,
        "stderr": est.stderr,
        "num_points": est.num_points,
        "residual_rms": est.residual_rms,
    }


def _entropy_report_dict(rep: EntropyReport) -> dict:
    return {
        "extrapolated": _val(rep.extrapolated, rep.provenance),
        "stderr": _val(rep.stderr, rep.provenance),
        "anchors_used": rep.anchors_used,
        "balls_skipped": rep.balls_skipped,
        "notes": rep.notes,
        "per_radius": {f"{eps:.9g}": _slope_dict(s) for eps, s in rep.per_radius.items()},
        "provenance": rep.provenance,
    }


def _curve_rows(task: str, rep: EntropyReport, min_hits: int) -> list[dict]:
    rows = []
    for cell in rep.curve:
        slope = rep.per_radius.get(cell.eps)
        rows.append({
            "task": task,
            "eps": cell.eps,
            "n": cell.n,
            "hits": cell.hits,
            "trials": cell.trials,
            "neg_log_phat": (-math.log(cell.hits / cell.trials)
                             if cell.hits >= min_hits else None),
            "slope": slope.slope if slope else None,
            "stderr": slope.stderr if slope else None,
        })
    return rows


# -- task execution ---------------------------------------------------------


def _run_exact(system: System) -> dict:
    if isinstance(system, ToralLinear) or system.kind == "circle":
        matrix = system.matrix.entries if isinstance(system, ToralLinear) else [[system.degree]]
        pair = exact.toral_invariants(matrix)
        return {
            "forward_entropy": _val(pair.forward_entropy, "exact"),
            "inverse_entropy": _val(pair.inverse_entropy, "exact"),
            "folding_entropy": _val(pair.folding_entropy, "exact"),
            "lyapunov": _val(list(pair.lyapunov), "exact"),
        }
    if isinstance(system, Tsujii):
        ex = exact.tsujii_invariants(system.ell, system.lam)
        return {
            "forward_entropy": _val(ex.forward_entropy, "exact"),
            "folding_entropy": _val(ex.folding_entropy, "exact"),
            "inverse_entropy_absolutely_continuous": _val(ex.inverse_exact_ac, "exact"),
            "inverse_entropy_bounds": _val(list(ex.inverse_bounds), "exact"),
        }
    raise EstimatorError(f"no exact evaluator for {system.kind}")


def _run_task(task: str, system: System, measure: str, cfg: EstimatorConfig,
              threads: int) -> tuple[dict, list[dict]]:
    """Returns (task entry for report.json, curve rows)."""
    if task == "exact":
        return {"values": _run_exact(system)}, []
    if task == "forward":
        rep = estimate_forward_entropy(system, measure, cfg, threads)
        return ({"values": {"forward_entropy": _val(rep.extrapolated, "estimated")},
                 "detail": _entropy_report_dict(rep)},
                _curve_rows("forward", rep, cfg.min_hits))
    if task == "inverse":
        if isinstance(system, FatBaker):
            fb = estimate_fat_baker_inverse_entropy(system.beta, cfg, threads)
            entry = {
                "values": {
                    "inverse_entropy": _val(fb.direct.extrapolated, "estimated"),
                    "inverse_entropy_from_dimension": _val(fb.entropy_from_dimension, "estimated"),
                    "overlap_number": _val(fb.overlap_number, "estimated"),
                },
                "detail": _entropy_report_dict(fb.direct) | {
                    "dimension": fb.dimension.delta,
                    "dimension_stderr": fb.dimension.stderr,
                    "agreement_sigma": fb.agreement_sigma,
                    "fat_baker_notes": fb.notes,
                },
            }
            return entry, _curve_rows("inverse", fb.direct, cfg.min_hits)
        rep = estimate_inverse_entropy(system, measure, cfg, threads)
        return ({"values": {"inverse_entropy": _val(rep.extrapolated, "estimated")},
                 "detail": _entropy_report_dict(rep)},
                _curve_rows("inverse", rep, cfg.min_hits))
    if task == "folding":
        rep = estimate_folding_entropy(system, measure, cfg)
        return ({"values": {"folding_entropy": _val(rep.extrapolated, "estimated")},
                 "detail": _entropy_report_dict(rep)}, [])
    if task == "lyapunov":
        exps = estimate_lyapunov_spectrum(system, cfg)
        return {"values": {"lyapunov": _val(exps, "estimated")}}, []
    if task == "identity":
        rep = check_entropy_identity(system, measure, cfg, threads)
        entry = {
            "values": {
                "forward_entropy": _val(rep.forward.extrapolated, "estimated"),
                "inverse_entropy": _val(rep.inverse.extrapolated, "estimated"),
                "folding_entropy": _val(rep.folding.extrapolated, "estimated"),
                "residual": _val(rep.residual, "estimated"),
            },
            "passed": rep.passed,
            "tolerance": rep.tolerance,
            "combined_stderr": rep.combined_stderr,
            "detail": {
                "forward": _entropy_report_dict(rep.forward),
                "inverse": _entropy_report_dict(rep.inverse),
                "folding": _entropy_report_dict(rep.folding),
                "lyapunov": list(rep.lyapunov) if rep.lyapunov is not None else None,
            },
        }
        rows = _curve_rows("identity:forward", rep.forward, cfg.min_hits)
        rows += _curve_rows("identity:inverse", rep.inverse, cfg.min_hits)
        return entry, rows
    if task == "dimension":
        rep = estimate_pointwise_dimension(system.beta, cfg)
        return ({"values": {"pointwise_dimension": _val(rep.delta, "estimated")},
                 "detail": {"stderr": rep.stderr, "centers_used": rep.centers_used,
                            "truncated": rep.truncated, "notes": rep.notes}}, [])
    if task == "rigidity_pair":
        pair = exact.rigidity_pair(system)
        values = {"forward_entropy": _val(pair.forward_entropy, "exact")}
        if pair.inverse_entropy is not None:
            values["inverse_entropy"] = _val(pair.inverse_entropy, "exact")
        if pair.inverse_bounds is not None:
            values["inverse_entropy_bounds"] = _val(list(pair.inverse_bounds), "exact")
        return {"values": values}, []
    raise ConfigError(f"unknown task {task!r}", "tasks")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def write_curves(rows: list[dict], path: Path) -> None:
    cols = ("task", "eps", "n", "hits", "trials", "neg_log_phat", "slope", "stderr")
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in cols))
    path.write_text("\n".join(lines) + "\n")


def _summary_lines(report: dict) -> list[str]:
    lines = [f"experiment: {report['config']['experiment']}",
             f"seed: {report['seed']}  backend: {report['backend']}"]
    for name, entry in report["tasks"].items():
        if entry["status"] != "ok":
            lines.append(f"{name}: FAILED ({entry.get('error', '')})")
            continue
        for key, val in entry.get("values", {}).items():
            v = val["value"]
            shown = f"{v:.6f}" if isinstance(v, float) else str(v)
            lines.append(f"{name}: {key} = {shown} [{val['provenance']}]")
        if "passed" in entry:
            lines.append(f"{name}: identity check {'PASS' if entry['passed'] else 'FAIL'}")
    return lines


def run_experiment(config: ExperimentConfig, threads: int = 1,
                   out_dir: str | None = None) -> tuple[dict, int]:
    """Execute all tasks; returns (report dict, exit code)."""
    system = build_system(config.system)
    report: dict = {
        "tool": {"name": "iel", "version": __version__},
        "backend": backend.backend_name(),
        "seed": config.estimator.seed,
        "config": config.echo(),
        "tasks": {},
    }
    curve_rows: list[dict] = []
    failed = False
    for task in config.tasks:
        start = time.perf_counter()
        try:
            entry, rows = _run_task(task, system, config.measure, config.estimator, threads)
            entry["status"] = "ok"
            curve_rows.extend(rows)
        except EstimatorError as exc:
            entry = {"status": "failed", "error": str(exc)}
            failed = True
        entry["wall_clock_s"] = time.perf_counter() - start
        report["tasks"][task] = entry
    out = Path(out_dir or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    write_curves(curve_rows, out / "curves.csv")
    (out / "summary.txt").write_text("\n".join(_summary_lines(report)) + "\n")
    return report, (2 if failed else 0)


def _load_matrix(path: str):
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data.get("matrix", data)
    return np.asarray(data, dtype=float)


def distinguish(matrix_a, matrix_b) -> dict:
    """Compare entropy invariants; reports a difference or says it cannot tell."""
    pa = exact.toral_invariants(matrix_a)
    pb = exact.toral_invariants(matrix_b)
    if abs(pa.inverse_entropy - pb.inverse_entropy) > ISO_TOL:
        verdict = "not isomorphic (inverse entropy differs)"
    elif abs(pa.forward_entropy - pb.forward_entropy) > ISO_TOL:
        verdict = "not isomorphic (forward entropy differs)"
    else:
        verdict = "indistinguishable by these invariants"
    return {
        "verdict": verdict,
        "a": {"forward_entropy": pa.forward_entropy, "inverse_entropy": pa.inverse_entropy},
        "b": {"forward_entropy": pb.forward_entropy, "inverse_entropy": pb.inverse_entropy},
        "forward_difference": abs(pa.forward_entropy - pb.forward_entropy),
        "inverse_difference": abs(pa.inverse_entropy - pb.inverse_entropy),
    }


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iel", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--threads", type=int, default=1, help="Monte-Carlo worker count")
    parser.add_argument("--out", type=str, default=None, help="override the output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config", type=str)
    p_dis = sub.add_parser("distinguish", help="compare two toral matrices")
    p_dis.add_argument("matrix_a", type=str)
    p_dis.add_argument("matrix_b", type=str)
    p_exact = sub.add_parser("exact", help="closed-form invariants of a matrix")
    p_exact.add_argument("--matrix", type=str, required=True)
    p_bench = sub.add_parser("bench", help="compare kernel backends")
    p_bench.add_argument("--samples", type=int, default=200_000)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            path = Path(args.config)
            try:
                text = path.read_text()
            except OSError as exc:
                print(f"config error: {exc}", file=sys.stderr)
                return 1
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                print(f"config error at line {exc.lineno} column {exc.colno}: {exc.msg}",
                      file=sys.stderr)
                return 1
            try:
                config = parse_experiment(data, text)
            except ConfigError as exc:
                print(f"config error: {exc}", file=sys.stderr)
                return 1
            seed = args.seed
            if seed is None and os.environ.get("IEL_SEED"):
                seed = int(os.environ["IEL_SEED"])
            if seed is not None:
                config = dataclasses.replace(
                    config, estimator=dataclasses.replace(config.estimator, seed=seed))
            report, code = run_experiment(config, threads=max(1, args.threads),
                                          out_dir=args.out)
            print(f"report written to {args.out or config.output_dir}")
            return code
        if args.command == "distinguish":
            result = distinguish(_load_matrix(args.matrix_a), _load_matrix(args.matrix_b))
            print(json.dumps(result, indent=2, sort_keys=True))
            return 0
        if args.command == "exact":
            pair = exact.toral_invariants(_load_matrix(args.matrix))
            print(json.dumps({
                "forward_entropy": pair.forward_entropy,
                "inverse_entropy": pair.inverse_entropy,
                "folding_entropy": pair.folding_entropy,
                "lyapunov": list(pair.lyapunov),
                "provenance": pair.provenance,
            }, indent=2, sort_keys=True))
            return 0
        if args.command == "bench":
            from .bench import run_bench

            run_bench(samples=args.samples)
            return 0
    except (exact.ExactError, SystemError_, NumericsError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except EstimatorError as exc:
        print(f"estimator failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
