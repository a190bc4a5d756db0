"""Command-line front end: ``solve``, ``audit`` and ``bench``.

Usage::

    condgrad solve experiments/box1d_nm.yaml
    condgrad --out-dir runs audit runs/box1d_nm.csv experiments/box1d_nm.yaml
    condgrad --out-dir runs bench experiments/bench/suite.yaml

Exit codes
----------
solve: 0 gap below tolerance or stationary, 2 iteration budget exhausted,
3 solver error (infeasible start, stalled linesearch, ...), 1 config error.
audit: 0 all checks pass, 4 some check fails, 1 unreadable or mismatched input.
bench: 0 every run finished, 3 some run failed, 1 unreadable or empty suite.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .config import ExperimentConfig, build_experiment, load_config, read_yaml
from .core import TerminationStatus
from .errors import CondGradError, ConfigError, LinesearchStalled
from .nonmonotone import nm_run
from .paramfree import pf_run
from .traceio import TraceFormatError, fmt, read_trace, write_plot, write_trace
from .verify import audit_trace, rate_report

log = logging.getLogger("condgrad")

OUT_DIR_ENV = "CONDGRAD_OUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MAX_ITERS = 2
EXIT_SOLVER = 3
EXIT_AUDIT_FAIL = 4


def resolve_out_dir(flag: Optional[str]) -> Path:
    if flag:
        return Path(flag)
    env = os.environ.get(OUT_DIR_ENV)
    return Path(env) if env else Path(".")


def run_experiment(exp: ExperimentConfig, out_dir: Path, timing: bool = False) -> dict:
    """Run one experiment, write its trace, plot data and summary; return the summary."""
    stem = out_dir / exp.output
    stem.parent.mkdir(parents=True, exist_ok=True)
    trace_path = stem.with_name(stem.name + ".csv")
    runner = nm_run if exp.algorithm == "nm" else pf_run
    summary: dict[str, Any] = {"name": exp.name, "algorithm": exp.algorithm, "seed": exp.seed, "trace": str(trace_path)}
    t0 = time.perf_counter()
    trace = None
    try:
        trace, status = runner(exp.problem, exp.x0, exp.solver)
        summary["status"] = status.value
        summary["exit_code"] = EXIT_MAX_ITERS if status is TerminationStatus.MAX_ITERS else EXIT_OK
    except LinesearchStalled as exc:
        trace = exc.trace
        summary.update(status=TerminationStatus.LINESEARCH_STALLED.value, error=str(exc), exit_code=EXIT_SOLVER)
    except CondGradError as exc:
        summary.update(status=type(exc).__name__, error=str(exc), exit_code=EXIT_SOLVER)
    summary["wall_time_s"] = time.perf_counter() - t0

    if trace:
        write_trace(trace_path, trace, timing=timing or exp.timing)
        write_plot(stem.with_name(stem.name + ".plot.csv"), trace, exp.f_star)
        gaps = [r.gap for r in trace]
        summary.update(
            iterations=trace[-1].k,
            final_gap=gaps[-1],
            min_gap=min(gaps),
            final_F=trace[-1].f_x,
        )
    else:
        summary["trace"] = None
    with open(stem.with_name(stem.name + ".summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return summary


def _print_summary(s: dict) -> None:
    line = f"{s['name']} [{s['algorithm']}]: {s['status']}"
    if "iterations" in s:
        line += f" after {s['iterations']} iterations, final gap {s['final_gap']:.3e}, F {fmt(s['final_F'])}"
    if "error" in s:
        line += f" ({s['error']})"
    print(line)


def cmd_solve(args) -> int:
    try:
        exp = load_config(args.config, seed=args.seed, max_iters=args.max_iters)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = run_experiment(exp, resolve_out_dir(args.out_dir), timing=args.timing)
    if not args.quiet or summary["exit_code"] == EXIT_SOLVER:
        _print_summary(summary)
    return summary["exit_code"]


def _check_trace_matches(trace, exp: ExperimentConfig) -> Optional[str]:
    has_l = [r.l_k is not None for r in trace[:-1]]
    if exp.algorithm == "nm" and any(has_l):
        return "trace has curvature estimates but the config runs the nonmonotone method"
    if exp.algorithm == "pf" and not all(has_l):
        return "trace lacks curvature estimates but the config runs the parameter-free method"
    try:
        F0 = exp.problem.value(exp.x0)
    except CondGradError as exc:
        return f"cannot evaluate F(x0): {exc}"
    if trace[0].f_x != F0:
        return f"trace starts at F = {fmt(trace[0].f_x)} but the config gives F(x0) = {fmt(F0)}"
    return None


def cmd_audit(args) -> int:
    try:
        exp = load_config(args.config, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        trace = read_trace(args.trace)
    except FileNotFoundError:
        print(f"trace not found: {args.trace}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, TraceFormatError) as exc:
        print(f"unreadable trace: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    mismatch = _check_trace_matches(trace, exp)
    if mismatch:
        print(f"trace/config mismatch: {mismatch}", file=sys.stderr)
        return EXIT_CONFIG
    report = audit_trace(trace, exp.algorithm, exp.solver)
    out = Path(args.trace).with_suffix(".audit.json")
    with open(out, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    for c in report.failures():
        print(f"FAIL {c.name} at row {c.location} (excess {c.worst:.3e}) {c.note}".rstrip())
    if not args.quiet:
        print(f"audit: {report.summary()}")
    return EXIT_OK if report.passed else EXIT_AUDIT_FAIL


def _bench_worker(job: tuple) -> dict:
    raw, base_dir, source, seed, max_iters, out_dir, timing = job
    if isinstance(raw, str):  # unreadable config file, message from _load_suite
        return {"name": source, "algorithm": None, "status": "ConfigError", "error": raw, "exit_code": EXIT_CONFIG}
    try:
        exp = build_experiment(raw, base_dir=base_dir, seed=seed, max_iters=max_iters, source=source)
    except ConfigError as exc:
        name = raw.get("name", source) if isinstance(raw, dict) else source
        return {"name": str(name), "algorithm": None, "status": "ConfigError", "error": str(exc), "exit_code": EXIT_CONFIG}
    summary = run_experiment(exp, Path(out_dir), timing=timing)
    summary["nu"] = exp.nu
    return summary


def _load_suite(path: Path) -> list[tuple[Any, Path, str]]:
    doc = read_yaml(path)
    runs = doc.get("runs") if isinstance(doc, dict) else None
    if not isinstance(runs, list) or not runs:
        raise ConfigError(f"{path}: 'runs' must be a nonempty list")
    entries = []
    for i, entry in enumerate(runs):
        if isinstance(entry, str):
            cfg_path = path.parent / entry
            try:
                raw = read_yaml(cfg_path)
            except ConfigError as exc:
                raw = {"name": entry, "__error__": str(exc)}
            entries.append((raw, cfg_path.parent, str(cfg_path)))
        elif isinstance(entry, dict):
            entries.append((entry, path.parent, f"{path}:runs[{i}]"))
        else:
            raise ConfigError(f"{path}: runs[{i}] must be a config path or an inline mapping")
    return entries


def _write_min_gap_table(path: Path, summaries: list[dict]) -> None:
    curves = {}
    for s in summaries:
        if s.get("trace"):
            curves[s["name"]] = np.minimum.accumulate([r.gap for r in read_trace(s["trace"])])
    length = max((len(c) for c in curves.values()), default=0)
    names = list(curves)
    with open(path, "w") as fh:
        fh.write(",".join(["k"] + names) + "\n")
        for k in range(length):
            cells = [fmt(curves[n][k]) if k < len(curves[n]) else "" for n in names]
            fh.write(",".join([str(k)] + cells) + "\n")


def cmd_bench(args) -> int:
    suite = Path(args.suite)
    try:
        entries = _load_suite(suite)
    except ConfigError as exc:
        print(f"suite error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = resolve_out_dir(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    jobs = []
    for raw, base, source in entries:
        if isinstance(raw, dict) and "__error__" in raw:
            raw = raw["__error__"]
        jobs.append((raw, str(base), source, args.seed, args.max_iters, str(out_dir), args.timing))
    workers = args.jobs or min(len(jobs), os.cpu_count() or 1)
    if workers <= 1:
        summaries = [_bench_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(_bench_worker, jobs))

    names = [s["name"] for s in summaries]
    if len(set(names)) != len(names):
        log.warning("duplicate run names in suite; the min-gap table keeps the last of each")
    _write_min_gap_table(out_dir / "bench_min_gap.csv", summaries)
    curves = {
        s["name"]: (np.minimum.accumulate([r.gap for r in read_trace(s["trace"])]), s.get("nu"))
        for s in summaries
        if s.get("trace")
    }
    rates = rate_report(curves)
    with open(out_dir / "bench_rates.json", "w") as fh:
        json.dump(rates, fh, indent=2)
        fh.write("\n")
    with open(out_dir / "bench_summary.json", "w") as fh:
        json.dump(summaries, fh, indent=2)
        fh.write("\n")

    for s in summaries:
        if not args.quiet or s["exit_code"] in (EXIT_CONFIG, EXIT_SOLVER):
            _print_summary(s)
    if not args.quiet:
        for name, r in rates.items():
            if "slope" in r:
                theo = "n/a" if r["theoretical"] is None else f"{r['theoretical']:.3f}"
                print(f"rate {name}: slope {r['slope']:.3f} (theoretical {theo})")
            else:
                print(f"rate {name}: {r['error']}")
    failed = any(s["exit_code"] in (EXIT_CONFIG, EXIT_SOLVER) for s in summaries)
    return EXIT_SOLVER if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=argparse.SUPPRESS, help=f"output directory (env {OUT_DIR_ENV}, default .)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the config seed")
    common.add_argument("--max-iters", type=int, default=argparse.SUPPRESS, help="override params.max_iters")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    common.add_argument(
        "--timing", action="store_true", default=argparse.SUPPRESS, help="write real elapsed_ns values into traces"
    )

    parser = argparse.ArgumentParser(prog="condgrad", parents=[common], description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", parents=[common], help="run one experiment config")
    p.add_argument("config")
    p.set_defaults(func=cmd_solve)
    p = sub.add_parser("audit", parents=[common], help="re-verify a trace against its config")
    p.add_argument("trace")
    p.add_argument("config")
    p.set_defaults(func=cmd_audit)
    p = sub.add_parser("bench", parents=[common], help="run a suite of configs")
    p.add_argument("suite")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: one per run, up to CPU count)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    for name, default in (("out_dir", None), ("seed", None), ("max_iters", None), ("quiet", False), ("timing", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
