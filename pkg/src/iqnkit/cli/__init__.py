"""Command line: ``iqnkit run|compare|scaling <config>``.

Exit status 0 on success, 2 when the configuration cannot be parsed and 3
when a coupling run fails (the summary is still written, flagged).
"""

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from iqnkit import __version__
from iqnkit.cli.config import ConfigError, load_config
from iqnkit.driver import run_simulation
from iqnkit.experiments import DIVERGED, compare, scaling

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILED = 3

STEPS_COLUMNS = ["step", "iterations", "residual_final", "update_seconds", "apply_seconds"]
COMPARE_COLUMNS = ["scheme", "status", "avg_iterations", "relative_iterations_pct",
                   "relative_runtime_pct", "update_share_pct"]
SCALING_COLUMNS = ["scheme", "m", "status", "update_seconds", "flops"]


def _pct(value):
    return "" if value is None else f"{value:.2f}"


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


def _write_json(path, data):
    with open(path, "w") as fh:
        json.dump(_json_safe(data), fh, indent=2)
        fh.write("\n")


def _prepare(out, config):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(config.to_text())
    return out


def cmd_run(config, out):
    problem = config.build_problem()
    report = run_simulation(problem, config.accelerators[0], config.criteria,
                            extrapolate=config.extrapolate, raise_on_failure=False)
    out = _prepare(out, config)
    _write_csv(out / "steps.csv", STEPS_COLUMNS, [
        [s.step, s.iterations, repr(s.residual_final), repr(s.update_seconds), repr(s.apply_seconds)]
        for s in report.steps
    ])
    summary = report.summary()
    summary["version"] = __version__
    _write_json(out / "summary.json", summary)
    return EXIT_OK if report.converged else EXIT_FAILED


def cmd_compare(config, out, threads=1):
    problem = config.build_problem()
    rows = compare(problem, config.accelerators, config.criteria, threads)
    out = _prepare(out, config)
    _write_csv(out / "compare.csv", COMPARE_COLUMNS, [
        [r["scheme"], r["status"], _pct(r["avg_iterations"]), _pct(r["relative_iterations_pct"]),
         _pct(r["relative_runtime_pct"]), _pct(r["update_share_pct"])]
        for r in rows
    ])
    schemes = []
    for r in rows:
        rep = r["report"]
        entry = {"scheme": r["scheme"], "status": r["status"], "avg_iterations": r["avg_iterations"]}
        if isinstance(rep, MemoryError):
            entry.update(update_seconds=None, warnings={}, failure=str(rep))
        else:
            entry.update(update_seconds=rep.update_seconds, warnings=dict(rep.warnings),
                         failure=rep.failure)
        schemes.append(entry)
    _write_json(out / "summary.json", {"version": __version__, "baseline": rows[0]["scheme"],
                                       "schemes": schemes})
    return EXIT_FAILED if any(r["status"] == DIVERGED for r in rows) else EXIT_OK


def cmd_scaling(config, out, m_list, threads=1):
    rows, slopes = scaling(config.problem, config.accelerators, m_list, config.criteria,
                           config.repetitions, threads)
    out = _prepare(out, config)
    _write_csv(out / "scaling.csv", SCALING_COLUMNS, [
        [r["scheme"], r["m"], r["status"],
         "" if r["update_seconds"] is None else repr(r["update_seconds"]),
         "" if r["flops"] is None else r["flops"]]
        for r in rows
    ])
    schemes = []
    for acc in config.accelerators:
        mine = [r for r in rows if r["scheme"] == acc.label]
        ok = [r for r in mine if r["status"] != DIVERGED]
        schemes.append({
            "scheme": acc.label,
            "avg_iterations": [r["avg_iterations"] for r in mine],
            "update_seconds": sum(r["update_seconds"] for r in ok),
            "slope": slopes[acc.label],
            "warnings": {"failed_runs": [r["failure"] for r in mine if r["status"] == DIVERGED]},
        })
    _write_json(out / "summary.json", {"version": __version__, "m": list(m_list), "schemes": schemes})
    failed = any(r["status"] == DIVERGED for r in rows)
    return EXIT_FAILED if failed else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="iqnkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "compare", "scaling"):
        p = sub.add_parser(name)
        p.add_argument("config")
        p.add_argument("--out", default="out")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
        if name == "scaling":
            p.add_argument("--m", dest="m_list", default=None,
                           help="comma-separated interface dimensions")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.seed)
        m_list = None
        if args.command == "scaling":
            text = args.m_list
            m_list = config.m_list if text is None else [int(v) for v in text.split(",") if v.strip()]
            if not m_list or len(m_list) < 3 or any(b <= a for a, b in zip(m_list, m_list[1:])):
                raise ConfigError("scaling needs at least three strictly increasing m values")
        if args.command == "compare" and len(config.accelerators) < 2:
            raise ConfigError("compare needs at least two accelerator sections")
    except (ConfigError, ValueError) as exc:
        print(f"iqnkit: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "run":
        return cmd_run(config, args.out)
    if args.command == "compare":
        return cmd_compare(config, args.out, args.threads)
    return cmd_scaling(config, args.out, m_list, args.threads)
