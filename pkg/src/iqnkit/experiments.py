"""Batch comparisons and complexity scaling runs.

These functions return plain rows (dicts) so that the command line can
write them as CSV and the tests can inspect them directly.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from iqnkit.driver import run_simulation
from iqnkit.problems import problem_from_params

DIVERGED = "DIVERGED"
OK = "OK"


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _safe_run(problem, config, criteria):
    try:
        return run_simulation(problem, config, criteria, raise_on_failure=False)
    except MemoryError as exc:
        return exc


def compare(problem, configs, criteria, threads=1):
    """Run each accelerator on ``problem``; percentages relative to the first.

    Rows carry ``relative_iterations_pct`` (average iterations against the
    baseline), ``relative_runtime_pct`` (coupling wall time against the
    baseline) and ``update_share_pct`` (accelerator time over wall time).
    A scheme that fails is marked DIVERGED and leaves the others untouched.
    """
    if len(configs) < 2:
        raise ValueError("a comparison needs at least two accelerators")
    reports = _map(lambda cfg: _safe_run(problem, cfg, criteria), configs, threads)
    base = reports[0]
    base_ok = not isinstance(base, MemoryError) and base.converged
    rows = []
    for cfg, rep in zip(configs, reports):
        row = {"scheme": cfg.label, "status": DIVERGED, "avg_iterations": None,
               "relative_iterations_pct": None, "runtime_seconds": None,
               "relative_runtime_pct": None, "update_share_pct": None, "report": rep}
        if not isinstance(rep, MemoryError) and rep.converged:
            row.update(status=OK, avg_iterations=rep.avg_iterations,
                       runtime_seconds=rep.wall_seconds,
                       update_share_pct=100.0 * rep.update_seconds / rep.wall_seconds)
            if base_ok:
                row["relative_iterations_pct"] = 100.0 * rep.avg_iterations / base.avg_iterations
                row["relative_runtime_pct"] = 100.0 * rep.wall_seconds / base.wall_seconds
        rows.append(row)
    return rows


def fit_loglog_slope(xs, ys):
    """Least-squares slope of ``log y`` against ``log x``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2 or np.any(xs <= 0) or np.any(ys <= 0):
        return float("nan")
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)


def scaling(problem_params, configs, m_list, criteria, repetitions=1, threads=1):
    """Measure update cost against the interface dimension.

    For every scheme and every ``m`` the problem is rebuilt from
    ``problem_params`` with that dimension and solved ``repetitions`` times
    after one untimed warm-up run on the smallest ``m``.  Returns
    ``(rows, slopes)``: rows hold the mean update seconds per time step and
    the total multiply-add count of one run; ``slopes`` maps each scheme label
    to its fitted log-log slopes (``nan`` when a run failed).
    """
    m_list = [int(m) for m in m_list]
    if len(m_list) < 3 or any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ValueError("m_list must hold at least three strictly increasing values")

    def build(m):
        return problem_from_params(dict(problem_params, m=m))

    def measure(job):
        cfg, m = job
        problem = build(m)
        seconds, flops, status, failure, iters = [], None, OK, None, None
        for _ in range(repetitions):
            rep = _safe_run(problem, cfg, criteria)
            if isinstance(rep, MemoryError) or not rep.converged:
                status = DIVERGED
                failure = str(rep) if isinstance(rep, MemoryError) else rep.failure
                break
            seconds.append(rep.update_seconds / len(rep.steps))
            flops = rep.total_flops
            iters = rep.avg_iterations
        return {"scheme": cfg.label, "m": m, "status": status, "failure": failure,
                "update_seconds": float(np.mean(seconds)) if status == OK else None,
                "flops": flops if status == OK else None, "avg_iterations": iters}

    warm = build(m_list[0])
    for cfg in configs:
        _safe_run(warm, cfg, criteria)
    jobs = [(cfg, m) for cfg in configs for m in m_list]
    rows = _map(measure, jobs, threads)

    slopes = {}
    for cfg in configs:
        mine = [r for r in rows if r["scheme"] == cfg.label]
        if all(r["status"] == OK for r in mine):
            ms = [r["m"] for r in mine]
            slopes[cfg.label] = {
                "flops": fit_loglog_slope(ms, [r["flops"] for r in mine]),
                "seconds": fit_loglog_slope(ms, [r["update_seconds"] for r in mine]),
            }
        else:
            slopes[cfg.label] = {"flops": float("nan"), "seconds": float("nan")}
    return rows, slopes
