"""Time-step and coupling loops around a black-box fixed-point operator."""

import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from iqnkit.accelerators import Accelerator, AcceleratorConfig, make_accelerator
from iqnkit.errors import CouplingError, NotConverged


@dataclass(frozen=True)
class ConvergenceCriteria:
    """Stopping rule on the residual norm of the current time step.

    With ``combine="or"`` either bound suffices; ``"and"`` requires both.
    The relative bound is measured against the first residual of the step.
    """

    eps_abs: float = 1e-8
    eps_rel: float = 1e-3
    max_iterations: int = 200
    combine: str = "or"

    def __post_init__(self):
        if self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValueError("convergence tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.combine not in ("or", "and"):
            raise ValueError(f"combine must be 'or' or 'and', got {self.combine!r}")

    def converged(self, r_norm, r0_norm):
        absolute = r_norm <= self.eps_abs
        relative = r_norm <= self.eps_rel * r0_norm
        if self.combine == "or":
            return absolute or relative
        return absolute and relative


@dataclass
class StepStats:
    step: int
    iterations: int
    residual_norms: list
    update_seconds: float = 0.0
    apply_seconds: float = 0.0
    bookkeeping_seconds: float = 0.0
    wall_seconds: float = 0.0
    error: float = None
    history: list = None

    @property
    def residual_final(self):
        return self.residual_norms[-1]

    @property
    def evaluations(self):
        return self.iterations + 1


@dataclass
class CouplingReport:
    scheme: str
    m: int
    steps: list = field(default_factory=list)
    flop_counters: Counter = field(default_factory=Counter)
    warnings: Counter = field(default_factory=Counter)
    converged: bool = True
    failure: str = None
    failed_step: int = None
    solution: np.ndarray = None

    @property
    def per_step_iterations(self):
        return [s.iterations for s in self.steps]

    @property
    def avg_iterations(self):
        its = self.per_step_iterations
        return float(np.mean(its)) if its else float("nan")

    @property
    def total_iterations(self):
        return sum(self.per_step_iterations)

    @property
    def update_seconds(self):
        return sum(s.update_seconds for s in self.steps)

    @property
    def apply_seconds(self):
        return sum(s.apply_seconds for s in self.steps)

    @property
    def wall_seconds(self):
        return sum(s.wall_seconds for s in self.steps)

    @property
    def final_errors(self):
        return [s.error for s in self.steps if s.error is not None]

    @property
    def total_flops(self):
        return sum(self.flop_counters.values())

    def summary(self):
        return {
            "scheme": self.scheme,
            "m": self.m,
            "converged": self.converged,
            "failure": self.failure,
            "failed_step": self.failed_step,
            "n_steps": len(self.steps),
            "avg_iterations": self.avg_iterations,
            "total_iterations": self.total_iterations,
            "update_seconds": self.update_seconds,
            "apply_seconds": self.apply_seconds,
            "wall_seconds": self.wall_seconds,
            "flops": dict(self.flop_counters),
            "total_flops": self.total_flops,
            "max_final_error": max(self.final_errors) if self.final_errors else None,
            "warnings": dict(self.warnings),
        }


def run_time_step(problem, step, accelerator, criteria, x_init, record_history=False):
    """Iterate one time step to convergence.

    Returns the converged interface iterate and a :class:`StepStats`.  The
    iteration count is the number of accelerator updates, so a step that
    converges after the k-th update reports k.  Raises NotConverged when
    ``criteria.max_iterations`` updates do not suffice or the residual stops
    being finite; accelerator errors propagate with ``step`` and
    ``iteration`` attributes attached.
    """
    t_wall = time.perf_counter()
    update_s = apply_s = book_s = 0.0
    x = np.array(x_init, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("initial iterate is not finite")
    history = [] if record_history else None
    accelerator.begin_step()

    k = 0
    while True:
        t0 = time.perf_counter()
        xtilde = problem.apply(step, x)
        R = xtilde - x
        t1 = time.perf_counter()
        apply_s += t1 - t0

        r_norm = float(np.linalg.norm(R))
        if k == 0:
            r0_norm = r_norm
            norms = []
        norms.append(r_norm)
        if history is not None:
            history.append((x.copy(), xtilde.copy(), R.copy()))
        if not np.isfinite(r_norm):
            raise NotConverged(f"step {step}: residual is not finite after {k} updates", norms, step)
        done = criteria.converged(r_norm, r0_norm)
        if not done and k >= criteria.max_iterations:
            raise NotConverged(
                f"step {step}: residual {r_norm:.3e} after {k} updates", norms, step
            )
        t2 = time.perf_counter()
        book_s += t2 - t1
        if done:
            break

        try:
            if k == 0:
                x = accelerator.start_step(x, xtilde, R)
            else:
                x = accelerator.update(x, xtilde, R)
        except CouplingError as exc:
            exc.step, exc.iteration = step, k
            raise
        update_s += time.perf_counter() - t2
        k += 1

    t3 = time.perf_counter()
    accelerator.finish_step()
    t4 = time.perf_counter()
    update_s += t4 - t3

    stats = StepStats(step, k, norms, update_s, apply_s, book_s, history=history)
    exact = problem.exact_solution(step)
    if exact is not None:
        stats.error = float(np.linalg.norm(x - exact))
    stats.bookkeeping_seconds += time.perf_counter() - t4
    stats.wall_seconds = time.perf_counter() - t_wall
    return x, stats


def run_simulation(problem, accelerator, criteria=None, x0=None, extrapolate=False,
                   record_history=False, raise_on_failure=True):
    """Run every time step of ``problem``.

    ``accelerator`` is an :class:`AcceleratorConfig` (a fresh accelerator is
    built) or an existing :class:`Accelerator`.  Each step starts from the
    previous converged solution, or from a linear extrapolation of the last
    two when ``extrapolate`` is set.  With ``raise_on_failure=False`` a
    failing step ends the run and the partial report is returned with
    ``converged=False``.
    """
    criteria = ConvergenceCriteria() if criteria is None else criteria
    if not isinstance(accelerator, Accelerator):
        if not isinstance(accelerator, AcceleratorConfig):
            accelerator = AcceleratorConfig(**accelerator)
        accelerator = make_accelerator(accelerator, problem.m)
    report = CouplingReport(accelerator.config.label, problem.m)
    x = np.zeros(problem.m) if x0 is None else np.asarray(x0, dtype=float)
    x_older = None
    try:
        for step in range(problem.n_steps):
            x_init = x
            if extrapolate and x_older is not None:
                x_init = 2.0 * x - x_older
            x_new, stats = run_time_step(problem, step, accelerator, criteria, x_init, record_history)
            report.steps.append(stats)
            x_older, x = x, x_new
    except CouplingError as exc:
        report.converged = False
        report.failure = f"{type(exc).__name__}: {exc}"
        report.failed_step = getattr(exc, "step", None)
        if raise_on_failure:
            if getattr(exc, "step", None) is None:
                exc.step = step
            raise
    finally:
        report.flop_counters = Counter(accelerator.flops)
        report.warnings = Counter(accelerator.warnings)
    report.solution = x
    return report
