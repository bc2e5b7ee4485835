import numpy as np
import pytest

from helpers import iterates
from iqnkit import (
    AcceleratorConfig,
    ConvergenceCriteria,
    affine_problem,
    make_added_mass_surrogate,
    make_pulse_sequence,
    run_simulation,
    run_time_step,
)
from iqnkit.accelerators import make_accelerator
from iqnkit.errors import NotConverged, RankDeficient


def test_zero_operator_converges_after_one_update():
    p = affine_problem(np.zeros((3, 3)), [1.0, 2.0, 3.0])
    report = run_simulation(p, AcceleratorConfig("ILS", omega0=1.0))
    assert report.per_step_iterations == [1]
    np.testing.assert_array_equal(report.solution, [1.0, 2.0, 3.0])


def test_converged_start_needs_no_update():
    p = affine_problem([[0.5]], [1.0])
    report = run_simulation(p, AcceleratorConfig("ILS"), x0=[2.0])
    assert report.per_step_iterations == [0]


def test_divergent_relaxation_raises_with_history():
    p = make_added_mass_surrogate(20, 1.2, seed=0)
    with pytest.raises(NotConverged) as info:
        run_simulation(p, AcceleratorConfig("ConstRelax", omega0=1.0))
    assert info.value.step == 0
    assert len(info.value.residual_history) == 201


def test_failure_report_without_raising():
    p = make_added_mass_surrogate(20, 1.2, seed=0, n_steps=3)
    report = run_simulation(p, AcceleratorConfig("ConstRelax", omega0=1.0), raise_on_failure=False)
    assert not report.converged and report.failed_step == 0
    assert report.failure.startswith("NotConverged")


def test_non_finite_residual_stops():
    p = affine_problem([[3.0]], [1.0])
    crit = ConvergenceCriteria(max_iterations=10**6)
    with pytest.raises(NotConverged):
        run_simulation(p, AcceleratorConfig("ConstRelax", omega0=1.0), crit)


def test_accelerator_errors_carry_location():
    p = affine_problem([[0.5, 0], [0, 0.1]], [[1.0, 1.0], [2.0, 0.0]])
    acc = make_accelerator(AcceleratorConfig("ILS"), 2)

    def broken(*_):
        raise RankDeficient("boom")

    acc.update = broken
    with pytest.raises(RankDeficient) as info:
        run_time_step(p, 1, acc, ConvergenceCriteria(), np.zeros(2))
    assert info.value.step == 1 and info.value.iteration == 1


def test_residual_invariant():
    p = make_added_mass_surrogate(15, 1.2, seed=1, n_steps=3)
    report = run_simulation(p, AcceleratorConfig("IMVLSImplicit", q="all"), record_history=True)
    for t, step in enumerate(report.steps):
        for x, xt, R in step.history:
            assert R.tobytes() == (xt - x).tobytes()
            assert xt.tobytes() == p.apply(t, x).tobytes()
        assert [float(np.linalg.norm(R)) for _, _, R in step.history] == step.residual_norms


def test_phase_timers_add_up():
    p = make_added_mass_surrogate(300, 1.2, seed=2, n_steps=5)
    report = run_simulation(p, AcceleratorConfig("IMVLSImplicit", q="all"))
    for s in report.steps:
        parts = s.update_seconds + s.apply_seconds + s.bookkeeping_seconds
        assert parts <= s.wall_seconds
        assert parts >= 0.9 * s.wall_seconds


def test_runs_are_deterministic():
    p = make_added_mass_surrogate(40, 1.2, seed=3, n_steps=4)
    cfg = AcceleratorConfig("IMVLSImplicit", q=2)
    a = run_simulation(p, cfg, record_history=True)
    b = run_simulation(p, cfg, record_history=True)
    assert a.per_step_iterations == b.per_step_iterations
    assert a.solution.tobytes() == b.solution.tobytes()


def test_pulse_implicit_all_matches_imvj():
    p = make_pulse_sequence(12, 10, seed=0)
    a = run_simulation(p, AcceleratorConfig("IMVLSImplicit", q="all"))
    b = run_simulation(p, AcceleratorConfig("IMVJ"))
    assert a.per_step_iterations == b.per_step_iterations


def test_single_step_simulation_equals_time_step():
    p = make_added_mass_surrogate(10, 1.2, seed=4)
    report = run_simulation(p, AcceleratorConfig("ILS"), record_history=True)
    acc = make_accelerator(AcceleratorConfig("ILS"), 10)
    x, stats = run_time_step(p, 0, acc, ConvergenceCriteria(), np.zeros(10), True)
    assert x.tobytes() == report.solution.tobytes()
    assert stats.residual_norms == report.steps[0].residual_norms
    assert iterates(report)[0][-1].tobytes() == stats.history[-1][0].tobytes()


def test_extrapolation_starts_from_linear_prediction():
    p = make_added_mass_surrogate(10, 0.5, seed=1, n_steps=4)
    report = run_simulation(p, AcceleratorConfig("ILS"), extrapolate=True, record_history=True)
    x0, x1 = iterates(report)[0][-1], iterates(report)[1][-1]
    np.testing.assert_array_equal(iterates(report)[2][0], 2.0 * x1 - x0)


def test_accepts_dict_config_and_reports_errors():
    p = make_added_mass_surrogate(10, 1.2, seed=1, n_steps=2)
    report = run_simulation(p, {"scheme": "IMVJ"})
    assert report.scheme == "IQN-IMVJ"
    assert max(report.final_errors) < 1e-2
    summary = report.summary()
    assert summary["n_steps"] == 2 and summary["total_flops"] > 0


def test_criteria_validation():
    with pytest.raises(ValueError):
        ConvergenceCriteria(eps_abs=0)
    with pytest.raises(ValueError):
        ConvergenceCriteria(combine="xor")
    crit = ConvergenceCriteria(eps_abs=1e-8, eps_rel=1e-3, combine="and")
    assert not crit.converged(1e-9, 1e-7)
    assert crit.converged(1e-9, 1.0)
