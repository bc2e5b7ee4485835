"""Reusing old secant data when the operator does not change.

The pulse sequence keeps the same operator for all steps and only varies
the forcing, so everything learned in early steps stays valid.  Keeping
every past step (q = all) makes later steps nearly free; discarding them
(q = 0) starts every step from scratch.
"""

from iqnkit import AcceleratorConfig, make_pulse_sequence, run_simulation

problem = make_pulse_sequence(m=100, n_steps=20, seed=0)
for q in (0, 1, 3, "all"):
    report = run_simulation(problem, AcceleratorConfig("IMVLSImplicit", q=q))
    its = report.per_step_iterations
    print(f"q={q!s:4s} per step {its}  total after step 1: {sum(its[1:])}")
