"""Follow IQN-ILS by hand on H(x) = 0.5 x + 1.

The fixed point is x* = 2.  From x = 0 the solver returns 1, so the first
residual is 1 and relaxation with omega = 0.5 moves to 0.5.  The second
evaluation gives 1.25, residual 0.75: one data pair (dR, dx~) = (-0.25, 0.25)
from which the secant step lands exactly on 2.
"""

from iqnkit import AcceleratorConfig, affine_problem, run_simulation
from iqnkit.accelerators import DataPairMatrices, finalize_time_step

problem = affine_problem([[0.5]], [1.0])
report = run_simulation(problem, AcceleratorConfig("ILS"), record_history=True)

print("k      x        H(x)     R")
for k, (x, xt, R) in enumerate(report.steps[0].history):
    print(f"{k}  {x[0]:7.4f}  {xt[0]:7.4f}  {R[0]:7.4f}")
print("updates needed:", report.steps[0].iterations)

# What the multi-vector schemes keep after this step
pairs = DataPairMatrices.from_columns([[-0.25]], [[0.25]])
record = finalize_time_step(pairs, AcceleratorConfig("IMVLSImplicit", q="all"))
J = finalize_time_step(pairs, AcceleratorConfig("IMVJ"))
print("stored Z =", record.Z[0, 0], " inverse Jacobian estimate =", J[0, 0])
# J maps residual changes to output changes: 0.25 = J * (-0.25)
