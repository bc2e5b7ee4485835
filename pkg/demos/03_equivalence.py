"""Three ways to hold the same Jacobian.

IQN-IMVJ stores the inverse Jacobian as a dense matrix, IMVLS-explicit also
stores it but solves a different least-squares problem, and IMVLS-implicit
keeps only the (V, W, Z) data of past steps.  With all steps retained they
produce the same iterates up to rounding.
"""

import numpy as np

from iqnkit import AcceleratorConfig, make_added_mass_surrogate, run_simulation
from iqnkit.accelerators import make_accelerator
from iqnkit.oracle import jacobian_by_product_sum, jacobian_by_recursion

problem = make_added_mass_surrogate(m=15, rho_spectral=1.2, seed=3, n_steps=5)
configs = [AcceleratorConfig("IMVJ"), AcceleratorConfig("IMVLSExplicit"),
           AcceleratorConfig("IMVLSImplicit", q="all")]
runs = [run_simulation(problem, cfg, record_history=True) for cfg in configs]

for cfg, rep in zip(configs, runs):
    print(f"{cfg.label:22s} iterations per step {rep.per_step_iterations}")

ref = runs[0]
worst = 0.0
for other in runs[1:]:
    for s_ref, s_oth in zip(ref.steps, other.steps):
        for (x_a, _, _), (x_b, _, _) in zip(s_ref.history, s_oth.history):
            if not x_a.any():
                continue
            worst = max(worst, np.linalg.norm(x_a - x_b) / np.linalg.norm(x_a))
print(f"largest relative iterate difference: {worst:.1e}")

# The stored triplets rebuild the dense matrix in two algebraically equal ways
acc = make_accelerator(configs[2], problem.m)
run_simulation(problem, acc)
J0 = np.zeros((problem.m, problem.m))
a = jacobian_by_recursion(acc.records, J0)
b = jacobian_by_product_sum(acc.records, J0)
print(f"recursion vs product-sum form: {np.linalg.norm(a - b) / np.linalg.norm(a):.1e}")
