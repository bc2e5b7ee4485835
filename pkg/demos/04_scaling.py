"""Cost of one update against the interface size.

The dense-Jacobian scheme touches m^2 numbers per product; the implicit
scheme touches only m * k per stored step.  Counted multiply-adds show the
exponents exactly, wall time shows them up to cache effects.
"""

from iqnkit import AcceleratorConfig, ConvergenceCriteria
from iqnkit.experiments import scaling

params = {"generator": "added_mass", "rho_spectral": 1.2, "seed": 0, "n_steps": 4, "n_levels": 12}
configs = [AcceleratorConfig("IMVLSImplicit", q="all"), AcceleratorConfig("IMVJ")]

rows, slopes = scaling(params, configs, [500, 1000, 2000, 4000], ConvergenceCriteria(), repetitions=2)
for r in rows:
    print(f"{r['scheme']:18s} m={r['m']:5d}  {r['update_seconds']:.4f} s/step  {r['flops']:>12d} flops")
for label, s in slopes.items():
    print(f"{label:18s} log-log slope: flops {s['flops']:.3f}, time {s['seconds']:.3f}")
