"""The closed-form layer: box rates, click-count Laplace triples, the
counting generating function and its large-rate limit, and first-passage
laws, cross-checked against quadrature and simulation.

Run:  python demos/03_analytic_oracles.py        (~30 s)
"""

import numpy as np

from spikes import SpaceTimeBox, ThermalParams, UnitaryParams, collapse_thermal, \
    collapse_unitary, first_passage_stats
from spikes import oracle
from spikes.renewal import passage_times

box = SpaceTimeBox(0.0, 0.1, 0.01, 0.1)

print("=== Laplace triple (C, D, E): closed form vs adaptive quadrature ===")
model = collapse_thermal(ThermalParams(0.77, 0.23, 1e3))
for sigma in (0.0, 1.0, 10.0):
    tc = oracle.laplace_triple_closed(model, sigma, box)
    tq = oracle.laplace_triple_quadrature(model, sigma, box)
    dev = max(abs(tc.c - tq.c), abs(tc.d - tq.d), abs(tc.e - tq.e))
    print(f"  sigma={sigma:4.1f}: C={tc.c:.6f} D={tc.d:.6f} E={tc.e:.2e}  |dev|={dev:.1e}")

print("\n=== generating function approaches its large-rate limit ===")
for gamma in (1e3, 1e4, 1e5, 1e6):
    m = collapse_thermal(ThermalParams(0.77, 0.23, gamma))
    tr = oracle.laplace_triple_closed(m, 1.0, box)
    z = oracle.generating_Z(tr, 0.5)
    za = oracle.asymptotic_Z(m.params, 0.5, 1.0, box)
    print(f"  gamma={gamma:8.0f}: Z={z:.6f}  limit={za:.6f}  |dev|={abs(z - za):.2e}")

print("\n=== first-passage laws (simulated vs predicted means) ===")
um = collapse_unitary(UnitaryParams(omega=1.0, gamma=1e5))
jumps, _ = passage_times(um, 300, master_seed=5)
fp = first_passage_stats(jumps)
print(f"  angular:  mean {fp['mean_jump_time']:.4f} (1/(4 omega) = 0.25), "
      f"exponential KS p = {fp['exp_fit_pvalue']:.3f}")
tm = collapse_thermal(ThermalParams(0.77, 0.23, 1e5))
jumps, returns = passage_times(tm, 300, master_seed=6)
fp = first_passage_stats(jumps)
fr = first_passage_stats(returns)
print(f"  thermal up: mean {fp['mean_jump_time']:.4f} (1/W-+ = {1 / 0.77:.4f})")
print(f"  thermal back: mean {fr['mean_jump_time']:.4f} (1/W+- = {1 / 0.23:.4f})")
