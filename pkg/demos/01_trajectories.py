"""Simulate single trajectories of the three resetting models.

Each path is a deterministic flow away from its reset point, punctuated by
Poisson clicks that throw the state back.  At moderate measurement rates
the flow-and-reset excursions are clearly visible; at large rates they
compress into near-vertical spikes decorating a two-state jump process.

Run:  python demos/01_trajectories.py
"""

import math

from spikes import (RngStream, ThermalParams, UnitaryParams, collapse_thermal,
                    collapse_unitary, extract_prespikes, simulate_euler,
                    simulate_exact, state_at)

print("=== angular model, moderate rate (exact events) ===")
model = collapse_unitary(UnitaryParams(omega=1.0, gamma=64.0))
log = simulate_exact(model, math.pi, 2.0, RngStream(7, 0))
print(f"clicks in 2 time units: {len(log.clicks)}")
for ev in log.clicks[:6]:
    print(f"  t={ev.time:.4f}  flow had reached theta={ev.pre_state:+.3f}  -> reset to pi")

print("\n=== thermal model, first-order scheme, pre-spike structure ===")
model = collapse_thermal(ThermalParams(w_minus_plus=0.3, w_plus_minus=0.3, gamma=25.0))
log = simulate_euler(model, 0.0, 1e-4, 20.0, RngStream(11, 0))
tips = [h for _, h in extract_prespikes(log)]
print(f"clicks: {len(tips)}, largest excursion tip: {max(tips):.3f}")
print("sampled path (state every 2 time units):")
for k in range(11):
    t = 2.0 * k
    print(f"  t={t:5.1f}  q={state_at(model, log, min(t, log.t_end)):.4f}")

print("\n=== same bath, strong measurement: excursions become spikes ===")
model = collapse_thermal(ThermalParams(w_minus_plus=0.3, w_plus_minus=0.3, gamma=2000.0))
log = simulate_exact(model, 0.0, 2.0, RngStream(11, 1))
tips = [h for _, h in extract_prespikes(log)]
big = [h for h in tips if h > 0.1]
print(f"clicks: {len(tips)}; tips above 0.1: {len(big)} "
      f"(they last ~1/rate each, i.e. visually vertical)")
