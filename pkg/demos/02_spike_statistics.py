"""Conditioned spike counting versus the limiting Poisson law.

Counts excursion tips in space-time boxes (t0,t1) x (a,b), conditioned on
no pointer jump in the window, and compares the per-time mean and variance
with the closed-form box rate.  A dispersion index near 1 is the Poisson
signature.

Run:  python demos/02_spike_statistics.py        (~1 minute)
"""

from spikes import SpaceTimeBox, ThermalParams, collapse_thermal, conditioned_box_stats
from spikes.oracle import model_box_rate
from spikes.renewal import window_outcomes

GAMMA = 1e5
N = 4000
T = 0.1

model = collapse_thermal(ThermalParams(w_minus_plus=0.77, w_plus_minus=0.23, gamma=GAMMA))
boxes = [SpaceTimeBox(0.0, T, 0.01, b) for b in (0.02, 0.04, 0.06, 0.08, 0.10)]
outcomes = window_outcomes(model, boxes, T, N, master_seed=2024)

print(f"thermal model, rate {GAMMA:g}, {N} trajectories, window (0, {T})")
print(f"{'box':>12} {'mean/t':>10} {'3sem':>7} {'var/t':>10} {'theory':>8} {'disp':>6}")
for box in boxes:
    st = conditioned_box_stats(outcomes, box)
    lam = model_box_rate(model, box)
    print(f"(0.01,{box.b:4.2f}) {st.mean / T:10.2f} {3 * st.sem_mean / T:7.2f} "
          f"{st.variance / T:10.2f} {lam:8.2f} {st.dispersion:6.3f}")

n_cond = conditioned_box_stats(outcomes, boxes[0]).n_traj_conditioned
print(f"\nconditioned trajectories: {n_cond}/{N} "
      f"(the rest jumped to the upper pointer state inside the window)")
