"""How the spike statistics respond to the drive-vs-rate scaling.

With the coherent drive scaled as rate**alpha, the conditioned tip rate
per unit time shrinks with the measurement rate for alpha below 1/2,
diverges above it, and converges only on the critical line alpha = 1/2.

Run:  python demos/05_drive_scaling.py        (~2 minutes)
"""

from spikes import harness

rows = harness.sweep_alpha(
    alphas=(0.4, 0.5, 0.6), gammas=(1e4, 1e5),
    base_realizations=6000, stable_realizations=4000, target_conditioned=80,
    master_seed=99)

print(f"{'series':>18} {'gamma':>10} {'mean/t':>9} {'3sem':>7} {'n_cond':>7}")
for r in rows:
    print(f"{r.model:>18} {r.gamma:10.0f} {r.mean_per_time:9.4f} "
          f"{3 * r.sem_mean:7.4f} {r.n_conditioned:7d}")

print("\nreading: alpha=0.4 rows fall with rate, alpha=0.6 rows climb, "
      "alpha=0.5 rows converge toward 4 tan^2(1/2) = 1.19")
