"""Sampling the limiting object directly: a two-state jump chain decorated
with a Poisson field of spikes whose heights follow the inverse-square
intensity, compared against a finite-rate simulation of the same box
counts.

Run:  python demos/04_limit_process.py        (~1 minute)
"""

import numpy as np

from spikes import (RngStream, SpaceTimeBox, ThermalParams, collapse_thermal,
                    conditioned_box_stats, sample_limit_spike_process)
from spikes.oracle import IntensitySpec, intensity_density
from spikes.renewal import window_outcomes
from scipy import stats as sps

BOX = SpaceTimeBox(0.0, 0.1, 0.01, 0.1)
W_UP, W_DOWN = 0.77, 0.23

spec = IntensitySpec("thermal", W_UP)
limit = sample_limit_spike_process(
    jump_rate_01=W_UP, jump_rate_10=W_DOWN,
    intensity0=lambda x: intensity_density(spec, x), intensity1=None,
    t_end=4000.0, stream=RngStream(31), a_min=1e-3)
print(f"limit sample: {limit.spike_times.size} spikes, "
      f"{limit.jump_times.size} chain switches over 4000 time units")

# counts in disjoint windows of the lower-state dwell before the first switch
first_switch = limit.jump_times[0] if limit.jump_times.size else 4000.0
edges = np.arange(0.0, first_switch, 0.1)
sel = (limit.spike_heights > BOX.a) & (limit.spike_heights < BOX.b) \
    & (limit.spike_times < first_switch)
counts_limit = np.histogram(limit.spike_times[sel], bins=edges)[0]

model = collapse_thermal(ThermalParams(W_UP, W_DOWN, 1e6))
outcomes = window_outcomes(model, [BOX], 0.1, 3000, master_seed=17)
counts_sim = []
for oc in outcomes:
    if oc.jump_time is not None and BOX.t0 < oc.jump_time < BOX.t1:
        continue
    m = ((oc.tip_times > BOX.t0) & (oc.tip_times < BOX.t1)
         & (oc.tip_heights > BOX.a) & (oc.tip_heights < BOX.b))
    counts_sim.append(int(m.sum()))
counts_sim = np.asarray(counts_sim)

lam = W_UP * (1 / BOX.a - 1 / BOX.b) * BOX.duration
print(f"box {BOX}: predicted mean {lam:.3f}")
print(f"  limit-process windows: mean {counts_limit.mean():.3f} (n={counts_limit.size})")
print(f"  finite-rate ensemble:  mean {counts_sim.mean():.3f} (n={counts_sim.size})")
ks = sps.ks_2samp(counts_limit, counts_sim)
print(f"  two-sample KS: D={ks.statistic:.4f}, p={ks.pvalue:.3f}")
