"""Observables over simulated trajectories: excursion tips, jump detection,
conditioned space-time box counts, first-passage laws, and the limiting
jump-plus-marked-Poisson process used for cross-validation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats as sps
from scipy.integrate import quad

from .errors import StatisticsError
from .pdmp import EventLog, PdmpModel

__all__ = [
    "SpaceTimeBox", "TrajectoryOutcome", "CountStats", "LimitSample",
    "extract_prespikes", "detect_jump", "outcome_from_log",
    "conditioned_box_stats", "first_passage_stats",
    "sample_limit_spike_process",
]


@dataclass(frozen=True)
class SpaceTimeBox:
    """Counting window (t0, t1) x (a, b); open intervals on all edges."""
    t0: float
    t1: float
    a: float
    b: float

    def __post_init__(self):
        if not self.t0 < self.t1:
            raise ValueError(f"need t0 < t1, got ({self.t0}, {self.t1})")
        if not self.a < self.b:
            raise ValueError(f"need a < b, got ({self.a}, {self.b})")

    @property
    def duration(self):
        return self.t1 - self.t0


@dataclass
class TrajectoryOutcome:
    """Tips (time, height) of one trajectory plus its first jump time.

    `tip_floor`/`tip_ceil` record which tips were retained by the producing
    engine; boxes must lie inside the retained band.
    """
    tip_times: np.ndarray
    tip_heights: np.ndarray
    jump_time: Optional[float] = None
    tip_floor: float = -math.inf
    tip_ceil: float = math.inf


@dataclass(frozen=True)
class CountStats:
    """Conditioned per-trajectory box-count moments with standard errors."""
    n_traj_total: int
    n_traj_conditioned: int
    mean: float
    variance: float
    sem_mean: float
    sem_variance: float
    dispersion: float
    sem_dispersion: float


def extract_prespikes(log: EventLog, reset_channel: str = "N1"):
    """(time, pre-click state) of every click on the resetting channel."""
    labels = {ev.channel for ev in log.clicks}
    if log.clicks and reset_channel not in labels:
        raise ValueError(f"channel {reset_channel!r} not present (saw {sorted(labels)})")
    return [(ev.time, ev.pre_state) for ev in log.clicks if ev.channel == reset_channel]


def _segment_jump_time(model: PdmpModel, start_state, start_time, duration, threshold):
    """Jump time inside one no-click segment, or None.

    The flow from `start_state` crosses `threshold` (toward the far pointer
    state) after `level_time`; a jump happened if that fits in the segment.
    """
    if model.level_time is not None:
        t_cross = model.level_time(start_state, threshold)
    else:
        from .models import time_to_level  # bisection fallback, reset-state only
        from .errors import DomainError
        if start_state == model.reset_state:
            try:
                t_cross = time_to_level(model, threshold)
            except DomainError:
                return None
        else:
            return None
    # already past the threshold: the segment starts in the far basin
    going_up = model.far_state > model.reset_state
    if (going_up and start_state >= threshold) or (not going_up and start_state <= threshold):
        return start_time
    if t_cross <= duration:
        return start_time + t_cross
    return None


def detect_jump(log: EventLog, model: PdmpModel, eps_jump: float = 1e-2):
    """First time a no-click segment's flow reaches the far pointer state.

    For flows that hit the far state in finite time the exact crossing is
    used; for flows that only asymptote, the level is far_state -/+ eps_jump.
    Returns None when no segment is long enough.
    """
    if eps_jump <= 0:
        raise ValueError("eps_jump must be > 0")
    if model.far_state is None or model.reset_state is None:
        raise ValueError(f"{model.name} does not define pointer states")
    going_up = model.far_state > model.reset_state
    finite_cross = (model.level_time is not None
                    and math.isfinite(model.level_time(model.reset_state, model.far_state)))
    threshold = model.far_state if finite_cross else (
        model.far_state - eps_jump if going_up else model.far_state + eps_jump)

    segs = []
    state, t0 = log.initial_state, 0.0
    for ev in log.clicks:
        segs.append((state, t0, ev.time - t0))
        state, t0 = ev.post_state, ev.time
    segs.append((state, t0, log.t_end - t0))

    for state, start, dur in segs:
        jt = _segment_jump_time(model, state, start, dur, threshold)
        if jt is not None and jt <= log.t_end:
            return jt
    return None


def outcome_from_log(log: EventLog, model: PdmpModel, reset_channel: str = "N1",
                     eps_jump: float = 1e-2) -> TrajectoryOutcome:
    tips = extract_prespikes(log, reset_channel)
    times = np.array([t for t, _ in tips], dtype=float)
    heights = np.array([h for _, h in tips], dtype=float)
    return TrajectoryOutcome(tip_times=times, tip_heights=heights,
                             jump_time=detect_jump(log, model, eps_jump))


def _box_counts(outcomes: Sequence[TrajectoryOutcome], box: SpaceTimeBox):
    counts = np.empty(len(outcomes), dtype=np.int64)
    conditioned = np.empty(len(outcomes), dtype=bool)
    for i, oc in enumerate(outcomes):
        if box.a < oc.tip_floor or box.b > oc.tip_ceil:
            raise ValueError(
                f"box ({box.a}, {box.b}) outside the retained tip band "
                f"[{oc.tip_floor}, {oc.tip_ceil}]")
        m = ((oc.tip_times > box.t0) & (oc.tip_times < box.t1)
             & (oc.tip_heights > box.a) & (oc.tip_heights < box.b))
        counts[i] = int(np.count_nonzero(m))
        jt = oc.jump_time
        conditioned[i] = jt is None or not (box.t0 < jt < box.t1)
    return counts, conditioned


def moment_stats(sample: np.ndarray, n_total: int) -> CountStats:
    """Ensemble moments with standard errors.

    sem(mean) is the usual s/sqrt(n); sem(variance) comes from the fourth
    central moment, Var(s^2) = (m4 - s^4 (n-3)/(n-1)) / n; the dispersion
    error follows by the delta method including the mean-variance covariance
    m3/n.
    """
    n = sample.size
    if n < 2:
        raise StatisticsError(f"need at least 2 conditioned trajectories, got {n}")
    x = sample.astype(float)
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    d = x - mean
    m2 = float(np.mean(d * d))
    m3 = float(np.mean(d ** 3))
    m4 = float(np.mean(d ** 4))
    var_of_mean = var / n
    var_of_var = max(0.0, (m4 - var * var * (n - 3) / (n - 1)) / n)
    sem_mean = math.sqrt(var_of_mean)
    sem_var = math.sqrt(var_of_var)
    if mean > 0:
        disp = var / mean
        var_disp = (var_of_var / mean ** 2
                    + var ** 2 * var_of_mean / mean ** 4
                    - 2.0 * var * (m3 / n) / mean ** 3)
        sem_disp = math.sqrt(max(0.0, var_disp))
    else:
        disp = math.nan
        sem_disp = math.nan
    return CountStats(n_traj_total=n_total, n_traj_conditioned=n,
                      mean=mean, variance=var, sem_mean=sem_mean,
                      sem_variance=sem_var, dispersion=disp,
                      sem_dispersion=sem_disp)


def conditioned_box_stats(outcomes: Sequence[TrajectoryOutcome],
                          box: SpaceTimeBox) -> CountStats:
    """Per-trajectory tip counts in the box, restricted to trajectories whose
    first jump does not fall inside (t0, t1)."""
    counts, conditioned = _box_counts(outcomes, box)
    kept = counts[conditioned]
    if kept.size == 0:
        raise StatisticsError(
            "no trajectory survives the no-jump conditioning; increase the "
            "number of realizations or shrink the time window")
    return moment_stats(kept, n_total=len(outcomes))


def first_passage_stats(jump_times: Iterable[float]):
    """Mean passage time, its standard error, and a Kolmogorov-Smirnov
    p-value against an exponential law with the empirical mean."""
    t = np.asarray([x for x in jump_times if x is not None and math.isfinite(x)], dtype=float)
    if t.size < 100:
        raise StatisticsError(f"need at least 100 passages, got {t.size}")
    mean = float(t.mean())
    sem = float(t.std(ddof=1) / math.sqrt(t.size))
    ks = sps.kstest(t, "expon", args=(0.0, mean))
    return {"mean_jump_time": mean, "sem": sem,
            "exp_fit_pvalue": float(ks.pvalue), "n": int(t.size)}


@dataclass
class LimitSample:
    """A draw of the limiting process: the two-state jump chain plus the
    spike marks decorating each dwell interval."""
    jump_times: np.ndarray      # chain switch times
    initial_state: int
    spike_times: np.ndarray
    spike_heights: np.ndarray
    spike_sides: np.ndarray     # 0 = spikes from the lower state, 1 = from the upper

    def box_count(self, box: SpaceTimeBox, side: int = 0) -> int:
        m = ((self.spike_times > box.t0) & (self.spike_times < box.t1)
             & (self.spike_heights > box.a) & (self.spike_heights < box.b)
             & (self.spike_sides == side))
        return int(np.count_nonzero(m))


def _sample_heights(intensity, lo, hi, n, rng, grid_pts=4096):
    """Draw heights with density proportional to `intensity` on (lo, hi) via
    a tabulated inverse CDF.  The grid is geometric from both endpoints so
    inverse-square peaks at either edge stay resolved."""
    half = grid_pts // 2
    width = hi - lo
    left = lo + width * np.geomspace(1e-9, 0.5, half)
    right = hi - width * np.geomspace(1e-9, 0.5, half)[::-1]
    xs = np.concatenate([[lo], left, right, [hi]])
    xs = np.unique(xs)
    dens = np.asarray([max(float(intensity(x)), 0.0) for x in xs])
    cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) * 0.5 * np.diff(xs))])
    if cdf[-1] <= 0:
        raise ValueError("intensity vanishes on the requested band")
    cdf /= cdf[-1]
    u = rng.random(n)
    return np.interp(u, cdf, xs)


def sample_limit_spike_process(jump_rate_01: float, jump_rate_10: float,
                               intensity0, intensity1, t_end: float,
                               stream, a_min: float = 1e-3,
                               initial_state: int = 0) -> LimitSample:
    """Simulate the limiting graph: a two-state Markov chain with the given
    switching rates, decorated during each dwell with a Poisson number of
    spikes whose heights follow the side's intensity truncated at a_min
    (the raw 1/x^2 laws are not integrable at the pointer states).
    """
    if not a_min > 0:
        raise ValueError("a_min must be > 0: the spike intensity is not "
                         "integrable down to the pointer state")
    rng = stream.generator() if hasattr(stream, "generator") else stream
    lam0, _ = quad(lambda x: intensity0(x), a_min, 1.0) if intensity0 else (0.0, 0.0)
    lam1, _ = quad(lambda x: intensity1(x), 0.0, 1.0 - a_min) if intensity1 else (0.0, 0.0)

    switches = []
    st, t = initial_state, 0.0
    spikes_t, spikes_h, spikes_side = [], [], []
    while t < t_end:
        rate = jump_rate_01 if st == 0 else jump_rate_10
        dwell = rng.exponential(1.0 / rate) if rate > 0 else math.inf
        seg_end = min(t + dwell, t_end)
        lam = lam0 if st == 0 else lam1
        if lam > 0:
            n = rng.poisson(lam * (seg_end - t))
            if n:
                times = np.sort(rng.uniform(t, seg_end, size=n))
                if st == 0:
                    h = _sample_heights(intensity0, a_min, 1.0, n, rng)
                else:
                    h = _sample_heights(intensity1, 0.0, 1.0 - a_min, n, rng)
                spikes_t.append(times)
                spikes_h.append(h)
                spikes_side.append(np.full(n, st, dtype=np.int8))
        t = t + dwell
        if t < t_end:
            switches.append(t)
            st = 1 - st
    cat = (lambda parts, dt: np.concatenate(parts) if parts else np.empty(0, dtype=dt))
    return LimitSample(
        jump_times=np.asarray(switches, dtype=float),
        initial_state=initial_state,
        spike_times=cat(spikes_t, float),
        spike_heights=cat(spikes_h, float),
        spike_sides=cat(spikes_side, np.int8),
    )
