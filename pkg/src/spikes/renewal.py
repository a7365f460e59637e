"""Exact fast ensemble engines.

Clicks on a resetting channel restart the state, so the click stream from
the reset state is a renewal process whose waiting-time law is known in
closed form for every analytic model here:

* quadratic-drift / affine-rate models: a two-exponential mixture (one
  branch may have zero rate, i.e. the flow escapes without ever clicking);
* the angular model: a three-term signed exponential density, sampled by
  rejection from its positive part (acceptance 1 - 16*omega/gamma);
* the abstract resetting class: a tabulated inverse of the integrated
  hazard along the flow, with an exponential tail at the fixed point.

Waiting times are drawn in vectorized chunks; rare branches (atoms, slow
escapes, second-channel clicks) are placed by geometric index draws, which
is equivalent to per-click Bernoulli branching.  The non-resetting
general-operator model is advanced click-by-click across a whole batch of
trajectories instead (`chain_outcomes`), since its post-click state depends
on the pre-click state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from .errors import ConfigurationError, NumericalError
from .models import QuadCoeffs, UnitaryCoeffs, _unitary_flow
from .pdmp import PdmpModel, RngStream
from .stats import TrajectoryOutcome

CHUNK = 8192
_TINY = 5e-324

__all__ = [
    "reset_wait_session", "window_outcomes", "passage_times",
    "chain_outcomes", "euler_outcomes", "bloch_euler_batch",
    "bloch_euler_trajectory", "tip_height_fn", "keep_band",
]


# ---------------------------------------------------------------------------
# waiting-time sessions (i.i.d. waits from the reset state)
# ---------------------------------------------------------------------------

class MixtureSession:
    """Bulk Exp(rate_bulk) waits with a rare branch at geometric indices.

    The rare branch is Exp(rate_rare), or an atom at +inf when rate_rare==0
    (no click: the flow runs off to its fixed point).
    """

    def __init__(self, rng, rate_bulk: float, p_rare: float, rate_rare: float):
        if rate_bulk <= 0:
            raise ConfigurationError("bulk click rate must be positive")
        self.rng = rng
        self.rate_bulk = rate_bulk
        self.p_rare = float(p_rare)
        self.rate_rare = rate_rare
        self.has_atoms = self.p_rare > 0 and rate_rare <= 0
        self.until_rare = int(rng.geometric(self.p_rare)) if self.p_rare > 0 else 0

    def draw(self, m: int) -> np.ndarray:
        w = self.rng.standard_exponential(m)
        w /= self.rate_bulk
        if self.p_rare > 0:
            while self.until_rare <= m:
                i = self.until_rare - 1
                if self.rate_rare > 0:
                    w[i] = self.rng.standard_exponential() / self.rate_rare
                else:
                    w[i] = np.inf
                self.until_rare += int(self.rng.geometric(self.p_rare))
            self.until_rare -= m
        return w


class RejectionSession:
    """Angular-model waits: proposals from the positive exponential pair,
    thinned by the exact density ratio.  draw(m) returns <= m samples."""

    has_atoms = False

    def __init__(self, rng, c: UnitaryCoeffs):
        self.rng = rng
        a1, a2c, a3 = c.a1, c.a2c, c.a3
        self.k1 = a1 * c.r1
        self.k2 = a2c * c.r2
        self.k3 = a3 * c.r3
        self.d31 = c.r3 - c.r1
        self.d21 = c.r2 - c.r1
        p1 = a1 / (a1 + a2c)
        self.proposals = MixtureSession(rng, rate_bulk=c.r2, p_rare=p1, rate_rare=c.r1)

    def draw(self, m: int) -> np.ndarray:
        w = self.proposals.draw(m)
        u = self.rng.random(m)
        ratio = self.k3 * np.exp(-self.d31 * w) / (self.k1 + self.k2 * np.exp(-self.d21 * w))
        return w[u >= ratio]


class TabulatedSession:
    """Waits for models without closed survival: inverse of the integrated
    hazard, tabulated once along the flow from the reset state."""

    def __init__(self, rng, law: "TabulatedWaitLaw"):
        self.rng = rng
        self.law = law
        self.has_atoms = law.tail_rate <= 0

    def draw(self, m: int) -> np.ndarray:
        z = self.rng.standard_exponential(m)
        return self.law.invert_hazard(z)


@dataclass
class TabulatedWaitLaw:
    t_grid: np.ndarray
    x_grid: np.ndarray     # flow states along the grid
    haz_grid: np.ndarray   # integrated hazard along the grid
    t_star: float
    haz_star: float
    tail_rate: float
    fixed_point: float

    @classmethod
    def build(cls, model: PdmpModel, n_grid: int = 65536):
        """Tabulate t(q) = integral dq/drift and hazard(q) = integral of
        rate/drift dq along the monotone flow from the reset state, on a
        state grid geometric from both ends (the hazard density diverges
        logarithmically at the attracting fixed point)."""
        x0 = model.reset_state
        lo, hi = model.domain
        settle = 1e-12 * (hi - lo)
        rate = model.total_rate
        drift = model.drift
        d0 = float(drift(x0))
        if d0 == 0.0:
            # pinned flow: constant hazard, no transient
            return cls(t_grid=np.array([0.0]), x_grid=np.array([x0]),
                       haz_grid=np.array([0.0]), t_star=0.0, haz_star=0.0,
                       tail_rate=float(rate(x0)), fixed_point=x0)
        from .pdmp import _find_fixed_point
        fp = _find_fixed_point(model, x0)
        span = fp - x0
        half = n_grid // 2
        # relative offsets from x0 covering (0, 1/2], then approach fp down
        # to the settling distance
        up = np.geomspace(1e-14, 0.5, half)
        down = 1.0 - np.geomspace(abs(settle / span), 0.5, half)[::-1]
        rel = np.concatenate([[0.0], up, down[1:]])
        xs = x0 + rel * span
        dr = np.asarray(drift(xs), dtype=float)
        if np.any(dr * np.sign(span) <= 0.0):
            raise NumericalError("flow from the reset state is not monotone")
        inv = 1.0 / dr
        rt = np.asarray(rate(xs), dtype=float) * inv
        dx = np.diff(xs)
        ts = np.concatenate([[0.0], np.cumsum(0.5 * dx * (inv[1:] + inv[:-1]))])
        hz = np.concatenate([[0.0], np.cumsum(0.5 * dx * (rt[1:] + rt[:-1]))])
        hz = np.maximum.accumulate(hz)
        return cls(t_grid=ts, x_grid=xs, haz_grid=hz, t_star=float(ts[-1]),
                   haz_star=float(hz[-1]), tail_rate=float(rate(fp)),
                   fixed_point=float(fp))

    def invert_hazard(self, z: np.ndarray) -> np.ndarray:
        t = np.interp(z, self.haz_grid, self.t_grid)
        if self.tail_rate > 0:
            tail = self.t_star + (z - self.haz_star) / self.tail_rate
            return np.where(z > self.haz_star, tail, t)
        return np.where(z > self.haz_star, np.inf, t)

    def flow_at(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.t_grid, self.x_grid, right=self.fixed_point)

    def survival(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        hz = np.interp(t, self.t_grid, self.haz_grid)
        tail = self.haz_star + self.tail_rate * (t - self.t_star)
        return np.exp(-np.where(t > self.t_star, tail, hz))

    def level_time(self, c: float) -> float:
        xs = self.x_grid
        increasing = xs[-1] >= xs[0]
        lo, hi = (xs[0], xs[-1]) if increasing else (xs[-1], xs[0])
        if not (lo <= c <= hi):
            return math.inf
        if increasing:
            return float(np.interp(c, xs, self.t_grid))
        return float(np.interp(-c, -xs, self.t_grid))


_TAB_CACHE: dict = {}


def tabulated_law(model: PdmpModel) -> TabulatedWaitLaw:
    law = _TAB_CACHE.get(id(model))
    if law is None:
        law = TabulatedWaitLaw.build(model)
        if len(_TAB_CACHE) > 64:
            _TAB_CACHE.clear()
        _TAB_CACHE[id(model)] = law
    return law


def reset_wait_session(model: PdmpModel, rng) -> object:
    """Waiting-time sampler for clicks out of the model's reset state."""
    kind = model.kind
    if kind == "unitary":
        return RejectionSession(rng, model.aux)
    if isinstance(model.aux, QuadCoeffs):
        qc: QuadCoeffs = model.aux
        x0 = model.reset_state
        if float(model.drift(x0)) == 0.0:
            # flow pinned at the reset state: waits are plain exponentials
            return MixtureSession(rng, rate_bulk=float(model.total_rate(x0)),
                                  p_rare=0.0, rate_rare=0.0)
        w_on_s, rate_s, rate_o = qc.mixture_weights(x0)
        w_on_s = float(w_on_s)
        if w_on_s > 0.5:  # keep the high-probability branch as the bulk
            return MixtureSession(rng, rate_bulk=rate_s, p_rare=1.0 - w_on_s,
                                  rate_rare=rate_o)
        return MixtureSession(rng, rate_bulk=rate_o, p_rare=w_on_s, rate_rare=rate_s)
    if kind in ("general_resetting", "thermal_general"):
        law = tabulated_law(model)
        if law.t_star == 0.0:
            return MixtureSession(rng, rate_bulk=law.tail_rate, p_rare=0.0, rate_rare=0.0)
        return TabulatedSession(rng, law)
    raise ConfigurationError(f"no renewal law for model kind {kind!r}")


def channel2_probability(model: PdmpModel) -> float:
    """Probability that a click from the reset spell belongs to the second
    channel; defined for models whose channel rates keep a fixed ratio
    along the flow from the reset state."""
    if len(model.channels) < 2:
        return 0.0
    x0 = model.reset_state
    if float(model.drift(x0)) == 0.0:
        # pinned flow: the rates never move off the reset state
        r1, r2 = model.channels[0].rate(x0), model.channels[1].rate(x0)
        tot = r1 + r2
        return float(r2 / tot) if tot > 0 else 0.0
    fp = model.fixed_point if model.fixed_point is not None else x0
    probe = 0.5 * (x0 + fp)
    r1, r2 = (model.channels[0].rate(probe), model.channels[1].rate(probe))
    tot = r1 + r2
    if tot <= 0:
        r1, r2 = model.channels[0].rate(x0), model.channels[1].rate(x0)
        tot = r1 + r2
        if tot <= 0:
            return 0.0
    p2 = r2 / tot
    for x in (x0 + 0.25 * (fp - x0), x0 + 0.75 * (fp - x0)):
        ra, rb = model.channels[0].rate(x), model.channels[1].rate(x)
        if ra + rb > 0 and abs(rb / (ra + rb) - p2) > 1e-9:
            raise ConfigurationError(
                f"{model.name}: channel ratio varies along the flow; "
                "the renewal engine does not apply")
    return float(p2)


def tip_height_fn(model: PdmpModel):
    """Vectorized wait -> pre-click height map from the reset state."""
    if model.kind == "unitary":
        c = model.aux
        return lambda w: _unitary_flow(c, math.pi, w)
    if isinstance(model.aux, QuadCoeffs):
        qc, x0 = model.aux, model.reset_state
        return lambda w: qc.flow(x0, w)
    law = tabulated_law(model)
    return law.flow_at


def jump_threshold_time(model: PdmpModel, eps_jump: float) -> float:
    """Flow time from reset to the jump level: the far state itself when it
    is reached in finite time, else far_state -/+ eps_jump."""
    if model.level_time is not None:
        t = model.level_time(model.reset_state, model.far_state)
        if math.isfinite(t):
            return t
        going_up = model.far_state > model.reset_state
        lvl = model.far_state - eps_jump if going_up else model.far_state + eps_jump
        return model.level_time(model.reset_state, lvl)
    law = tabulated_law(model)
    going_up = model.far_state > model.reset_state
    lvl = model.far_state - eps_jump if going_up else model.far_state + eps_jump
    return law.level_time(lvl)


def keep_band(model: PdmpModel, boxes) -> tuple:
    """(tau_keep, tip_floor, tip_ceil): retain tips whose wait is at least
    the crossing time of the box edge nearest the reset state."""
    edges = sorted({e for b in boxes for e in (b.a, b.b)})
    if not edges:
        return math.inf, -math.inf, math.inf
    going_up = model.far_state > model.reset_state
    near_edge = min(edges) if going_up else max(edges)
    if model.level_time is not None:
        tau_keep = model.level_time(model.reset_state, near_edge)
    else:
        tau_keep = tabulated_law(model).level_time(near_edge)
    if going_up:
        return tau_keep, near_edge, math.inf
    return tau_keep, -math.inf, near_edge


# ---------------------------------------------------------------------------
# fixed-reset trajectory drivers
# ---------------------------------------------------------------------------

def _traj_window(session, rng, t_end, tau_keep, tau_jump, p_ch2, stop_after_jump):
    """One renewal trajectory over (0, t_end).

    Returns (tip_times, tip_waits, first_jump_or_None).  Atoms (infinite
    waits) and second-channel clicks absorb the trajectory after producing
    the corresponding jump.
    """
    t = 0.0
    tips_t, tips_w = [], []
    jump = None
    until_ch2 = int(rng.geometric(p_ch2)) if p_ch2 > 0 else 0
    while t < t_end:
        w = session.draw(CHUNK)
        m = w.size
        if m == 0:
            continue
        limit, end_kind = m, None
        if session.has_atoms and np.isinf(w).any():
            ia = int(np.argmax(np.isinf(w)))
            limit, end_kind = ia, "atom"
        if 0 < until_ch2 <= limit:
            limit, end_kind = until_ch2 - 1, "ch2"
        wl = w[:limit]
        s_times = t + np.cumsum(wl)
        k = int(np.searchsorted(s_times, t_end, side="right"))

        n_scan = min(limit, k + 1)
        if jump is None and math.isfinite(tau_jump) and n_scan > 0:
            ws = wl[:n_scan]
            starts = s_times[:n_scan] - ws
            cand = (ws >= tau_jump) & (starts + tau_jump <= t_end)
            if cand.any():
                j = int(np.argmax(cand))
                jump = float(starts[j] + tau_jump)
        n_click = min(limit, k)
        if n_click > 0 and math.isfinite(tau_keep):
            sel = wl[:n_click] >= tau_keep
            if sel.any():
                tips_t.append(s_times[:n_click][sel])
                tips_w.append(wl[:n_click][sel])
        if stop_after_jump and jump is not None:
            break
        if k < limit:
            break  # window exhausted inside this chunk
        t_boundary = float(s_times[-1]) if limit > 0 else t

        if end_kind == "atom":
            if jump is None and math.isfinite(tau_jump) and t_boundary + tau_jump <= t_end:
                jump = t_boundary + tau_jump
            break
        if end_kind == "ch2":
            w2 = float(w[limit])
            if jump is None:
                if math.isfinite(tau_jump) and w2 >= tau_jump and t_boundary + tau_jump <= t_end:
                    jump = t_boundary + tau_jump
                elif t_boundary + w2 <= t_end:
                    jump = t_boundary + w2
            break
        t = t_boundary
        if until_ch2 > 0:
            until_ch2 -= limit
    return tips_t, tips_w, jump


def _traj_passage(session, rng, t_cap, tau_jump, p_ch2):
    """Run until the first jump.  Returns (jump_time, excess) where excess is
    the remaining wait past the threshold for flow jumps (the return time to
    the reset side), or nan for channel-2 jumps and atoms."""
    t = 0.0
    until_ch2 = int(rng.geometric(p_ch2)) if p_ch2 > 0 else 0
    while t < t_cap:
        w = session.draw(CHUNK)
        m = w.size
        if m == 0:
            continue
        limit, end_kind = m, None
        if session.has_atoms and np.isinf(w).any():
            ia = int(np.argmax(np.isinf(w)))
            limit, end_kind = ia, "atom"
        if 0 < until_ch2 <= limit:
            limit, end_kind = until_ch2 - 1, "ch2"
        wl = w[:limit]
        over = wl >= tau_jump
        if over.any():
            j = int(np.argmax(over))
            start = t + float(wl[:j].sum())
            return start + tau_jump, float(wl[j] - tau_jump)
        t += float(wl.sum())
        if end_kind == "atom":
            return t + tau_jump, math.nan
        if end_kind == "ch2":
            w2 = float(w[limit])
            if w2 >= tau_jump:
                return t + tau_jump, math.nan
            return t + w2, math.nan
        if until_ch2 > 0:
            until_ch2 -= limit
    raise NumericalError(f"no jump before the cap t={t_cap:g}")


def _require_resetting(model: PdmpModel) -> None:
    ch = model.channels[0]
    if ch.reset_to is None or ch.reset_to != model.reset_state:
        raise ConfigurationError(
            f"{model.name}: first channel does not reset to the start state; "
            "use the chain engine instead")
    if len(model.channels) > 1 and channel2_probability(model) > 0:
        ch2 = model.channels[1]
        if ch2.reset_to is None or ch2.reset_to != model.far_state:
            raise ConfigurationError(
                f"{model.name}: second channel is not a jump to the far state")


def window_outcomes(model: PdmpModel, boxes, t_end: float, n_traj: int,
                    master_seed: int, eps_jump: float = 1e-2,
                    index_offset: int = 0,
                    stop_after_jump: Optional[bool] = None) -> list:
    """Renewal-engine ensemble: TrajectoryOutcome per trajectory index.

    Statistically identical to `simulate_exact` + tip/jump extraction, at a
    fraction of the cost.  Trajectory `i` uses the (master_seed, i) stream,
    so results do not depend on how indices are batched.
    """
    boxes = list(boxes)
    _require_resetting(model)
    tau_keep, floor, ceil = keep_band(model, boxes)
    tau_jump = jump_threshold_time(model, eps_jump)
    p_ch2 = channel2_probability(model)
    if stop_after_jump is None:
        stop_after_jump = all(b.t0 == 0.0 for b in boxes) and bool(boxes)
    height = tip_height_fn(model)

    outcomes = []
    all_waits = []
    for i in range(n_traj):
        rng = RngStream(master_seed, index_offset + i).generator()
        session = reset_wait_session(model, rng)
        tt, tw, jump = _traj_window(session, rng, t_end, tau_keep, tau_jump,
                                    p_ch2, stop_after_jump)
        times = np.concatenate(tt) if tt else np.empty(0)
        waits = np.concatenate(tw) if tw else np.empty(0)
        outcomes.append(TrajectoryOutcome(tip_times=times, tip_heights=waits,
                                          jump_time=jump, tip_floor=floor,
                                          tip_ceil=ceil))
        all_waits.append(waits)
    if all_waits:
        flat = np.concatenate(all_waits)
        if flat.size:
            heights = np.asarray(height(flat), dtype=float)
            pos = 0
            for oc in outcomes:
                n = oc.tip_heights.size
                oc.tip_heights = heights[pos:pos + n]
                pos += n
    return outcomes


def passage_times(model: PdmpModel, n_passages: int, master_seed: int,
                  eps_jump: float = 1e-2, t_cap: float = math.inf,
                  index_offset: int = 0):
    """First-passage times to the far pointer state over fresh trajectories,
    plus the return times (excess waits) where defined."""
    _require_resetting(model)
    tau_jump = jump_threshold_time(model, eps_jump)
    p_ch2 = channel2_probability(model)
    jumps = np.empty(n_passages)
    excess = np.empty(n_passages)
    for i in range(n_passages):
        rng = RngStream(master_seed, index_offset + i).generator()
        session = reset_wait_session(model, rng)
        jumps[i], excess[i] = _traj_passage(session, rng, t_cap, tau_jump, p_ch2)
    return jumps, excess[np.isfinite(excess)]


# ---------------------------------------------------------------------------
# batched chain driver for the non-resetting general-operator model
# ---------------------------------------------------------------------------

def chain_outcomes(model: PdmpModel, boxes, t_end: float, n_traj: int,
                   master_seed: int, eps_jump: float = 1e-2,
                   stream_key: int = 0, upper_barrier: float = 0.98,
                   upper_tip_level: float = 0.9):
    """Click-by-click batch simulation of the multiplicative-jump model.

    Tips are excursion maxima: the largest pre-click state between
    successive returns below a separation barrier.  Near the lower pointer
    state the state is very nearly a martingale, so an excursion below a
    barrier q_low recovers to height a with probability ~ q_low/a; the
    barrier therefore sits at the geometric mean of the additive-drift
    scale (where the bath term beats the multiplicative noise) and the
    smallest box edge, which sends the double-count rate to zero as the
    measurement rate grows.  Down-excursions from the upper pointer state
    are tallied (count of recoveries from below `upper_tip_level`) to
    witness two-sided spiking.

    Returns (outcomes, n_upper_tips).
    """
    qc: QuadCoeffs = model.aux
    if qc is None or qc.p_exp != 1.0:
        raise ConfigurationError("chain engine needs the two-exponential wait law")
    m_p = abs(model.params.n_plus) ** 2
    m_m = abs(model.params.n_minus) ** 2
    s, o, big_r = qc.s, qc.o, qc.decay
    rate_s = qc.c0 + qc.c1 * s
    rate_o = qc.c0 + qc.c1 * o
    inv_so = 1.0 / (s - o)
    lvl = 1.0 - eps_jump if model.far_state > model.reset_state else eps_jump
    # crossing time from q to lvl: (log v0 - log vl) / R, v = (s-q)/(q-o)
    log_vl = math.log((s - lvl) / (lvl - o)) if o < lvl < s else None

    floor = min((b.a for b in boxes), default=math.inf)
    if math.isfinite(floor):
        # The state is near-martingale above the additive-drift scale q_eq,
        # so an excursion dipping to the barrier recovers to height a with
        # probability ~ q_low/a (double count), while a barrier at the q_eq
        # scale merges distinct excursions.  A fixed small multiple of q_eq
        # keeps both errors far below sampling noise at large rates.
        growth_slope = abs(qc.a1)
        q_eq = abs(qc.a0) / max(growth_slope, 1e-300)
        q_low = min(15.0 * q_eq, 0.25 * floor)
    else:
        q_low = 0.0

    rng = np.random.Generator(np.random.Philox(
        key=np.array([master_seed & 0xFFFFFFFFFFFFFFFF,
                      (1 << 48) + stream_key], dtype=np.uint64)))
    n = n_traj
    q = np.full(n, float(model.reset_state))
    t = np.zeros(n)
    active = np.ones(n, dtype=bool)
    jump = np.full(n, np.nan)
    exc_max = np.zeros(n)
    exc_max_t = np.zeros(n)
    up_min = np.full(n, np.inf)   # deepest dip since arming in the upper region
    armed = np.zeros(n, dtype=bool)
    n_upper = 0
    tips_idx, tips_t, tips_h = [], [], []

    def flush(mask):
        emit = mask & (exc_max > floor) & (exc_max_t <= t_end)
        if emit.any():
            idx = np.flatnonzero(emit)
            tips_idx.append(idx.copy())
            tips_t.append(exc_max_t[idx].copy())
            tips_h.append(exc_max[idx].copy())
        exc_max[mask] = 0.0

    while active.any():
        u = rng.random(n)
        w_on_s = (q - o) * inv_so
        rare = u < w_on_s
        v = np.where(rare, u / np.maximum(w_on_s, _TINY),
                     (u - w_on_s) / np.maximum(1.0 - w_on_s, _TINY))
        wt = -np.log(np.maximum(v, _TINY))
        wt *= np.where(rare, 1.0 / rate_s if rate_s > 0 else np.inf, 1.0 / rate_o)

        e = np.exp(-big_r * wt)
        den = (q - o) + (s - q) * e
        pre = s - (s - o) * (s - q) * e / den

        if log_vl is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                t_cross = (np.log((s - q) / (q - o)) - log_vl) / big_r
            t_cross = np.maximum(t_cross, 0.0)
            hit = active & np.isnan(jump) & (wt >= t_cross) & (t + t_cross <= t_end)
            if hit.any():
                jump[hit] = t[hit] + t_cross[hit]

        in_window = active & (t + wt <= t_end)
        better = in_window & (pre > exc_max)
        exc_max = np.where(better, pre, exc_max)
        exc_max_t = np.where(better, t + wt, exc_max_t)

        den_j = (m_p - m_m) * pre + m_m
        post = np.where(den_j > 0, m_p * pre / np.maximum(den_j, _TINY), pre)

        down = in_window & (post < q_low) & (exc_max > 0)
        if down.any():
            flush(down)
        # down-excursions from the upper pointer region: armed on entry, a
        # recovery above the barrier emits one upper-side tip if deep enough
        up_min = np.where(armed & in_window, np.minimum(up_min, post), up_min)
        recovered = armed & in_window & (post >= upper_barrier) & (up_min <= upper_tip_level)
        if recovered.any():
            n_upper += int(np.count_nonzero(recovered))
            up_min[recovered] = np.inf
        armed = armed | (in_window & (post >= upper_barrier))
        left_upper = armed & (post < q_low)
        if left_upper.any():
            armed &= ~left_upper
            up_min[left_upper] = np.inf

        t = np.where(active, t + wt, t)
        q = np.where(active, post, q)
        done = active & (t >= t_end)
        if done.any():
            flush(done)
            active &= ~done

    # assemble per-trajectory outcomes
    if tips_idx:
        idx = np.concatenate(tips_idx)
        tt = np.concatenate(tips_t)
        hh = np.concatenate(tips_h)
        order = np.lexsort((tt, idx))
        idx, tt, hh = idx[order], tt[order], hh[order]
        counts = np.bincount(idx, minlength=n)
        splits = np.cumsum(counts)[:-1]
        t_parts = np.split(tt, splits)
        h_parts = np.split(hh, splits)
    else:
        t_parts = [np.empty(0)] * n
        h_parts = [np.empty(0)] * n
    outcomes = [
        TrajectoryOutcome(tip_times=t_parts[i], tip_heights=h_parts[i],
                          jump_time=None if math.isnan(jump[i]) else float(jump[i]),
                          tip_floor=floor, tip_ceil=math.inf)
        for i in range(n)
    ]
    return outcomes, n_upper


# ---------------------------------------------------------------------------
# vectorized first-order (Euler) ensembles
# ---------------------------------------------------------------------------

def euler_outcomes(model: PdmpModel, boxes, dt: float, t_end: float,
                   n_traj: int, master_seed: int, eps_jump: float = 1e-2,
                   stream_key: int = 0) -> list:
    """Bernoulli-step ensemble for scalar-state models, vectorized across
    trajectories.  Tips are pre-click states of the first (resetting)
    channel inside the keep band; jumps are grid crossings of the far
    threshold (or second-channel clicks)."""
    _, floor, ceil = keep_band(model, boxes)
    going_up = model.far_state > model.reset_state
    if model.level_time is not None and math.isfinite(
            model.level_time(model.reset_state, model.far_state)):
        threshold = model.far_state
    else:
        threshold = model.far_state - eps_jump if going_up else model.far_state + eps_jump

    rng = np.random.Generator(np.random.Philox(
        key=np.array([master_seed & 0xFFFFFFFFFFFFFFFF,
                      (1 << 49) + stream_key], dtype=np.uint64)))
    n = n_traj
    x = np.full(n, float(model.reset_state))
    jump = np.full(n, np.nan)
    tips_idx, tips_t, tips_h = [], [], []
    n_steps = int(round(t_end / dt))
    jump_maps = [ch.jump_map for ch in model.channels]
    rates = [ch.rate for ch in model.channels]

    for step in range(n_steps):
        t_now = step * dt
        fired_any = np.zeros(n, dtype=bool)
        x_new = x + model.drift(x) * dt
        for ci, (rate, jmap) in enumerate(zip(rates, jump_maps)):
            p = rate(x) * dt
            u = rng.random(n)
            fire = (~fired_any) & (u < p)
            if fire.any():
                mapped = jmap(x)  # vectorized jump target; clicks omit the drift increment
                x_new = np.where(fire, mapped, x_new)
                if ci == 0:
                    keep = fire & (x >= floor) & (x <= ceil)
                    if keep.any():
                        idx = np.flatnonzero(keep)
                        tips_idx.append(idx)
                        tips_t.append(np.full(idx.size, t_now + dt))
                        tips_h.append(x[idx].copy())
                else:
                    newly = fire & np.isnan(jump)
                    jump[newly] = t_now + dt
                fired_any |= fire
        x = x_new
        crossed = np.isnan(jump) & ((x >= threshold) if going_up else (x <= threshold))
        if crossed.any():
            jump[crossed] = t_now + dt

    if tips_idx:
        idx = np.concatenate(tips_idx)
        tt = np.concatenate(tips_t)
        hh = np.concatenate(tips_h)
        order = np.lexsort((tt, idx))
        idx, tt, hh = idx[order], tt[order], hh[order]
        counts = np.bincount(idx, minlength=n)
        splits = np.cumsum(counts)[:-1]
        t_parts = np.split(tt, splits)
        h_parts = np.split(hh, splits)
    else:
        t_parts = [np.empty(0)] * n
        h_parts = [np.empty(0)] * n
    return [
        TrajectoryOutcome(tip_times=t_parts[i], tip_heights=h_parts[i],
                          jump_time=None if math.isnan(jump[i]) else float(jump[i]),
                          tip_floor=floor, tip_ceil=ceil)
        for i in range(n)
    ]


def bloch_euler_batch(params, n_traj: int, dt: float, t_end: float,
                      master_seed: int, record_every: int = 0):
    """Batched Euler integration of the three-component state (q, Re u, Im u).

    Returns (q_final, max_purity_excess, checkpoints) where checkpoints is a
    list of (t, mean_q) when record_every > 0.
    """
    k = math.sqrt(params.omega * params.gamma)
    gamma, eta = params.gamma, params.eta
    rng = np.random.Generator(np.random.Philox(
        key=np.array([master_seed & 0xFFFFFFFFFFFFFFFF, 1 << 50], dtype=np.uint64)))
    n = n_traj
    q = np.zeros(n)
    xx = np.zeros(n)
    yy = np.zeros(n)
    max_excess = 0.0
    checkpoints = []
    n_steps = int(round(t_end / dt))
    for step in range(n_steps):
        p = gamma * eta * (1.0 - q) * dt
        fire = rng.random(n) < p
        gq = gamma * eta * (1.0 - q)
        dq = (2.0 * k * yy + q * gq) * dt
        dx = (-0.5 * gamma + gq) * xx * dt
        dy = (-k * (2.0 * q - 1.0) + (-0.5 * gamma + gq) * yy) * dt
        q = np.where(fire, 0.0, q + dq)
        xx = np.where(fire, 0.0, xx + dx)
        yy = np.where(fire, 0.0, yy + dy)
        r2 = (2.0 * q - 1.0) ** 2 + 4.0 * (xx * xx + yy * yy)
        max_excess = max(max_excess, float(r2.max()) - 1.0)
        if record_every and (step + 1) % record_every == 0:
            checkpoints.append(((step + 1) * dt, float(q.mean())))
    return q, max_excess, checkpoints


def bloch_euler_trajectory(params, dt: float, t_end: float, master_seed: int,
                           stride: int = 100):
    """Single three-component trajectory, subsampled every `stride` steps.
    Returns (times, q_values)."""
    k = math.sqrt(params.omega * params.gamma)
    gamma, eta = params.gamma, params.eta
    rng = RngStream(master_seed, 0).generator()
    q = x = y = 0.0
    n_steps = int(round(t_end / dt))
    times, qs = [], []
    buf = np.empty(0)
    pos = 0
    for step in range(n_steps):
        if pos >= buf.size:
            buf = rng.random(65536)
            pos = 0
        u = buf[pos]
        pos += 1
        gq = gamma * eta * (1.0 - q)
        if u < gq * dt:
            q = x = y = 0.0
        else:
            q += (2.0 * k * y + q * gq) * dt
            x += (-0.5 * gamma + gq) * x * dt
            y += (-k * (2.0 * q - 1.0) + (-0.5 * gamma + gq) * y) * dt
        if (step + 1) % stride == 0:
            times.append((step + 1) * dt)
            qs.append(q)
    return np.asarray(times), np.asarray(qs)
