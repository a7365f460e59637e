"""Generic simulation engine for 1-D piecewise-deterministic Markov processes.

A model is a deterministic drift punctuated by state-dependent Poisson
channels.  Two interchangeable integrators are provided: a first-order
Bernoulli scheme (`simulate_euler`) and an event-driven sampler with no
discretization error (`simulate_exact`).  Between clicks the state follows
the no-click flow; the no-click ("survival") probability over a window is
the exponential of minus the integrated total rate along that flow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DomainError, NumericalError, StepSizeError

__all__ = [
    "PoissonChannel",
    "PdmpModel",
    "ClickEvent",
    "EventLog",
    "RngStream",
    "flow",
    "survival",
    "sample_click_time",
    "simulate_euler",
    "simulate_exact",
    "state_at",
    "max_total_rate",
]

# Relative distance (in units of domain width) at which the flow is treated
# as having reached its fixed point; beyond it the click time is exponential.
FIXED_POINT_RTOL = 1e-12
ROOT_RTOL = 1e-12
FLOW_ATOL = 1e-10


@dataclass(frozen=True)
class PoissonChannel:
    """One Poisson noise: a state-dependent intensity and a post-click map.

    `reset_to` mirrors jump_map when the map sends every state to a single
    point; engines use it to recognize resetting channels.
    """

    rate: Callable[[float], float]
    jump_map: Callable[[float], float]
    label: str
    reset_to: Optional[float] = None


@dataclass(frozen=True)
class PdmpModel:
    """Immutable description of a piecewise-deterministic Markov process.

    Parameters
    ----------
    drift : callable
        Rate of change of the state between clicks (the full deterministic
        part, compensator included).
    channels : tuple of PoissonChannel
        Ordered Poisson noises.
    domain : (lo, hi)
        Closed interval of valid scalar states.  Vector-state models use it
        for their first component.
    closed_flow, closed_survival : callable, optional
        Analytic no-click solution / no-click probability, ``(x0, dt) -> ...``.
        When absent the engine integrates numerically.
    fixed_point : float, optional
        Attractor of the no-click flow, used by the exact sampler's
        homogeneous tail phase.
    reset_state : float, optional
        The pointer state that resetting channels return to and that spiking
        ensembles start from.
    far_state : float, optional
        The opposite pointer state, used for jump detection.
    level_time : callable, optional
        ``(x0, c) -> t`` closed-form time for the flow from ``x0`` to reach
        level ``c`` (``inf`` when unreachable).
    max_rate : float, optional
        Upper bound of the total rate over the domain (Euler step rule).
    kind : str
        Constructor tag ("unitary", "thermal", ...) used for dispatch.
    params : object
        The parameter record the model was built from.
    """

    name: str
    drift: Callable
    channels: tuple
    domain: tuple
    closed_flow: Optional[Callable] = None
    closed_survival: Optional[Callable] = None
    fixed_point: Optional[float] = None
    reset_state: Optional[float] = None
    far_state: Optional[float] = None
    level_time: Optional[Callable] = None
    max_rate: Optional[float] = None
    kind: str = "custom"
    params: object = None
    aux: object = None
    state_dim: int = 1

    def total_rate(self, x):
        return sum(ch.rate(x) for ch in self.channels)


@dataclass(frozen=True)
class ClickEvent:
    time: float
    channel: str
    pre_state: object
    post_state: object


@dataclass(frozen=True)
class EventLog:
    initial_state: object
    t_end: float
    clicks: tuple
    method: str


@dataclass(frozen=True)
class RngStream:
    """Counter-based per-trajectory random stream.

    Each (master_seed, trajectory_index) pair keys an independent Philox
    counter stream, so ensembles are reproducible bit-for-bit no matter how
    trajectories are scheduled across workers.
    """

    master_seed: int
    trajectory_index: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.master_seed & 0xFFFFFFFFFFFFFFFF,
             self.trajectory_index & 0xFFFFFFFFFFFFFFFF],
            dtype=np.uint64,
        )
        return np.random.Generator(np.random.Philox(key=key))


def _check_state(model: PdmpModel, x0) -> None:
    lo, hi = model.domain
    x = x0[0] if np.ndim(x0) else x0
    pad = 1e-9 * (hi - lo)
    if x < lo - pad or x > hi + pad:
        raise DomainError(f"state {x!r} outside domain [{lo}, {hi}] of {model.name}")


def flow(model: PdmpModel, x0, dt: float):
    """No-click solution of the drift ODE after time `dt`, from `x0`."""
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    _check_state(model, x0)
    if dt == 0:
        return x0
    if model.closed_flow is not None:
        return model.closed_flow(x0, dt)
    return _flow_numeric(model, x0, dt)


def _flow_numeric(model: PdmpModel, x0, dt: float):
    y0 = np.atleast_1d(np.asarray(x0, dtype=float))
    scalar = np.ndim(x0) == 0

    def rhs(_t, y):
        return np.atleast_1d(model.drift(y[0] if scalar else y))

    sol = solve_ivp(rhs, (0.0, dt), y0, method="RK45",
                    rtol=1e-10, atol=FLOW_ATOL, dense_output=False)
    if not sol.success:
        raise NumericalError(f"flow integration failed: {sol.message}")
    yT = sol.y[:, -1]
    return float(yT[0]) if scalar else yT


def survival(model: PdmpModel, x0, dt: float) -> float:
    """Probability of no click in a window of length `dt` starting at `x0`.

    Equals exp(-integral of the total rate along the no-click flow); uses the
    model's closed form when available, otherwise integrates the augmented
    (state, cumulative hazard) system.
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    _check_state(model, x0)
    if dt == 0:
        return 1.0
    if model.closed_survival is not None:
        return float(model.closed_survival(x0, dt))
    return _survival_numeric(model, x0, dt)


def _survival_numeric(model: PdmpModel, x0, dt: float) -> float:
    scalar = np.ndim(x0) == 0
    y0 = np.append(np.atleast_1d(np.asarray(x0, dtype=float)), 0.0)

    def rhs(_t, y):
        x = y[0] if scalar else y[:-1]
        d = np.atleast_1d(model.drift(x))
        return np.append(d, model.total_rate(x))

    sol = solve_ivp(rhs, (0.0, dt), y0, method="RK45", rtol=1e-10, atol=1e-12)
    if not sol.success:
        raise NumericalError(f"hazard integration failed: {sol.message}")
    return float(np.exp(-sol.y[-1, -1]))


def _find_fixed_point(model: PdmpModel, x0: float) -> float:
    """Attractor of the no-click flow started at x0 (bisection on the drift)."""
    if model.fixed_point is not None:
        return model.fixed_point
    lo, hi = model.domain
    d0 = model.drift(x0)
    if d0 == 0:
        return x0
    a, b = (x0, hi) if d0 > 0 else (lo, x0)
    grid = np.linspace(a, b, 257)
    vals = np.array([model.drift(g) for g in grid])
    sign = np.sign(vals[0])
    for i in range(1, len(grid)):
        if vals[i] == 0:
            return float(grid[i])
        if np.sign(vals[i]) != sign:
            return float(brentq(model.drift, grid[i - 1], grid[i], xtol=1e-15))
    # No interior sign change: the flow runs into the domain boundary.
    return float(b if d0 > 0 else a)


def _transient_end(model: PdmpModel, x0: float) -> tuple:
    """Time beyond which the flow sits within FIXED_POINT_RTOL*width of its
    attractor, so the click hazard is constant there.

    Returns (t_star, survival_at_t_star, fixed_point).  t_star is found by
    bracket doubling; any time past the settling point is valid, so the
    bracket end itself is used.
    """
    lo, hi = model.domain
    fp = _find_fixed_point(model, x0)
    tol = FIXED_POINT_RTOL * (hi - lo)
    if abs(x0 - fp) <= tol:
        return 0.0, 1.0, fp
    t = 1.0 / max(model.total_rate(x0), model.total_rate(fp), 1e-12)
    for _ in range(200):
        s_star = survival(model, x0, t)
        if s_star <= 1e-20:
            # below any representable uniform draw: the bracket phase alone
            # covers every sample, no tail phase needed
            return t, s_star, fp
        if abs(flow(model, x0, t) - fp) <= tol:
            return t, s_star, fp
        t *= 2.0
    raise NumericalError(f"flow from {x0} never settles near {fp} within bracket")


_TRANSIENT_CACHE: dict = {}


def _transient_cached(model: PdmpModel, x0: float) -> tuple:
    key = (id(model), float(x0))
    hit = _TRANSIENT_CACHE.get(key)
    if hit is None:
        hit = _transient_end(model, x0)
        if len(_TRANSIENT_CACHE) > 256:
            _TRANSIENT_CACHE.clear()
        _TRANSIENT_CACHE[key] = hit
    return hit


def sample_click_time(model: PdmpModel, x0: float, u: float) -> float:
    """Invert the survival function: the dt with survival(model, x0, dt) = u.

    Two phases: bracketed bisection on the transient part of the survival
    curve, then, once the flow has settled at its fixed point, a homogeneous
    exponential tail at the fixed-point rate.  Returns ``inf`` when the
    total integrated rate stays below -log(u) forever (defective waiting
    time; the trajectory is absorbed by the flow).
    """
    if not (0.0 < u < 1.0):
        raise ValueError(f"u must be in (0, 1), got {u}")
    _check_state(model, x0)
    t_star, s_star, fp = _transient_cached(model, x0)
    if u >= s_star and t_star > 0.0:
        f = lambda t: survival(model, x0, t) - u
        t = brentq(f, 0.0, t_star, xtol=5e-324, rtol=ROOT_RTOL, maxiter=300)
        return float(t)
    rate_fp = model.total_rate(fp)
    if rate_fp <= 0.0:
        return math.inf
    return t_star + math.log(s_star / u) / rate_fp


def max_total_rate(model: PdmpModel) -> float:
    if model.max_rate is not None:
        return model.max_rate
    lo, hi = model.domain
    grid = np.linspace(lo, hi, 2001)
    return float(max(model.total_rate(g) for g in grid))


def simulate_euler(model: PdmpModel, x0, dt: float, t_end: float,
                   stream: RngStream) -> EventLog:
    """First-order scheme: x += drift(x) dt on click-free steps; on a click
    the state moves to the channel's jump target exactly.

    Each r_k is Bernoulli(rate_k(x) dt); channels are tried in order and at
    most one fires per step.  Folding the drift increment into a click step
    would hand every post-reset flow an O(dt) head start, which measurably
    inflates excursion counts at the default step size, so the jump is
    applied alone.  The step must satisfy dt * sup(total rate) <= 1
    (rejected above, warned above 0.1).
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    _check_state(model, x0)
    sup_rate = max_total_rate(model)
    if dt * sup_rate > 1.0:
        raise StepSizeError(
            f"dt*sup_rate = {dt * sup_rate:.3g} > 1; reduce dt below {1.0 / sup_rate:.3g}")
    if dt * sup_rate > 0.1:
        warnings.warn(f"dt*sup_rate = {dt * sup_rate:.3g} > 0.1; Euler bias may be visible",
                      stacklevel=2)

    rng = stream.generator()
    vector = np.ndim(x0) > 0
    x = np.array(x0, dtype=float) if vector else float(x0)
    clicks = []
    n_steps = int(round(t_end / dt))
    for i in range(n_steps):
        t = i * dt
        fired = None
        for ch in model.channels:
            p = ch.rate(x) * dt
            if p > 1.0:
                raise StepSizeError(
                    f"Bernoulli parameter {p:.3g} > 1 at state {x!r} (channel {ch.label})")
            if rng.random() < p:
                fired = ch
                break
        if fired is not None:
            pre = x.copy() if vector else x
            post = fired.jump_map(pre)
            clicks.append(ClickEvent(time=t + dt, channel=fired.label,
                                     pre_state=pre, post_state=post))
            x = post
        else:
            x = x + model.drift(x) * dt
    return EventLog(initial_state=x0, t_end=n_steps * dt,
                    clicks=tuple(clicks), method="euler")


def simulate_exact(model: PdmpModel, x0: float, t_end: float,
                   stream: RngStream) -> EventLog:
    """Event-driven loop: sample the next click time from the exact waiting
    distribution, advance the flow, apply the channel's jump map, repeat.

    For several channels the global click time is sampled from the total
    rate and the channel is then picked with probability proportional to its
    rate at the click state.  Statistically exact: no discretization error.
    """
    if model.state_dim != 1 or np.ndim(x0) != 0:
        raise ValueError("simulate_exact supports scalar-state models only")
    _check_state(model, x0)
    rng = stream.generator()
    x = float(x0)
    t = 0.0
    clicks = []
    while True:
        u = rng.random()
        while u <= 0.0:
            u = rng.random()
        w = sample_click_time(model, x, u)
        if t + w >= t_end or math.isinf(w):
            break
        t = t + w
        pre = flow(model, x, w)
        if len(model.channels) == 1:
            ch = model.channels[0]
        else:
            rates = np.array([c.rate(pre) for c in model.channels])
            tot = rates.sum()
            if tot <= 0.0:
                raise NumericalError(f"click sampled at zero-rate state {pre!r}")
            ch = model.channels[int(rng.choice(len(rates), p=rates / tot))]
        post = ch.jump_map(pre)
        clicks.append(ClickEvent(time=t, channel=ch.label, pre_state=pre, post_state=post))
        x = post
    return EventLog(initial_state=x0, t_end=t_end, clicks=tuple(clicks), method="exact")


def state_at(model: PdmpModel, log: EventLog, t: float):
    """Reconstruct the state at time t from an event log (exact method)."""
    if t < 0 or t > log.t_end:
        raise ValueError(f"t={t} outside [0, {log.t_end}]")
    x, t0 = log.initial_state, 0.0
    for ev in log.clicks:
        if ev.time > t:
            break
        x, t0 = ev.post_state, ev.time
    return flow(model, x, t - t0)
