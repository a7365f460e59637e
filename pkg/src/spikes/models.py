"""Constructors for the concrete resetting PDMPs.

Three analytic families share machinery:

* the angular model (unitary drive vs. strong rank-one measurement), whose
  no-click flow is a Riccati equation in tan(theta/2) solved by hyperbolic
  functions;
* a quadratic-drift / affine-rate family (thermal bath, second measurement,
  and the general diagonal-operator variant), whose no-click flow is
  logistic and whose no-click probability is an explicit power of the
  logistic denominator;
* the abstract resetting class q' = F(q) + G(q)(dN - gamma H(q) dt) with
  G = -q and H = (1-q) chi(q), handled numerically.

All closed forms are written in overflow-safe (max-factored exponential)
form so they remain valid for rates up to ~1e9.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigurationError, DomainError
from .pdmp import PdmpModel, PoissonChannel, flow as pdmp_flow

__all__ = [
    "UnitaryParams", "ThermalParams", "MeasurementParams", "GeneralParams",
    "UnitaryCoeffs", "QuadCoeffs", "Resetting",
    "collapse_unitary", "collapse_unitary_bloch_full",
    "collapse_thermal", "collapse_thermal_general",
    "collapse_measurement", "collapse_measurement_general",
    "general_resetting", "classify_resetting", "time_to_level",
    "unitary_drift",
]


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnitaryParams:
    """Rabi scale, measurement rate and detector efficiency."""
    omega: float
    gamma: float
    eta: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ConfigurationError(f"omega must be > 0, got {self.omega}")
        if not self.gamma > 16.0 * self.omega:
            raise ConfigurationError(
                f"gamma must exceed 16*omega = {16 * self.omega} for a real "
                f"hyperbolic parameter, got {self.gamma}")
        if not 0.0 < self.eta <= 1.0:
            raise ConfigurationError(f"eta must be in (0, 1], got {self.eta}")


@dataclass(frozen=True)
class ThermalParams:
    """Bath transition rates, measurement rate/efficiency and the diagonal
    measurement-operator entries (resetting variant: n_plus=0, n_minus=1)."""
    w_minus_plus: float
    w_plus_minus: float
    gamma: float
    eta: float = 1.0
    n_plus: complex = 0.0
    n_minus: complex = 1.0

    def __post_init__(self):
        if self.w_minus_plus < 0 or self.w_plus_minus < 0:
            raise ConfigurationError("bath rates must be >= 0")
        if self.w_minus_plus == 0 and self.w_plus_minus == 0:
            raise ConfigurationError("bath rates must not both vanish")
        if not self.gamma * self.eta > 0:
            raise ConfigurationError("gamma*eta must be > 0 for the measured case")
        if abs(self.n_plus) == 0 and abs(self.n_minus) == 0:
            raise ConfigurationError("measurement operator must be nonzero")


@dataclass(frozen=True)
class MeasurementParams:
    """Two competing measurements; (n_a, n_b) are the off-diagonal entries of
    the second operator (spontaneous-emission variant: n_a=1, n_b=0)."""
    gamma1: float
    eta1: float
    gamma2: float
    eta2: float
    n_a: complex = 1.0
    n_b: complex = 0.0

    def __post_init__(self):
        if not self.gamma1 > 0:
            raise ConfigurationError("gamma1 must be > 0")
        if not 0.0 < self.eta1 <= 1.0:
            raise ConfigurationError("eta1 must be in (0, 1]")
        if self.gamma2 < 0:
            raise ConfigurationError("gamma2 must be >= 0")
        if not 0.0 <= self.eta2 <= 1.0:
            raise ConfigurationError("eta2 must be in [0, 1]")
        if abs(self.n_a) == 0 and abs(self.n_b) == 0:
            raise ConfigurationError("n_a and n_b must not both vanish")


@dataclass(frozen=True)
class GeneralParams:
    """Abstract resetting model: drift F, rate shape chi (H = (1-q) chi),
    noise strength gamma.  F and chi must accept numpy arrays."""
    drift: Callable
    chi: Callable
    gamma: float
    label: str = "general"

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigurationError("gamma must be > 0")
        f0 = float(self.drift(0.0))
        f1 = float(self.drift(1.0))
        if f0 < 0:
            raise ConfigurationError(f"hypothesis F(0) >= 0 violated: F(0) = {f0}")
        if f1 > 0:
            raise ConfigurationError(f"hypothesis F(1) <= 0 violated: F(1) = {f1}")
        grid = np.linspace(0.0, 1.0, 101)
        chi_vals = np.asarray(self.chi(grid), dtype=float)
        if not np.all(np.isfinite(chi_vals)):
            raise ConfigurationError("chi must be finite on [0, 1]")
        if np.any(chi_vals < 0):
            raise ConfigurationError("chi must be >= 0 on [0, 1] (rates are intensities)")


# ---------------------------------------------------------------------------
# angular model: hyperbolic closed forms
# ---------------------------------------------------------------------------

def _logsinh(y):
    """log(sinh(y)) for y >= 0, overflow-safe; -inf at 0."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        small = np.log(np.sinh(np.minimum(y, 20.0)))
    return np.where(y > 20.0, y - math.log(2.0) + np.log1p(-np.exp(-2.0 * np.maximum(y, 1.0))), small)


def _sinh_ratio(num_arg, den_arg):
    """sinh(num_arg)/sinh(den_arg) for den_arg > 0, overflow-safe."""
    num_arg = np.asarray(num_arg, dtype=float)
    s = np.sign(num_arg)
    with np.errstate(invalid="ignore"):
        out = s * np.exp(_logsinh(np.abs(num_arg)) - _logsinh(den_arg))
    return np.where(num_arg == 0.0, 0.0, out)


@dataclass(frozen=True)
class UnitaryCoeffs:
    """Derived constants of the angular model."""
    omega: float
    gamma: float
    k: float          # sqrt(omega*gamma)
    lam: float        # sqrt(gamma/(16 omega)) = cosh(phi)
    beta: float       # sqrt(lam^2 - 1) = sinh(phi)
    phi: float
    bk: float         # beta * k
    r1: float         # gamma/2 - 2 beta k, computed cancellation-free
    r2: float         # gamma/2 + 2 beta k
    tau: float        # time for the flow to run from pi to 0
    theta_star: float  # stable fixed point, slightly below 0
    t_plus: float     # tan(theta/2) at the two drift roots
    t_minus: float

    # survival from the reset state is  A1 e^{-r1 t} + A2 e^{-r2 t} - A3 e^{-r3 t}
    @property
    def a1(self):
        return (1.0 + math.exp(-2.0 * self.phi)) / (4.0 * self.beta ** 2)

    @property
    def a2c(self):
        return (1.0 + math.exp(2.0 * self.phi)) / (4.0 * self.beta ** 2)

    @property
    def a3(self):
        return 1.0 / self.beta ** 2

    @property
    def r3(self):
        return self.gamma / 2.0


@lru_cache(maxsize=64)
def unitary_coeffs(p: UnitaryParams) -> UnitaryCoeffs:
    k = math.sqrt(p.omega * p.gamma)
    lam = math.sqrt(p.gamma / (16.0 * p.omega))
    beta = math.sqrt(lam * lam - 1.0)
    phi = math.log(lam + beta)
    bk = beta * k
    r2 = p.gamma / 2.0 + 2.0 * bk
    r1 = 4.0 * p.omega * p.gamma / r2      # equals gamma/2 - 2 beta k exactly
    tau = phi / bk
    theta_star = -math.asin(1.0 / lam)
    return UnitaryCoeffs(omega=p.omega, gamma=p.gamma, k=k, lam=lam, beta=beta,
                         phi=phi, bk=bk, r1=r1, r2=r2, tau=tau,
                         theta_star=theta_star,
                         t_plus=-math.exp(-phi), t_minus=-math.exp(phi))


def unitary_drift(theta, k, gamma):
    """Angular drift -2k - (gamma/2) sin(theta); at gamma=0 a uniform rotation."""
    return -2.0 * k - 0.5 * gamma * np.sin(theta)


def _unitary_flow(c: UnitaryCoeffs, theta0, t):
    t = np.asarray(t, dtype=float)
    y = c.bk * t
    if np.ndim(theta0) == 0 and float(theta0) == math.pi:
        tan_half = -_sinh_ratio(y - c.phi, y)
        out = 2.0 * np.arctan(tan_half)
        out = np.where(y == 0.0, math.pi, np.where(y > 0, out, np.nan))
        # the arctan branch returns -pi/2 as tan -> -inf; theta stays in (theta*, pi]
        return out if out.ndim else float(out)
    t0 = math.tan(theta0 / 2.0)
    u0 = (t0 - c.t_plus) / (t0 - c.t_minus)
    e = u0 * np.exp(-2.0 * c.bk * t)
    tan_half = (c.t_plus - c.t_minus * e) / (1.0 - e)
    out = 2.0 * np.arctan(tan_half)
    out = np.where(t == 0.0, theta0, out)
    return out if out.ndim else float(out)


def _unitary_survival(c: UnitaryCoeffs, theta0, t):
    t = np.asarray(t, dtype=float)
    y = c.bk * t
    if np.ndim(theta0) == 0 and float(theta0) == math.pi:
        log_mu = (-0.5 * c.gamma * t
                  + np.logaddexp(2.0 * _logsinh(y), 2.0 * _logsinh(np.abs(y - c.phi)))
                  - 2.0 * math.log(c.beta))
        out = np.where(y == 0.0, 1.0, np.exp(log_mu))
        return out if out.ndim else float(out)
    t0 = math.tan(theta0 / 2.0)
    u0 = (t0 - c.t_plus) / (t0 - c.t_minus)
    e = u0 * np.exp(-2.0 * c.bk * t)
    tan_half = (c.t_plus - c.t_minus * e) / (1.0 - e)
    mu = ((t0 - c.t_minus) ** 2 * (1.0 - e) ** 2 * (1.0 + tan_half ** 2)
          / (4.0 * c.beta ** 2 * (1.0 + t0 ** 2)) * np.exp(-c.r1 * t))
    out = np.where(t == 0.0, 1.0, mu)
    return out if out.ndim else float(out)


def _unitary_level_time(c: UnitaryCoeffs, theta0, level):
    """Time for the angular flow from theta0 down to `level`; inf if unreachable."""
    if level <= c.theta_star:
        return math.inf
    if level >= theta0:
        return 0.0 if level == theta0 else math.inf
    if np.ndim(theta0) == 0 and float(theta0) == math.pi:
        log_u0 = 0.0
    else:
        t0 = math.tan(theta0 / 2.0)
        log_u0 = math.log((t0 - c.t_plus) / (t0 - c.t_minus))
    tc = math.tan(level / 2.0)
    log_uc = math.log((tc - c.t_plus) / (tc - c.t_minus))
    return (log_u0 - log_uc) / (2.0 * c.bk)


def collapse_unitary(p: UnitaryParams) -> PdmpModel:
    """Angular resetting model: drift -2k - (gamma/2) sin(theta), click rate
    gamma sin^2(theta/2), resetting to pi.  Fully efficient detector only;
    inefficient detection lives in `collapse_unitary_bloch_full`.
    """
    if p.eta != 1.0:
        raise ConfigurationError(
            "collapse_unitary covers eta=1 only; use collapse_unitary_bloch_full "
            "for inefficient detection")
    c = unitary_coeffs(p)
    gamma = p.gamma

    def rate(theta):
        return gamma * np.sin(0.5 * theta) ** 2

    channel = PoissonChannel(rate=rate, jump_map=lambda theta: math.pi, label="N1",
                             reset_to=math.pi)
    return PdmpModel(
        name=f"unitary(omega={p.omega:g},gamma={p.gamma:g})",
        drift=lambda theta: unitary_drift(theta, c.k, gamma),
        channels=(channel,),
        domain=(c.theta_star, math.pi),
        closed_flow=lambda x0, dt: _unitary_flow(c, x0, dt),
        closed_survival=lambda x0, dt: _unitary_survival(c, x0, dt),
        fixed_point=c.theta_star,
        reset_state=math.pi,
        far_state=0.0,
        level_time=lambda x0, lvl: _unitary_level_time(c, x0, lvl),
        max_rate=gamma,
        kind="unitary",
        params=p,
        aux=c,
    )


def collapse_unitary_bloch_full(p: UnitaryParams) -> PdmpModel:
    """Three-component state (q, Re u, Im u) for arbitrary efficiency.

    The population q is not autonomous, so this model has no closed forms
    and is integrated with the Euler scheme only.
    """
    c_k = math.sqrt(p.omega * p.gamma)
    gamma, eta = p.gamma, p.eta

    def drift(s):
        q, x, y = s
        dq = 2.0 * c_k * y + gamma * eta * q * (1.0 - q)
        dx = (-0.5 * gamma + gamma * eta * (1.0 - q)) * x
        dy = -c_k * (2.0 * q - 1.0) + (-0.5 * gamma + gamma * eta * (1.0 - q)) * y
        return np.array([dq, dx, dy])

    channel = PoissonChannel(
        rate=lambda s: gamma * eta * (1.0 - s[0]),
        jump_map=lambda s: np.zeros(3),
        label="N1",
        reset_to=0.0,
    )
    return PdmpModel(
        name=f"unitary_bloch(omega={p.omega:g},gamma={p.gamma:g},eta={p.eta:g})",
        drift=drift,
        channels=(channel,),
        domain=(0.0, 1.0),
        max_rate=gamma * eta,
        kind="unitary_bloch",
        params=p,
        state_dim=3,
    )


# ---------------------------------------------------------------------------
# quadratic-drift / affine-rate family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadCoeffs:
    """drift(q) = a2 q^2 + a1 q + a0, total rate(q) = c0 + c1 q.

    The no-click flow is logistic between the drift roots; the no-click
    probability is  exp(-rate(s) t) * (D(t)/D(0))**p_exp  with
    D(t) = (q0 - o) + (s - q0) exp(-R t), s the attracting root, o the other.
    """
    a2: float
    a1: float
    a0: float
    c0: float
    c1: float
    s: float      # attracting root of the drift
    o: float      # repelling root
    decay: float  # R = -a2 (s - o) > 0
    p_exp: float  # c1 / a2

    def rate(self, q):
        return self.c0 + self.c1 * np.asarray(q, dtype=float)

    def drift(self, q):
        q = np.asarray(q, dtype=float)
        return (self.a2 * q + self.a1) * q + self.a0

    def flow(self, q0, t):
        q0 = np.asarray(q0, dtype=float)
        t = np.asarray(t, dtype=float)
        den = q0 - self.o
        with np.errstate(divide="ignore", invalid="ignore"):
            v0 = np.where(den != 0.0, (q0 - self.s) / np.where(den != 0.0, den, 1.0), 0.0)
            e = v0 * np.exp(-self.decay * t)
            out = (self.s - self.o * e) / (1.0 - e)
        out = np.where(den == 0.0, q0, np.where(t == 0.0, q0, out))
        return out if out.ndim else float(out)

    def survival(self, q0, t):
        q0 = np.asarray(q0, dtype=float)
        t = np.asarray(t, dtype=float)
        d0 = self.s - self.o
        d = (q0 - self.o) + (self.s - q0) * np.exp(-self.decay * t)
        base = np.exp(-(self.c0 + self.c1 * self.s) * t)
        if self.p_exp == 1.0:
            out = base * d / d0
        else:
            out = base * (d / d0) ** self.p_exp
        out = np.where(t == 0.0, 1.0, out)
        return out if out.ndim else float(out)

    def mixture_weights(self, q0):
        """Waiting-time law as a two-exponential mixture (valid when p_exp=1):
        weight (q0-o)/(s-o) on rate(s), the rest on rate(o)."""
        if self.p_exp != 1.0:
            raise ValueError("waiting time is hyperexponential only for p_exp = 1")
        q0 = np.asarray(q0, dtype=float)
        w_on_s = (q0 - self.o) / (self.s - self.o)
        return w_on_s, float(self.c0 + self.c1 * self.s), float(self.c0 + self.c1 * self.o)

    def level_time(self, q0, c):
        """Time for the flow from q0 to reach c; inf when unreachable."""
        if c == q0:
            return 0.0
        if q0 == self.o:
            return math.inf  # starting on the repelling root: the flow is pinned
        lo, hi = (q0, self.s) if self.s > q0 else (self.s, q0)
        if not (lo < c < hi) and c != self.s:
            return math.inf
        v0 = (q0 - self.s) / (q0 - self.o)
        vc = (c - self.s) / (c - self.o)
        if vc == 0.0 or v0 == 0.0:
            return math.inf
        return math.log(v0 / vc) / self.decay


def _quad_roots(a2: float, a1: float, a0: float) -> tuple:
    """Both real roots of a2 q^2 + a1 q + a0, cancellation-free, polished."""
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0:
        raise ConfigurationError("drift has no real fixed points")
    sq = math.sqrt(disc)
    if a0 == 0.0:
        r_pair = (0.0, -a1 / a2)
    else:
        qb = -(a1 + math.copysign(sq, a1)) / 2.0
        r_pair = (qb / a2, a0 / qb)

    def polish(r):
        for _ in range(2):
            d = (a2 * r + a1) * r + a0
            dp = 2.0 * a2 * r + a1
            if dp == 0.0 or d == 0.0:
                break
            r = r - d / dp
        return r

    return tuple(sorted(polish(r) for r in r_pair))


def _quad_coeffs(a2, a1, a0, c0, c1) -> QuadCoeffs:
    lo, hi = _quad_roots(a2, a1, a0)
    s, o = (hi, lo) if a2 < 0 else (lo, hi)  # down-parabola attracts to the upper root
    decay = -a2 * (s - o)
    return QuadCoeffs(a2=a2, a1=a1, a0=a0, c0=c0, c1=c1,
                      s=s, o=o, decay=decay, p_exp=c1 / a2)


def _quad_model(name, kind, params, qc: QuadCoeffs, channels, domain,
                reset_state, far_state, max_rate) -> PdmpModel:
    return PdmpModel(
        name=name,
        drift=qc.drift,
        channels=channels,
        domain=domain,
        closed_flow=qc.flow,
        closed_survival=qc.survival,
        fixed_point=qc.s,
        reset_state=reset_state,
        far_state=far_state,
        level_time=qc.level_time,
        max_rate=max_rate,
        kind=kind,
        params=params,
        aux=qc,
    )


def collapse_thermal(p: ThermalParams) -> PdmpModel:
    """Thermal relaxation against strong resetting measurement: quadratic
    drift with fixed points q- < 0 < q+ < 1, click rate gamma*eta*(1-q),
    resetting to 0."""
    if not (abs(p.n_plus) == 0 and abs(p.n_minus) == 1):
        raise ConfigurationError(
            "collapse_thermal is the resetting variant (n_plus=0, n_minus=1); "
            "use collapse_thermal_general otherwise")
    ge = p.gamma * p.eta
    s_tot = p.w_plus_minus + p.w_minus_plus
    qc = _quad_coeffs(a2=-ge, a1=ge - s_tot, a0=p.w_minus_plus, c0=ge, c1=-ge)
    channel = PoissonChannel(rate=lambda q: ge * (1.0 - q),
                             jump_map=lambda q: 0.0, label="N1", reset_to=0.0)
    return _quad_model(
        name=f"thermal(W-+={p.w_minus_plus:g},W+-={p.w_plus_minus:g},geta={ge:g})",
        kind="thermal", params=p, qc=qc, channels=(channel,),
        domain=(0.0, 1.0), reset_state=0.0, far_state=1.0,
        max_rate=ge)


def collapse_thermal_general(p: ThermalParams) -> PdmpModel:
    """Thermal setup with a general diagonal measurement operator.

    The click multiplies the state through q -> m+ q / ((m+ - m-) q + m-)
    (not a resetting map unless one entry vanishes); the click rate is
    gamma*eta*((m+ - m-) q + m-).  Equal moduli give a deterministic model.
    """
    m_p, m_m = abs(p.n_plus) ** 2, abs(p.n_minus) ** 2
    ge = p.gamma * p.eta
    s_tot = p.w_plus_minus + p.w_minus_plus
    c1 = ge * (m_p - m_m)
    c0 = ge * m_m

    def jump(q):
        q = np.asarray(q, dtype=float)
        den = (m_p - m_m) * q + m_m
        out = np.where(den > 0.0, m_p * q / np.where(den > 0.0, den, 1.0), q)
        return out if out.ndim else float(out)

    def rate(q):
        return c0 + c1 * np.asarray(q, dtype=float)

    channel = PoissonChannel(rate=rate, jump_map=jump, label="N1")
    max_rate = ge * max(m_p, m_m)

    if m_p == m_m:
        # identity jump map: purely deterministic relaxation, no jumps or spikes
        q_inf = p.w_minus_plus / s_tot

        def lin_flow(q0, t):
            return q_inf + (np.asarray(q0, dtype=float) - q_inf) * np.exp(-s_tot * np.asarray(t, dtype=float))

        return PdmpModel(
            name=f"thermal_general(m+={m_p:g},m-={m_m:g})",
            drift=lambda q: p.w_minus_plus - s_tot * np.asarray(q, dtype=float),
            channels=(PoissonChannel(rate=rate, jump_map=lambda q: q, label="N1"),),
            domain=(0.0, 1.0),
            closed_flow=lin_flow,
            closed_survival=lambda q0, t: np.exp(-c0 * np.asarray(t, dtype=float)),
            fixed_point=q_inf, reset_state=0.0, far_state=1.0,
            max_rate=max_rate, kind="thermal_general", params=p)

    qc = _quad_coeffs(a2=c1, a1=-(s_tot + c1), a0=p.w_minus_plus, c0=c0, c1=c1)
    return _quad_model(
        name=f"thermal_general(m+={m_p:g},m-={m_m:g},geta={ge:g})",
        kind="thermal_general", params=p, qc=qc, channels=(channel,),
        domain=(0.0, 1.0), reset_state=0.0, far_state=1.0, max_rate=max_rate)


def _measurement_quad(p: MeasurementParams, gamma2_eff: float) -> QuadCoeffs:
    g1e = p.gamma1 * p.eta1
    g2e = gamma2_eff * p.eta2
    a2 = -(g1e + g2e)
    a1 = g1e - gamma2_eff + 2.0 * g2e
    a0 = gamma2_eff * (1.0 - p.eta2)
    q_minus = gamma2_eff * (p.eta2 - 1.0) / (g2e + g1e)
    decay = (g1e + g2e) * (1.0 - q_minus)   # = g1e + gamma2_eff
    return QuadCoeffs(a2=a2, a1=a1, a0=a0, c0=g1e + g2e, c1=-(g1e + g2e),
                      s=1.0, o=q_minus, decay=decay, p_exp=1.0)


def collapse_measurement(p: MeasurementParams) -> PdmpModel:
    """Competition of two resetting measurements: channel N1 resets to 0 at
    rate gamma1*eta1*(1-q), channel N2 resets to 1 at rate gamma2*eta2*(1-q).
    The state q=1 absorbs (both rates carry the 1-q factor)."""
    if not (abs(p.n_a) == 1 and abs(p.n_b) == 0):
        raise ConfigurationError(
            "collapse_measurement is the spontaneous-emission variant "
            "(n_a=1, n_b=0); use collapse_measurement_general otherwise")
    g1e = p.gamma1 * p.eta1
    g2e = p.gamma2 * p.eta2
    qc = _measurement_quad(p, p.gamma2)
    ch1 = PoissonChannel(rate=lambda q: g1e * (1.0 - q), jump_map=lambda q: 0.0,
                         label="N1", reset_to=0.0)
    ch2 = PoissonChannel(rate=lambda q: g2e * (1.0 - q), jump_map=lambda q: 1.0,
                         label="N2", reset_to=1.0)
    return _quad_model(
        name=f"measurement(g1={p.gamma1:g},g2={p.gamma2:g},e1={p.eta1:g},e2={p.eta2:g})",
        kind="measurement", params=p, qc=qc, channels=(ch1, ch2),
        domain=(min(qc.o, 0.0), 1.0), reset_state=0.0, far_state=1.0,
        max_rate=(g1e + g2e) * (1.0 - min(qc.o, 0.0)))


def collapse_measurement_general(p: MeasurementParams) -> PdmpModel:
    """Strong resetting measurement against a general off-diagonal second
    operator with entries (n_a, n_b).

    Reduces to `collapse_measurement` at (1, 0); at (0, 1) both channels
    reset to 0 and the drift vanishes there, so the state stays pinned.
    For n_a*n_b != 0 there are no closed forms and the engine integrates
    the survival numerically.
    """
    m_a, m_b = abs(p.n_a) ** 2, abs(p.n_b) ** 2
    g1e = p.gamma1 * p.eta1
    g2, e2 = p.gamma2, p.eta2

    def g2_map(q):
        q = np.asarray(q, dtype=float)
        den = m_a * (1.0 - q) + m_b * q
        out = np.where(den > 0.0, m_a * (1.0 - q) / np.where(den > 0.0, den, 1.0), q)
        return out if out.ndim else float(out)

    def big_f(q):
        q = np.asarray(q, dtype=float)
        den = m_a * (1.0 - q) + m_b * q
        with np.errstate(divide="ignore", invalid="ignore"):
            jumps_to = np.where(den > 0.0, m_a * (1.0 - q) / np.where(den > 0, den, 1.0), q)
        g2_of_q = jumps_to - q
        return g2 * (m_a - (m_a + m_b) * q) * (1.0 - e2 * g2_of_q)

    def drift(q):
        q_arr = np.asarray(q, dtype=float)
        out = big_f(q_arr) + g1e * q_arr * (1.0 - q_arr)
        return out if out.ndim else float(out)

    ch1 = PoissonChannel(rate=lambda q: g1e * (1.0 - q), jump_map=lambda q: 0.0,
                         label="N1", reset_to=0.0)
    ch2_target = 1.0 if m_b == 0.0 else (0.0 if m_a == 0.0 else None)
    ch2 = PoissonChannel(rate=lambda q: g2 * e2 * (m_a * (1.0 - q) + m_b * q),
                         jump_map=g2_map, label="N2", reset_to=ch2_target)

    closed_flow = closed_survival = level_time = None
    fixed_point = None
    aux = None
    if m_b == 0.0:
        aux = _measurement_quad(p, g2 * m_a)
    elif m_a == 0.0:
        # drift roots are {0, hi}; the flow from 0 stays pinned at 0
        aux = _quad_coeffs(a2=-(g2 * m_b * e2 + g1e), a1=g1e - g2 * m_b, a0=0.0,
                           c0=g1e, c1=g2 * e2 * m_b - g1e)
    if aux is not None:
        closed_flow, closed_survival, level_time = aux.flow, aux.survival, aux.level_time
        fixed_point = aux.s

    return PdmpModel(
        name=f"measurement_general(na2={m_a:g},nb2={m_b:g})",
        drift=drift,
        channels=(ch1, ch2),
        domain=(min(0.0, aux.o if aux is not None else 0.0) - 1e-9, 1.0),
        closed_flow=closed_flow,
        closed_survival=closed_survival,
        fixed_point=fixed_point,
        reset_state=0.0,
        far_state=1.0,
        level_time=level_time,
        max_rate=g1e + g2 * e2 * max(m_a, m_b),
        kind="measurement_general",
        params=p,
        aux=aux,
    )


def general_resetting(p: GeneralParams) -> PdmpModel:
    """Abstract resetting class on [0, 1]: between clicks the state follows
    F(q) + gamma q (1-q) chi(q); clicks arrive at rate gamma (1-q) chi(q)
    and reset to 0.  No closed forms; the exact sampler tabulates the
    survival numerically."""
    gamma = p.gamma

    def drift(q):
        q = np.asarray(q, dtype=float)
        out = p.drift(q) + gamma * q * (1.0 - q) * p.chi(q)
        return out if out.ndim else float(out)

    def rate(q):
        q = np.asarray(q, dtype=float)
        out = gamma * (1.0 - q) * p.chi(q)
        return out if out.ndim else float(out)

    channel = PoissonChannel(rate=rate, jump_map=lambda q: 0.0, label="N1", reset_to=0.0)
    grid = np.linspace(0.0, 1.0, 2001)
    max_rate = float(np.max(rate(grid)))
    model = PdmpModel(
        name=f"general_resetting({p.label},gamma={gamma:g})",
        drift=drift,
        channels=(channel,),
        domain=(0.0, 1.0),
        reset_state=0.0,
        far_state=1.0,
        max_rate=max_rate,
        kind="general_resetting",
        params=p,
    )
    return model


class Resetting(enum.Enum):
    """Classification of the jump map induced by a diagonal operator."""
    TO_MINUS = "reset_to_minus"
    TO_PLUS = "reset_to_plus"
    NOT_RESETTING = "not_resetting"


def classify_resetting(n_plus: complex, n_minus: complex) -> Resetting:
    """Resetting towards a pointer state happens iff one diagonal entry
    vanishes; otherwise the jump map depends on the pre-click state."""
    if abs(n_plus) == 0 and abs(n_minus) == 0:
        raise ValueError("operator entries must not both vanish")
    if abs(n_plus) == 0:
        return Resetting.TO_MINUS
    if abs(n_minus) == 0:
        return Resetting.TO_PLUS
    return Resetting.NOT_RESETTING


def time_to_level(model: PdmpModel, c: float) -> float:
    """Time for the deterministic flow from the reset state to reach level c.

    Uses the model's closed form when present, otherwise bisection on the
    flow.  c must lie strictly between the reset state and the flow's fixed
    point (the far end of the no-click motion).
    """
    if model.reset_state is None:
        raise ConfigurationError(f"{model.name} has no reset state")
    x0 = model.reset_state
    if model.level_time is not None:
        t = model.level_time(x0, c)
        if math.isinf(t):
            raise DomainError(f"level {c} unreachable from {x0} in {model.name}")
        return t
    from .pdmp import _find_fixed_point  # numeric fallback shares the engine helper
    fp = _find_fixed_point(model, x0)
    lo, hi = (x0, fp) if fp > x0 else (fp, x0)
    if not (lo < c < hi):
        raise DomainError(f"level {c} outside the reachable range ({lo}, {hi})")
    t_hi = 1.0
    sgn = 1.0 if fp > x0 else -1.0
    for _ in range(200):
        if sgn * (pdmp_flow(model, x0, t_hi) - c) >= 0:
            break
        t_hi *= 2.0
    else:
        raise DomainError(f"flow never reaches level {c}")
    return brentq(lambda t: pdmp_flow(model, x0, t) - c, 0.0, t_hi,
                  xtol=5e-324, rtol=1e-12)
