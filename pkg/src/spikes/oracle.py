"""Closed-form predictions used both as standalone evaluators and as test
oracles against simulation: excursion-tip ("spike") intensities and their
box integrals, the Poisson law, the Laplace-domain click triples (C, D, E),
the counting generating function Z = E / (1 - C - sD), its large-rate
limits, and a real-axis numerical Laplace inversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from .errors import ConfigurationError, DomainError, NumericalError
from .models import (GeneralParams, MeasurementParams, QuadCoeffs,
                     ThermalParams, UnitaryParams)
from .pdmp import PdmpModel
from .renewal import jump_threshold_time
from .stats import SpaceTimeBox

__all__ = [
    "IntensitySpec", "LaplaceTriple", "intensity_spec_for",
    "intensity_density", "spike_intensity", "poisson_pmf",
    "laplace_triple_closed", "laplace_triple_quadrature",
    "generating_Z", "p_hat_n", "asymptotic_Z", "invert_laplace",
    "model_box_rate",
]


# ---------------------------------------------------------------------------
# spike intensities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntensitySpec:
    """Which limiting tip intensity applies: the angular law
    4w sin(x/2)/cos^3(x/2), or a coefficient over x^2 (resp. (1-x)^2 for
    tips hanging from the upper pointer state)."""
    kind: str                  # "unitary" | "thermal" | "measurement" | "conjecture"
    coefficient: float         # omega, W-+, gamma2(1-eta2), or |F(endpoint)|
    side: str = "from_zero"
    active: bool = True        # False when the endpoint rate H vanishes

    def __post_init__(self):
        if self.kind not in ("unitary", "thermal", "measurement", "conjecture"):
            raise ConfigurationError(f"unknown intensity kind {self.kind!r}")
        if self.side not in ("from_zero", "from_one"):
            raise ConfigurationError(f"unknown side {self.side!r}")
        if self.kind == "unitary" and self.side != "from_zero":
            raise ConfigurationError("the angular law is one-sided")


def intensity_spec_for(params, side: str = "from_zero") -> IntensitySpec:
    """Resolve the limiting intensity from a model's parameter record."""
    if isinstance(params, UnitaryParams):
        return IntensitySpec("unitary", params.omega)
    if isinstance(params, ThermalParams):
        m_p, m_m = abs(params.n_plus) ** 2, abs(params.n_minus) ** 2
        if m_p == 0 and m_m == 1:
            if side == "from_zero":
                return IntensitySpec("thermal", params.w_minus_plus)
            return IntensitySpec("conjecture", params.w_plus_minus, side,
                                 active=False)  # H(1) = 0 for the resetting variant
        if side == "from_zero":
            return IntensitySpec("conjecture", params.w_minus_plus, side,
                                 active=m_m != 0)
        return IntensitySpec("conjecture", params.w_plus_minus, side,
                             active=m_p != 0)
    if isinstance(params, MeasurementParams):
        m_a, m_b = abs(params.n_a) ** 2, abs(params.n_b) ** 2
        if side == "from_one":
            return IntensitySpec("conjecture", 0.0, side, active=False)
        if m_a == 1 and m_b == 0:
            return IntensitySpec("measurement", params.gamma2 * (1.0 - params.eta2))
        # general second operator: drift out of 0 is gamma2 |n_a|^2 (1 - eta2)
        return IntensitySpec("conjecture", params.gamma2 * m_a * (1.0 - params.eta2),
                             side, active=True)
    if isinstance(params, GeneralParams):
        if side == "from_zero":
            return IntensitySpec("conjecture", abs(float(params.drift(0.0))),
                                 side, active=float(params.chi(0.0)) != 0.0)
        return IntensitySpec("conjecture", abs(float(params.drift(1.0))),
                             side, active=False)  # H(1) = 0 by construction
    raise ConfigurationError(f"no intensity known for {type(params).__name__}")


def intensity_density(spec: IntensitySpec, x):
    """The tip intensity I(x) (tips per unit time per unit height)."""
    x = np.asarray(x, dtype=float)
    if not spec.active:
        return np.zeros_like(x)
    if spec.kind == "unitary":
        out = 4.0 * spec.coefficient * np.sin(x / 2.0) / np.cos(x / 2.0) ** 3
    elif spec.side == "from_zero":
        out = spec.coefficient / x ** 2
    else:
        out = spec.coefficient / (1.0 - x) ** 2
    return out if out.ndim else float(out)


def spike_intensity(spec: IntensitySpec, a: float, b: float) -> float:
    """Box rate lambda_[a,b] = integral of I over (a, b), in closed form."""
    if a > b:
        raise ValueError(f"need a <= b, got ({a}, {b})")
    if a == b or not spec.active:
        return 0.0
    if spec.kind == "unitary":
        if not (0.0 <= a < b < math.pi):
            raise DomainError("angular box edges must satisfy 0 <= a < b < pi")
        return 4.0 * spec.coefficient * (math.tan(b / 2.0) ** 2 - math.tan(a / 2.0) ** 2)
    if spec.side == "from_zero":
        if a <= 0.0:
            raise DomainError("the 1/x^2 intensity diverges at 0; need a > 0")
        return spec.coefficient * (1.0 / a - 1.0 / b)
    if b >= 1.0:
        raise DomainError("the 1/(1-x)^2 intensity diverges at 1; need b < 1")
    return spec.coefficient * (1.0 / (1.0 - b) - 1.0 / (1.0 - a))


def model_box_rate(model: PdmpModel, box: SpaceTimeBox,
                   side: str = "from_zero") -> float:
    return spike_intensity(intensity_spec_for(model.params, side), box.a, box.b)


def poisson_pmf(lam: float, n: int) -> float:
    """Poisson probability mass, evaluated in the log domain."""
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    if n < 0 or n != int(n):
        raise ValueError(f"n must be a nonnegative integer, got {n}")
    if lam == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(lam) - lam - gammaln(n + 1))


# ---------------------------------------------------------------------------
# Laplace triples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LaplaceTriple:
    """Laplace weights of out-of-box clicks (C), in-box clicks (D) and the
    trailing click-free stub (E), for one box and jump cutoff."""
    c: complex
    d: complex
    e: complex
    sigma: complex
    box: SpaceTimeBox
    tau_jump: float
    model_name: str = ""


def _seg(d, lo: float, hi: float):
    """integral of exp(-d t) over [lo, hi]; d may be complex."""
    if hi <= lo:
        return 0.0
    if d == 0:
        return hi - lo
    if isinstance(d, complex):
        return (np.exp(-d * lo) - np.exp(-d * hi)) / d
    return -math.exp(-d * lo) * math.expm1(-d * (hi - lo)) / d


def _tau_window(model: PdmpModel, box: SpaceTimeBox, tau_jump: float):
    """Flow times at which tips enter/leave the box, clamped to [0, tau]."""
    t_edges = sorted((model.level_time(model.reset_state, box.a),
                      model.level_time(model.reset_state, box.b)))
    lo = min(max(t_edges[0], 0.0), tau_jump)
    hi = min(t_edges[1], tau_jump)
    return lo, hi


def laplace_triple_closed(model: PdmpModel, sigma, box: SpaceTimeBox,
                          eps_jump: float = 1e-2) -> LaplaceTriple:
    """Exact (C, D, E) for the analytic models, overflow-safe.

    The click-free weight from the reset state is a short sum of
    exponentials, and multiplying by the (affine) reset-channel rate along
    the flow keeps that structure, so each integral is elementary.
    """
    tau = jump_threshold_time(model, eps_jump)
    t_lo, t_hi = _tau_window(model, box, tau)

    if model.kind == "unitary":
        c = model.aux
        weights_e = (c.a1, c.a2c, -c.a3)
        weights_mu_alpha = (c.gamma * math.exp(-2.0 * c.phi) / (4.0 * c.beta ** 2),
                            c.gamma * math.exp(2.0 * c.phi) / (4.0 * c.beta ** 2),
                            -c.gamma * 2.0 / (4.0 * c.beta ** 2))
        decays = (c.r1, c.r2, c.r3)
    elif isinstance(model.aux, QuadCoeffs):
        qc = model.aux
        q0 = model.reset_state
        w_s = (q0 - qc.o) / (qc.s - qc.o)
        w_o = (qc.s - q0) / (qc.s - qc.o)
        rate1 = model.channels[0].rate
        weights_e = (w_s, w_o)
        weights_mu_alpha = (w_s * float(rate1(qc.s)), w_o * float(rate1(qc.o)))
        decays = (float(qc.rate(qc.s)), float(qc.rate(qc.o)))
    else:
        raise ConfigurationError(f"no closed triple for model kind {model.kind!r}")

    ee = sum(w * _seg(sigma + r, 0.0, tau) for w, r in zip(weights_e, decays))
    cpd = sum(w * _seg(sigma + r, 0.0, tau) for w, r in zip(weights_mu_alpha, decays))
    dd = sum(w * _seg(sigma + r, t_lo, t_hi) for w, r in zip(weights_mu_alpha, decays))
    return LaplaceTriple(c=cpd - dd, d=dd, e=ee, sigma=sigma, box=box,
                         tau_jump=tau, model_name=model.name)


def laplace_triple_quadrature(model: PdmpModel, sigma: float, box: SpaceTimeBox,
                              eps_jump: float = 1e-2,
                              tol: float = 1e-12) -> LaplaceTriple:
    """Adaptive quadrature of the three defining integrals along the flow;
    the independent oracle for `laplace_triple_closed`."""
    from .pdmp import flow as pdmp_flow, survival as pdmp_survival

    tau = jump_threshold_time(model, eps_jump)
    t_lo, t_hi = _tau_window(model, box, tau)
    x0 = model.reset_state
    rate1 = model.channels[0].rate

    def mu(t):
        return pdmp_survival(model, x0, t)

    def mu_alpha(t):
        return mu(t) * float(rate1(pdmp_flow(model, x0, t)))

    def integrate(f, lo, hi):
        if hi <= lo:
            return 0.0
        val, err = quad(lambda t: f(t) * math.exp(-sigma * t), lo, hi,
                        epsabs=tol, epsrel=tol, limit=400)
        if not math.isfinite(val):
            raise NumericalError("quadrature failed to converge")
        return val

    ee = integrate(mu, 0.0, tau)
    dd = integrate(mu_alpha, t_lo, t_hi)
    cc = integrate(mu_alpha, 0.0, t_lo) + integrate(mu_alpha, t_hi, tau)
    return LaplaceTriple(c=cc, d=dd, e=ee, sigma=sigma, box=box,
                         tau_jump=tau, model_name=model.name)


def generating_Z(triple: LaplaceTriple, s):
    """Z(s; sigma, a, b) = E / (1 - C - s D), the Laplace-domain generating
    function of the joint no-jump/tip-count law."""
    den = 1.0 - triple.c - s * triple.d
    if not isinstance(den, complex) and den <= 0.0:
        raise NumericalError(
            f"generating-function pole: 1 - C - sD = {den:.3g} <= 0 "
            "(sigma at or below the leading decay rate)")
    return triple.e / den


def p_hat_n(triple: LaplaceTriple, n: int):
    """Laplace transform of the joint probability of exactly n in-box tips
    and no jump: D^n E / (1 - C)^(n+1)."""
    return triple.d ** n * triple.e / (1.0 - triple.c) ** (n + 1)


def asymptotic_Z(params, s, sigma, box: SpaceTimeBox):
    """Large-rate limit of Z: 1 / (sigma + J + (1-s) lambda_[a,b]) with J the
    pointer jump rate (4*omega, W-+, or gamma2)."""
    if isinstance(params, UnitaryParams):
        jump_rate = 4.0 * params.omega
        lam = spike_intensity(IntensitySpec("unitary", params.omega), box.a, box.b)
    elif isinstance(params, ThermalParams):
        jump_rate = params.w_minus_plus
        lam = spike_intensity(intensity_spec_for(params), box.a, box.b)
    elif isinstance(params, MeasurementParams):
        jump_rate = params.gamma2
        lam = spike_intensity(intensity_spec_for(params), box.a, box.b)
    elif isinstance(params, GeneralParams):
        jump_rate = abs(float(params.drift(0.0)))
        lam = spike_intensity(intensity_spec_for(params), box.a, box.b)
    else:
        raise ConfigurationError(f"no asymptotic form for {type(params).__name__}")
    return 1.0 / (sigma + jump_rate + (1.0 - s) * lam)


def invert_laplace(fhat, t: float, dps: int = 40, degree: int = 20) -> float:
    """Numerical inverse Laplace transform on the real axis (Gaver-Stehfest
    with arbitrary-precision arithmetic); fhat must accept mpmath floats."""
    import mpmath
    with mpmath.workdps(dps):
        return float(mpmath.invertlaplace(fhat, t, method="stehfest", degree=degree))
