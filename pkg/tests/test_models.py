"""Constructor contracts: closed forms, reductions, fixed points, purity."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from spikes import models, pdmp, renewal
from spikes.errors import ConfigurationError, DomainError
from spikes.pdmp import RngStream


class TestUnitary:
    def test_hyperbolic_parameters(self):
        c = models.unitary_coeffs(models.UnitaryParams(1.0, 1e4))
        assert c.beta == pytest.approx(math.sqrt(624.0), rel=1e-14)
        assert math.sinh(c.phi) == pytest.approx(c.beta, abs=1e-12)

    def test_gamma_bound_enforced(self):
        with pytest.raises(ConfigurationError):
            models.UnitaryParams(omega=1.0, gamma=10.0)

    def test_eta_routes_to_bloch(self):
        with pytest.raises(ConfigurationError, match="bloch"):
            models.collapse_unitary(models.UnitaryParams(1.0, 1e4, eta=0.5))

    def test_reset_map_constant(self):
        m = models.collapse_unitary(models.UnitaryParams(1.0, 1e4))
        for th in (0.1, 1.0, 3.0):
            assert m.channels[0].jump_map(th) == math.pi

    def test_flow_from_pi_hits_zero_at_tau(self):
        m = models.collapse_unitary(models.UnitaryParams(1.0, 1e4))
        assert abs(pdmp.flow(m, math.pi, m.aux.tau)) < 1e-10

    def test_flow_general_start_matches_rk4(self):
        m = models.collapse_unitary(models.UnitaryParams(1.0, 1e3))
        for th0 in (3.0, 2.0, 0.5, -0.05):
            for t in (1e-4, 1e-3, 1e-2):
                ref = _rk4(m.drift, th0, t, 6000)
                assert pdmp.flow(m, th0, t) == pytest.approx(ref, abs=1e-8)

    def test_survival_overflow_safe(self):
        # sinh arguments far beyond 710 must not overflow; the far tail is
        # the slow branch weight times exp(-r1 t)
        m = models.collapse_unitary(models.UnitaryParams(1.0, 1e6))
        c = m.aux
        v = pdmp.survival(m, math.pi, 1.0)
        assert math.isfinite(v)
        assert v == pytest.approx(c.a1 * math.exp(-c.r1 * 1.0), rel=1e-6)

    def test_rate_at_fixed_point_equals_slow_decay(self):
        c = models.unitary_coeffs(models.UnitaryParams(1.0, 1e4))
        m = models.collapse_unitary(models.UnitaryParams(1.0, 1e4))
        assert m.total_rate(c.theta_star) == pytest.approx(c.r1, rel=1e-10)


class TestBlochFull:
    def test_purity_preserved_at_full_efficiency(self):
        # The pure sphere is invariant but repelling between clicks, so a
        # first-order step injects ~4*omega*gamma*dt^2 per step which the
        # flow amplifies; the 10*dt purity band is meaningful (and held)
        # at weak drive.
        p = models.UnitaryParams(0.2, 4.0, eta=1.0)
        dt = 1e-5
        _, excess, _ = renewal.bloch_euler_batch(p, 64, dt, 1.0, master_seed=2)
        assert excess <= 10.0 * dt

    def test_purity_bounded_for_inefficient_detection(self):
        # eta < 1 mixes, which actively restores r <= 1
        for eta, gamma, dt in ((0.33, 200.0, 1e-5), (0.7, 200.0, 1e-5),
                               (0.33, 1e4, 1e-6)):
            p = models.UnitaryParams(1.0, gamma, eta=eta)
            _, excess, _ = renewal.bloch_euler_batch(p, 48, dt, 1.0, master_seed=2)
            assert excess <= 10.0 * dt

    def test_martingale_population_without_drive(self):
        # no coherent drive: the population's ensemble mean is conserved
        gamma, eta, dt, n = 50.0, 1.0, 2e-4, 4000

        rng = np.random.Generator(np.random.Philox(key=np.array([9, 9], dtype=np.uint64)))
        q = np.full(n, 0.35)
        for _ in range(int(round(1.0 / dt))):
            fire = rng.random(n) < gamma * eta * (1.0 - q) * dt
            q = np.where(fire, 0.0, q + gamma * eta * q * (1.0 - q) * dt)
        sem = q.std(ddof=1) / math.sqrt(n)
        assert abs(q.mean() - 0.35) < 3.0 * sem + 2.0 * dt * gamma * 0.35

    def test_inefficient_case_shows_jumps_and_spikes(self):
        p = models.UnitaryParams(1.0, 1e4, eta=0.33)
        times, qs = renewal.bloch_euler_trajectory(p, 1e-6, 2.0, master_seed=4, stride=50)
        assert qs.max() > 0.9 and qs.min() < 0.1  # visits both pointer states
        # spikes: short-lived elevations out of the lower state
        low = qs < 0.5
        assert 0.05 < low.mean() < 0.98


def _rk4(f, x0, t, n):
    h = t / n
    x = x0
    for _ in range(n):
        k1 = f(x); k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2); k4 = f(x + h * k3)
        x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


class TestThermal:
    def test_pure_collapse_roots(self):
        qc = models.collapse_thermal(models.ThermalParams(1e-12, 1e-12, 1e3)).aux
        assert qc.s == pytest.approx(1.0, abs=1e-10)
        assert qc.o == pytest.approx(0.0, abs=1e-10)

    def test_root_substitution(self):
        qc = models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e3)).aux
        assert abs(qc.drift(qc.s)) < 1e-10
        assert abs(qc.drift(qc.o)) < 1e-10
        assert qc.o < 0.0 < qc.s < 1.0

    def test_survival_one_at_zero(self):
        m = models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e3))
        for q0 in (0.0, 0.3, 0.9):
            assert pdmp.survival(m, q0, 0.0) == 1.0

    def test_survival_from_any_start_vs_quadrature(self):
        m = models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e3))
        for q0 in (0.0, 0.4, 0.95):
            for t in (1e-4, 1e-3, 1e-2):
                acc, _ = quad(lambda s: m.total_rate(pdmp.flow(m, q0, s)), 0, t,
                              epsabs=1e-14, epsrel=1e-13)
                assert pdmp.survival(m, q0, t) == pytest.approx(math.exp(-acc), abs=1e-9)


class TestThermalGeneral:
    def test_resetting_variant_reduces(self):
        p = models.ThermalParams(0.77, 0.23, 300.0, n_plus=0.0, n_minus=1.0)
        a = models.collapse_thermal(p)
        b = models.collapse_thermal_general(p)
        # identical click sequences under the same stream
        la = pdmp.simulate_exact(a, 0.0, 1.0, RngStream(21, 0))
        lb = pdmp.simulate_exact(b, 0.0, 1.0, RngStream(21, 0))
        assert len(la.clicks) == len(lb.clicks)
        for ea, eb in zip(la.clicks, lb.clicks):
            assert ea.time == pytest.approx(eb.time, rel=1e-9)
            assert eb.post_state == pytest.approx(0.0, abs=1e-12)

    def test_equal_moduli_deterministic(self):
        p = models.ThermalParams(0.77, 0.23, 300.0, n_plus=1.0, n_minus=1.0)
        m = models.collapse_thermal_general(p)
        log = pdmp.simulate_exact(m, 0.0, 2.0, RngStream(5, 0))
        # clicks fire but the jump map is the identity: purely deterministic path
        for ev in log.clicks:
            assert ev.post_state == ev.pre_state
        relaxed = 0.77 * (1.0 - math.exp(-1.0 * 2.0))  # q_inf (1 - e^{-S t})
        assert pdmp.state_at(m, log, 2.0) == pytest.approx(relaxed, abs=1e-9)

    def test_multiplicative_survival_vs_quadrature(self):
        p = models.ThermalParams(0.77, 0.23, 500.0,
                                 n_plus=math.sqrt(0.2), n_minus=math.sqrt(0.4))
        m = models.collapse_thermal_general(p)
        for q0 in (0.0, 0.3, 0.8):
            for t in (1e-3, 1e-2):
                acc, _ = quad(lambda s: m.total_rate(pdmp.flow(m, q0, s)), 0, t,
                              epsabs=1e-14, epsrel=1e-13)
                assert pdmp.survival(m, q0, t) == pytest.approx(math.exp(-acc), rel=1e-9)

    def test_jump_map_contracts_toward_zero(self):
        p = models.ThermalParams(0.77, 0.23, 500.0,
                                 n_plus=math.sqrt(0.2), n_minus=math.sqrt(0.4))
        m = models.collapse_thermal_general(p)
        for q in (0.1, 0.5, 0.9):
            assert 0.0 < m.channels[0].jump_map(q) < q


class TestMeasurement:
    def test_root_value(self):
        p = models.MeasurementParams(gamma1=1e4, eta1=1.0, gamma2=1.0, eta2=0.7)
        qc = models.collapse_measurement(p).aux
        assert qc.o == pytest.approx(1.0 * (0.7 - 1.0) / (0.7 + 1e4), abs=1e-14)
        assert abs(qc.drift(qc.o)) < 1e-10
        assert qc.s == 1.0

    def test_state_one_absorbs(self):
        m = models.collapse_measurement(models.MeasurementParams(1e3, 1.0, 1.0, 0.7))
        assert m.total_rate(1.0) == 0.0
        assert m.drift(1.0) == pytest.approx(0.0, abs=1e-12)

    def test_reduction_to_special_case(self):
        p = models.MeasurementParams(gamma1=300.0, eta1=1.0, gamma2=1.0, eta2=0.7,
                                     n_a=1.0, n_b=0.0)
        a = models.collapse_measurement(p)
        b = models.collapse_measurement_general(p)
        la = pdmp.simulate_exact(a, 0.0, 2.0, RngStream(13, 0))
        lb = pdmp.simulate_exact(b, 0.0, 2.0, RngStream(13, 0))
        assert len(la.clicks) == len(lb.clicks)
        for ea, eb in zip(la.clicks, lb.clicks):
            assert ea.time == pytest.approx(eb.time, rel=1e-8)
            assert ea.channel == eb.channel

    def test_absorption_variant_pins_at_zero(self):
        p = models.MeasurementParams(gamma1=300.0, eta1=1.0, gamma2=1.0, eta2=0.7,
                                     n_a=0.0, n_b=1.0)
        m = models.collapse_measurement_general(p)
        assert m.drift(0.0) == pytest.approx(0.0, abs=1e-14)
        assert m.channels[1].rate(0.0) == 0.0
        log = pdmp.simulate_exact(m, 0.0, 1.0, RngStream(1, 0))
        for ev in log.clicks:
            assert ev.post_state == 0.0
            assert ev.pre_state == pytest.approx(0.0, abs=1e-12)

    def test_general_endpoint_drift(self):
        # out of the lower pointer state the deterministic push is
        # gamma2 |n_a|^2 (1 - eta2)
        p = models.MeasurementParams(gamma1=300.0, eta1=1.0, gamma2=2.0, eta2=0.4,
                                     n_a=1.0, n_b=0.0)
        m = models.collapse_measurement_general(p)
        assert m.drift(0.0) == pytest.approx(2.0 * (1.0 - 0.4), rel=1e-12)


class TestGeneralResetting:
    def test_hypothesis_violations_named(self):
        with pytest.raises(ConfigurationError, match="F\\(0\\)"):
            models.GeneralParams(drift=lambda q: -1.0 + 0 * q,
                                 chi=lambda q: 1.0 + 0 * q, gamma=10.0)
        with pytest.raises(ConfigurationError, match="F\\(1\\)"):
            models.GeneralParams(drift=lambda q: 1.0 + 0 * q,
                                 chi=lambda q: 1.0 + 0 * q, gamma=10.0)

    def test_zero_drift_gives_no_tips_or_jumps(self):
        p = models.GeneralParams(drift=lambda q: 0.0 * q,
                                 chi=lambda q: 1.0 + 0 * q, gamma=100.0)
        m = models.general_resetting(p)
        log = pdmp.simulate_exact(m, 0.0, 1.0, RngStream(2, 0))
        for ev in log.clicks:
            assert ev.pre_state == 0.0


class TestClassifyAndLevels:
    def test_classification(self):
        assert models.classify_resetting(0.0, 1.0) is models.Resetting.TO_MINUS
        assert models.classify_resetting(1.0, 0.0) is models.Resetting.TO_PLUS
        assert models.classify_resetting(0.3, 0.9j) is models.Resetting.NOT_RESETTING
        with pytest.raises(ValueError):
            models.classify_resetting(0.0, 0.0)

    def test_unitary_tau_is_level_zero(self):
        m = models.collapse_unitary(models.UnitaryParams(1.0, 1e4))
        assert models.time_to_level(m, 0.0) == pytest.approx(m.aux.tau, rel=1e-14)

    def test_thermal_closed_vs_bisection(self):
        m = models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e6))
        tc = models.time_to_level(m, 0.5)
        ref = brentq(lambda t: pdmp.flow(m, 0.0, t) - 0.5, 0.0, 1.0,
                     xtol=5e-324, rtol=1e-14)
        assert tc == pytest.approx(ref, rel=1e-10)

    def test_flow_selfconsistency_grid(self):
        for m, lo, hi in (
            (models.collapse_unitary(models.UnitaryParams(1.0, 1e3)), 0.2, 3.0),
            (models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e3)), 0.02, 0.9),
            (models.collapse_measurement(models.MeasurementParams(1e3, 1.0, 1.0, 0.7)),
             0.02, 0.9),
        ):
            for c in np.linspace(lo, hi, 20):
                t = models.time_to_level(m, float(c))
                assert pdmp.flow(m, m.reset_state, t) == pytest.approx(float(c), abs=1e-8)

    def test_unreachable_level_rejected(self):
        m = models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e3))
        with pytest.raises(DomainError):
            models.time_to_level(m, 1.5)
