"""Analytic-oracle contracts, each checked against an independent route:
quadrature for the closed box rates and triples, Cauchy coefficients for the
generating function, enumeration for the Poisson law, known transforms for
the inversion."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from spikes import models, oracle, pdmp
from spikes.errors import DomainError, NumericalError
from spikes.oracle import IntensitySpec
from spikes.stats import SpaceTimeBox


class TestIntensity:
    def test_empty_box(self):
        assert oracle.spike_intensity(IntensitySpec("thermal", 0.77), 0.3, 0.3) == 0.0

    def test_unitary_quarter_turn(self):
        # 4 omega tan^2(pi/4) with omega = 1
        spec = IntensitySpec("unitary", 1.0)
        assert oracle.spike_intensity(spec, 0.0, math.pi / 2) == pytest.approx(4.0, rel=1e-14)

    def test_measurement_value(self):
        spec = IntensitySpec("measurement", 1.0 * (1.0 - 0.33))
        assert oracle.spike_intensity(spec, 0.01, 0.1) == pytest.approx(0.67 * 90.0, rel=1e-12)

    def test_closed_vs_quadrature(self):
        cases = [
            (IntensitySpec("unitary", 1.7), 0.2, 2.6),
            (IntensitySpec("thermal", 0.77), 0.01, 0.4),
            (IntensitySpec("conjecture", 0.5), 0.02, 0.7),
            (IntensitySpec("conjecture", 0.9, side="from_one"), 0.1, 0.95),
        ]
        for spec, a, b in cases:
            closed = oracle.spike_intensity(spec, a, b)
            num, _ = quad(lambda x: oracle.intensity_density(spec, x), a, b,
                          epsabs=1e-13, epsrel=1e-13)
            assert closed == pytest.approx(num, abs=1e-10)

    def test_divergence_guard(self):
        with pytest.raises(DomainError):
            oracle.spike_intensity(IntensitySpec("thermal", 0.77), 0.0, 0.1)
        with pytest.raises(DomainError):
            oracle.spike_intensity(IntensitySpec("conjecture", 1.0, side="from_one"),
                                   0.5, 1.0)

    def test_inactive_endpoint_gives_zero(self):
        spec = IntensitySpec("conjecture", 0.5, active=False)
        assert oracle.spike_intensity(spec, 0.01, 0.1) == 0.0

    def test_spec_resolution_from_params(self):
        s = oracle.intensity_spec_for(models.ThermalParams(0.77, 0.23, 1e3))
        assert s.kind == "thermal" and s.coefficient == 0.77
        s = oracle.intensity_spec_for(
            models.MeasurementParams(1e3, 1.0, 1.0, 0.33))
        assert s.coefficient == pytest.approx(0.67)
        s = oracle.intensity_spec_for(
            models.ThermalParams(0.77, 0.23, 1e3, n_plus=math.sqrt(0.2),
                                 n_minus=math.sqrt(0.4)), side="from_one")
        assert s.coefficient == 0.23 and s.active


class TestPoissonPmf:
    def test_edges(self):
        assert oracle.poisson_pmf(0.0, 0) == 1.0
        assert oracle.poisson_pmf(0.0, 5) == 0.0
        assert oracle.poisson_pmf(3.0, 0) == pytest.approx(math.exp(-3.0), rel=1e-14)

    def test_normalization_and_mean(self):
        for lam in (0.5, 7.0, 50.0):
            p = [oracle.poisson_pmf(lam, n) for n in range(201)]
            assert sum(p) == pytest.approx(1.0, abs=1e-12)
            assert sum(n * v for n, v in enumerate(p)) == pytest.approx(lam, abs=1e-10 * lam)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            oracle.poisson_pmf(-1.0, 0)
        with pytest.raises(ValueError):
            oracle.poisson_pmf(1.0, -2)


def _models_and_boxes():
    return [
        (models.collapse_unitary(models.UnitaryParams(1.0, 1e3)),
         SpaceTimeBox(0.0, 0.1, 0.5, 2.0)),
        (models.collapse_unitary(models.UnitaryParams(1.0, 1e3)),
         SpaceTimeBox(0.0, 0.1, 0.0, 1.0)),    # a = 0: in-box window ends at the crossing
        (models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e3)),
         SpaceTimeBox(0.0, 0.1, 0.01, 0.1)),
        (models.collapse_measurement(models.MeasurementParams(1e3, 1.0, 1.0, 0.33)),
         SpaceTimeBox(0.0, 0.1, 0.01, 0.1)),
    ]


class TestTriples:
    def test_closed_vs_quadrature(self):
        for m, box in _models_and_boxes():
            for sig in (0.0, 1.0, 10.0):
                tc = oracle.laplace_triple_closed(m, sig, box)
                tq = oracle.laplace_triple_quadrature(m, sig, box)
                assert tc.c == pytest.approx(tq.c, rel=1e-8)
                assert tc.d == pytest.approx(tq.d, rel=1e-8)
                assert tc.e == pytest.approx(tq.e, rel=1e-8)

    def test_nonnegative_and_decaying(self):
        m, box = _models_and_boxes()[0]
        prev = None
        for sig in (0.0, 2.0, 20.0, 200.0):
            tr = oracle.laplace_triple_closed(m, sig, box)
            assert tr.c >= 0 and tr.d >= 0 and tr.e >= 0
            if prev is not None:
                assert tr.c <= prev.c and tr.d <= prev.d and tr.e <= prev.e
            prev = tr

    def test_empty_window(self):
        m, _ = _models_and_boxes()[2]
        box = SpaceTimeBox(0.0, 0.1, 0.05, 0.05 + 1e-12)
        tr = oracle.laplace_triple_closed(m, 1.0, box)
        assert tr.d == pytest.approx(0.0, abs=1e-9)

    def test_survival_identity_total_rate(self):
        # all click mass plus the no-click stub accounts for probability one
        for m, box in _models_and_boxes():
            tr = oracle.laplace_triple_closed(m, 0.0, box)
            probe = 0.5 * (m.reset_state + m.fixed_point)
            scale = m.total_rate(probe) / m.channels[0].rate(probe)
            mu_tau = pdmp.survival(m, m.reset_state, tr.tau_jump)
            assert scale * (tr.c + tr.d) + mu_tau == pytest.approx(1.0, abs=1e-10)


class TestGeneratingFunction:
    def test_zero_mark_is_no_tip_transform(self):
        m, box = _models_and_boxes()[2]
        tr = oracle.laplace_triple_closed(m, 1.0, box)
        assert oracle.generating_Z(tr, 0.0) == pytest.approx(tr.e / (1.0 - tr.c), rel=1e-14)

    def test_series_matches_cauchy_coefficients(self):
        for m, box in _models_and_boxes()[:3]:
            tr = oracle.laplace_triple_closed(m, 1.0, box)
            radius = min(1.0, 0.5 * (1.0 - tr.c) / abs(tr.d))
            npts = 256
            vals = np.array([oracle.generating_Z(tr, radius * np.exp(2j * np.pi * k / npts))
                             for k in range(npts)])
            coeffs = np.fft.fft(vals) / npts
            for n in range(5):
                assert coeffs[n].real / radius ** n == pytest.approx(
                    oracle.p_hat_n(tr, n), abs=1e-10)

    def test_pole_detected(self):
        m, box = _models_and_boxes()[2]
        tr = oracle.laplace_triple_closed(m, 0.0, box)
        bad = oracle.LaplaceTriple(c=tr.c, d=(1.0 - tr.c) * 1.01, e=tr.e,
                                   sigma=0.0, box=box, tau_jump=tr.tau_jump)
        with pytest.raises(NumericalError):
            oracle.generating_Z(bad, 1.0)

    def test_unitary_large_rate_survival_resolvent(self):
        # at s = 1 the generating function approaches 1/(sigma + 4 omega)
        m = models.collapse_unitary(models.UnitaryParams(1.0, 1e6))
        box = SpaceTimeBox(0.0, 0.1, 0.5, 2.0)
        tr = oracle.laplace_triple_closed(m, 1.0, box)
        assert oracle.generating_Z(tr, 1.0) == pytest.approx(1.0 / (1.0 + 4.0), rel=2e-3)


class TestAsymptoticZ:
    def test_s_one_reduces_to_jump_resolvent(self):
        box = SpaceTimeBox(0.0, 0.1, 0.01, 0.1)
        za = oracle.asymptotic_Z(models.ThermalParams(0.77, 0.23, 1e6), 1.0, 2.0, box)
        assert za == pytest.approx(1.0 / (2.0 + 0.77), rel=1e-14)
        zb = oracle.asymptotic_Z(models.MeasurementParams(1e6, 0.33, 1.0, 0.33),
                                 1.0, 2.0, box)
        assert zb == pytest.approx(1.0 / (2.0 + 1.0), rel=1e-14)
        zu = oracle.asymptotic_Z(models.UnitaryParams(1.0, 1e6), 1.0, 2.0,
                                 SpaceTimeBox(0.0, 0.1, 0.0, 1.0))
        assert zu == pytest.approx(1.0 / (2.0 + 4.0), rel=1e-14)

    def test_convergence_monotone(self):
        box = SpaceTimeBox(0.0, 0.1, 0.01, 0.1)
        devs = []
        for g in (1e3, 1e4, 1e5, 1e6):
            m = models.collapse_thermal(models.ThermalParams(0.77, 0.23, g))
            tr = oracle.laplace_triple_closed(m, 1.0, box)
            devs.append(abs(oracle.generating_Z(tr, 0.5)
                            - oracle.asymptotic_Z(m.params, 0.5, 1.0, box)))
        assert all(b < a for a, b in zip(devs, devs[1:]))

    def test_inverse_transform_recovers_poisson_mixture(self):
        lam = 0.77 * (1.0 / 0.01 - 1.0 / 0.02)
        jump = 0.77
        t = 0.05
        for n in range(3):
            def fhat(sig, n=n):
                return lam ** n / (sig + jump + lam) ** (n + 1)
            got = oracle.invert_laplace(fhat, t)
            want = math.exp(-(jump + lam) * t) * (lam * t) ** n / math.factorial(n)
            assert got == pytest.approx(want, abs=1e-6)


class TestInversion:
    def test_known_transforms(self):
        assert oracle.invert_laplace(lambda s: 1.0 / (s + 2.0), 0.7) == pytest.approx(
            math.exp(-1.4), abs=1e-8)
        assert oracle.invert_laplace(lambda s: 1.0 / s ** 2, 1.3) == pytest.approx(
            1.3, abs=1e-8)
