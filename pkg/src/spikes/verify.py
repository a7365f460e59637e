"""Named verification checks.

`fast` checks are deterministic oracle/identity/property validations that
run in seconds; `full` additionally executes the Monte Carlo acceptance
runs at their stated scales.  Every check returns a CheckResult; the CLI
prints one line per check and exits nonzero on any failure.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps
from scipy.integrate import quad

from . import harness, models, oracle, pdmp, renewal
from .harness import ExperimentConfig
from .presets import PRESETS, SWEEP_ALPHA_DEFAULTS
from .stats import (SpaceTimeBox, conditioned_box_stats,
                    first_passage_stats)

__all__ = ["CheckResult", "run_suite", "FAST_CHECKS", "FULL_CHECKS"]

SEED = 20240501


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed_s: float


def _result(name, passed, detail, t0):
    return CheckResult(name, bool(passed), detail, time.perf_counter() - t0)


def _within(value, target, tol):
    return abs(value - target) <= tol


# ---------------------------------------------------------------------------
# fast oracle / identity checks
# ---------------------------------------------------------------------------

def check_intensity_antiderivatives():
    """Closed box rates equal adaptive quadrature of the densities to 1e-10,
    and central differences of the primitive recover the density to 1e-8."""
    t0 = time.perf_counter()
    specs = [
        oracle.IntensitySpec("unitary", 1.3),
        oracle.IntensitySpec("thermal", 0.77),
        oracle.IntensitySpec("measurement", 0.67),
        oracle.IntensitySpec("conjecture", 0.5),
        oracle.IntensitySpec("conjecture", 0.5, side="from_one"),
    ]
    worst_q = worst_d = 0.0
    for spec in specs:
        if spec.kind == "unitary":
            a, b = 0.3, 2.4
        elif spec.side == "from_zero":
            a, b = 0.01, 0.62
        else:
            a, b = 0.05, 0.93
        closed = oracle.spike_intensity(spec, a, b)
        num, _ = quad(lambda x: oracle.intensity_density(spec, x), a, b,
                      epsabs=1e-12, epsrel=1e-12)
        worst_q = max(worst_q, abs(closed - num))
        for x in np.linspace(a + 0.02, b - 0.02, 100):
            h = 1e-6
            deriv = (oracle.spike_intensity(spec, a, x + h)
                     - oracle.spike_intensity(spec, a, x - h)) / (2 * h)
            worst_d = max(worst_d, abs(deriv - oracle.intensity_density(spec, x))
                          / max(1.0, abs(oracle.intensity_density(spec, x))))
    ok = worst_q <= 1e-10 and worst_d <= 1e-8
    return _result("intensity-antiderivatives", ok,
                   f"quad dev {worst_q:.2e}, fd dev {worst_d:.2e}", t0)


def check_poisson_pmf():
    t0 = time.perf_counter()
    worst_norm = worst_mean = 0.0
    for lam in (0.3, 5.0, 50.0):
        terms = [oracle.poisson_pmf(lam, n) for n in range(201)]
        worst_norm = max(worst_norm, abs(sum(terms) - 1.0))
        worst_mean = max(worst_mean, abs(sum(n * p for n, p in enumerate(terms)) - lam) / lam)
    edge = (oracle.poisson_pmf(0.0, 0) == 1.0 and oracle.poisson_pmf(0.0, 3) == 0.0)
    ok = worst_norm <= 1e-12 and worst_mean <= 1e-10 and edge
    return _result("poisson-pmf", ok,
                   f"norm dev {worst_norm:.2e}, mean dev {worst_mean:.2e}", t0)


def _rk4_flow(model, x0, t, n_steps):
    h = t / n_steps
    x = float(x0)
    f = model.drift
    for _ in range(n_steps):
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def _flow_survival_cases():
    return [
        (models.collapse_unitary(models.UnitaryParams(1.0, 1e3)),
         math.pi, np.linspace(1e-4, 2e-2, 10)),
        (models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e3)),
         0.0, np.linspace(1e-4, 2e-2, 10)),
        (models.collapse_measurement(models.MeasurementParams(1e3, 1.0, 1.0, 0.7)),
         0.0, np.linspace(1e-4, 2e-2, 10)),
    ]


def check_flows_vs_rk4():
    """Closed flows vs an independent fixed-step RK4 integration, <= 1e-8 on
    a grid of (start, duration) pairs."""
    t0 = time.perf_counter()
    worst = 0.0
    for model, x0, ts in _flow_survival_cases():
        starts = np.linspace(*model.domain, 12)[1:-1] if model.kind != "unitary" \
            else np.linspace(0.3, math.pi, 12)
        for s in starts:
            for t in ts[::3]:
                closed = pdmp.flow(model, float(s), float(t))
                ref = _rk4_flow(model, float(s), float(t), 4000)
                worst = max(worst, abs(closed - ref))
    return _result("flow-vs-rk4", worst <= 1e-8, f"max abs dev {worst:.2e}", t0)


def check_survival_vs_quadrature():
    """Closed no-click probabilities vs quadrature of the rate along the
    closed flow, <= 1e-8."""
    t0 = time.perf_counter()
    worst = 0.0
    for model, x0, ts in _flow_survival_cases():
        for t in ts:
            closed = pdmp.survival(model, x0, float(t))
            acc, _ = quad(lambda s: model.total_rate(pdmp.flow(model, x0, s)),
                          0.0, float(t), epsabs=1e-13, epsrel=1e-13, limit=300)
            worst = max(worst, abs(closed - math.exp(-acc)))
    return _result("survival-vs-quadrature", worst <= 1e-8,
                   f"max abs dev {worst:.2e}", t0)


def _triple_cases():
    return [
        (models.collapse_unitary(models.UnitaryParams(1.0, 1e3)),
         SpaceTimeBox(0.0, 0.1, 0.5, 2.0)),
        (models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e3)),
         SpaceTimeBox(0.0, 0.1, 0.01, 0.1)),
        (models.collapse_measurement(models.MeasurementParams(1e3, 1.0, 1.0, 0.33)),
         SpaceTimeBox(0.0, 0.1, 0.01, 0.1)),
    ]


def check_laplace_triples():
    """Closed triples vs adaptive quadrature, relative 1e-8 at sigma in
    {0, 1, 10}."""
    t0 = time.perf_counter()
    worst = 0.0
    for model, box in _triple_cases():
        for sig in (0.0, 1.0, 10.0):
            tc = oracle.laplace_triple_closed(model, sig, box)
            tq = oracle.laplace_triple_quadrature(model, sig, box)
            for x, y in ((tc.c, tq.c), (tc.d, tq.d), (tc.e, tq.e)):
                worst = max(worst, abs(x - y) / max(abs(y), 1e-300))
    return _result("laplace-closed-vs-quadrature", worst <= 1e-8,
                   f"max rel dev {worst:.2e}", t0)


def check_survival_identity():
    """Total click mass plus the no-click stub account for all probability:
    scale*(C(0)+D(0)) + mu(tau) = 1 with scale the total-to-reset-channel
    rate ratio (1 for single-channel models)."""
    t0 = time.perf_counter()
    worst = 0.0
    for model, box in _triple_cases():
        tr = oracle.laplace_triple_closed(model, 0.0, box)
        x_probe = 0.5 * (model.reset_state + model.fixed_point)
        r1 = float(model.channels[0].rate(x_probe))
        scale = float(model.total_rate(x_probe)) / r1 if r1 > 0 else 1.0
        mu_tau = pdmp.survival(model, model.reset_state, tr.tau_jump)
        worst = max(worst, abs(scale * (tr.c + tr.d) + mu_tau - 1.0))
    return _result("survival-identity", worst <= 1e-10, f"max dev {worst:.2e}", t0)


def check_z_series():
    """Taylor coefficients of Z in the marking variable (via Cauchy-FFT on a
    circle) equal D^n E/(1-C)^(n+1) to 1e-10."""
    t0 = time.perf_counter()
    worst = 0.0
    for model, box in _triple_cases():
        tr = oracle.laplace_triple_closed(model, 1.0, box)
        radius = 0.5 * (1.0 - tr.c.real if isinstance(tr.c, complex) else 1.0 - tr.c) / abs(tr.d)
        radius = min(radius, 1.0)
        m = 256
        thetas = 2.0 * np.pi * np.arange(m) / m
        vals = np.array([oracle.generating_Z(tr, radius * np.exp(1j * th))
                         for th in thetas])
        coeffs = np.fft.fft(vals) / m
        for n in range(6):
            cn = coeffs[n].real / radius ** n
            target = oracle.p_hat_n(tr, n)
            worst = max(worst, abs(cn - target))
    return _result("z-series-consistency", worst <= 1e-10, f"max dev {worst:.2e}", t0)


def check_asymptotic_convergence():
    """|Z_exact - Z_limit| at (s, sigma) = (0.5, 1) strictly decreasing over
    four decades of measurement rate, for all three analytic models."""
    t0 = time.perf_counter()
    cases = {
        "unitary": (lambda g: models.collapse_unitary(models.UnitaryParams(1.0, g)),
                    SpaceTimeBox(0.0, 0.1, 0.5, 2.0)),
        "thermal": (lambda g: models.collapse_thermal(models.ThermalParams(0.77, 0.23, g)),
                    SpaceTimeBox(0.0, 0.1, 0.01, 0.1)),
        "measurement": (lambda g: models.collapse_measurement(
            models.MeasurementParams(g, 1.0, 1.0, 0.33)),
            SpaceTimeBox(0.0, 0.1, 0.01, 0.1)),
    }
    details, ok = [], True
    for name, (build, box) in cases.items():
        devs = []
        for g in (1e3, 1e4, 1e5, 1e6):
            m = build(g)
            tr = oracle.laplace_triple_closed(m, 1.0, box)
            devs.append(abs(oracle.generating_Z(tr, 0.5)
                            - oracle.asymptotic_Z(m.params, 0.5, 1.0, box)))
        mono = all(devs[i + 1] < devs[i] for i in range(len(devs) - 1))
        ok &= mono
        details.append(f"{name}:{'ok' if mono else 'NOT MONOTONE'}")
    # s = 1 reduces to the bare jump-rate resolvent
    for name, (build, box) in cases.items():
        m = build(1e6)
        za = oracle.asymptotic_Z(m.params, 1.0, 1.0, box)
        jr = {"unitary": 4.0, "thermal": 0.77, "measurement": 1.0}[name]
        ok &= abs(za - 1.0 / (1.0 + jr)) < 1e-12
    return _result("asymptotic-z-convergence", ok, ", ".join(details), t0)


def check_laplace_inversion():
    """The numerical inversion of the limiting Z at fixed tip count recovers
    the Poisson mixture e^(-(J+lam)t) (lam t)^n / n! to 1e-6."""
    t0 = time.perf_counter()
    lam, jump_rate, t = 4.3, 0.77, 0.35
    worst = 0.0
    for n in range(4):
        def fhat(sig, n=n):
            return lam ** n / (sig + jump_rate + lam) ** (n + 1)
        num = oracle.invert_laplace(fhat, t)
        exact = math.exp(-(jump_rate + lam) * t) * (lam * t) ** n / math.factorial(n)
        worst = max(worst, abs(num - exact))
    return _result("laplace-inversion-oracle", worst <= 1e-6,
                   f"max abs dev {worst:.2e}", t0)


def check_fixed_points():
    """Drift vanishes at the constructed fixed points: absolute 1e-10 at the
    documented rate scale (gamma*eta ~ 1e3), and at machine-relative level
    (1e-14 of the quadratic coefficient) up to gamma = 1e8."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst_abs = worst_rel = 0.0
    for i in range(100):
        if i % 2 == 0:
            qc = models.collapse_thermal(models.ThermalParams(
                w_minus_plus=rng.uniform(0.05, 2.0),
                w_plus_minus=rng.uniform(0.05, 2.0),
                gamma=rng.uniform(50.0, 5e3))).aux
        else:
            qc = models.collapse_measurement(models.MeasurementParams(
                gamma1=rng.uniform(50.0, 5e3), eta1=rng.uniform(0.1, 1.0),
                gamma2=rng.uniform(0.1, 5.0), eta2=rng.uniform(0.0, 1.0))).aux
        worst_abs = max(worst_abs, abs(qc.drift(qc.s)), abs(qc.drift(qc.o)))
    for i in range(100):
        g = 10 ** rng.uniform(2.0, 8.0)
        if i % 2 == 0:
            qc = models.collapse_thermal(models.ThermalParams(
                rng.uniform(0.05, 2.0), rng.uniform(0.05, 2.0), g)).aux
        else:
            qc = models.collapse_measurement(models.MeasurementParams(
                g, rng.uniform(0.1, 1.0), rng.uniform(0.1, 5.0),
                rng.uniform(0.0, 1.0))).aux
        scale = abs(qc.a2)
        worst_rel = max(worst_rel, abs(qc.drift(qc.s)) / scale,
                        abs(qc.drift(qc.o)) / scale)
    ok = worst_abs <= 1e-10 and worst_rel <= 1e-14
    return _result("fixed-points", ok,
                   f"abs {worst_abs:.2e} (1e3 scale), rel {worst_rel:.2e}", t0)


def check_level_times():
    """Closed level-crossing times vs bisection on the closed flow (1e-10
    relative), and flow(reset, t_c) = c to 1e-8 on a 20-level grid."""
    t0 = time.perf_counter()
    from scipy.optimize import brentq
    worst_rel = worst_abs = 0.0
    tm = models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e6))
    for c in np.linspace(0.05, 0.9, 12):
        tc = models.time_to_level(tm, float(c))
        ref = brentq(lambda t: pdmp.flow(tm, 0.0, t) - c, 0.0, 1.0, xtol=5e-324, rtol=1e-14)
        worst_rel = max(worst_rel, abs(tc - ref) / ref)
    for model, x0, _ in _flow_survival_cases():
        lo = 0.02 if model.kind != "unitary" else 0.15
        hi = 0.9 if model.kind != "unitary" else 3.0
        for c in np.linspace(lo, hi, 20):
            tc = models.time_to_level(model, float(c))
            worst_abs = max(worst_abs, abs(pdmp.flow(model, x0, tc) - c))
    ok = worst_rel <= 1e-10 and worst_abs <= 1e-8
    return _result("level-times", ok,
                   f"bisect rel {worst_rel:.2e}, flow dev {worst_abs:.2e}", t0)


def check_zeno_and_classification():
    t0 = time.perf_counter()
    ok = True
    for th in np.linspace(-3.0, 3.0, 13):
        ok &= models.unitary_drift(th, 2.5, 0.0) == -5.0  # pure rotation at zero rate
    ok &= models.classify_resetting(0.0, 1.0) is models.Resetting.TO_MINUS
    ok &= models.classify_resetting(1.0, 0.0) is models.Resetting.TO_PLUS
    ok &= models.classify_resetting(0.3, 0.9j) is models.Resetting.NOT_RESETTING
    try:
        models.classify_resetting(0.0, 0.0)
        ok = False
    except ValueError:
        pass
    return _result("zeno-and-classification", ok, "drift and jump-map classification", t0)


# ---------------------------------------------------------------------------
# full Monte Carlo acceptance criteria
# ---------------------------------------------------------------------------

def _check_boxes(rows, lam_of_b, check_var=True):
    msgs, ok = [], True
    for row in rows:
        lam = lam_of_b(row)
        if not _within(row.mean_per_time, lam, 3.0 * row.sem_mean):
            ok = False
            msgs.append(f"mean b={row.b}: {row.mean_per_time:.3f} vs {lam:.3f} "
                        f"+-{3 * row.sem_mean:.3f}")
        if check_var and not _within(row.var_per_time, lam, 3.0 * row.sem_var):
            ok = False
            msgs.append(f"var b={row.b}: {row.var_per_time:.3f} vs {lam:.3f} "
                        f"+-{3 * row.sem_var:.3f}")
    return ok, msgs


def crit_unitary_spike_law(workers=1):
    """Counting law of the angular model at rate 1e6: mean/t, var/t within
    3 sem of 4 tan^2(b/2) and dispersion within 3 sem of 1, with >= 1e4
    conditioned realizations."""
    t0 = time.perf_counter()
    cfg = PRESETS["fig5"]()
    model = harness.build_model(cfg.model, cfg.params, cfg.gammas[0])
    outcomes, _ = harness.ensemble_outcomes(cfg, cfg.gammas[0], workers)
    ok, msgs, worst_z, n_cond = True, [], 0.0, 0
    for b in cfg.boxes:
        box = SpaceTimeBox(*b)
        st = conditioned_box_stats(outcomes, box)
        n_cond = st.n_traj_conditioned
        lam = oracle.model_box_rate(model, box)
        dur = box.duration
        worst_z = max(worst_z, abs(st.mean / dur - lam) / (st.sem_mean / dur))
        if not _within(st.mean / dur, lam, 3.0 * st.sem_mean / dur):
            ok = False
            msgs.append(f"mean b={b[3]}: {st.mean / dur:.3f} vs {lam:.3f}")
        if not _within(st.variance / dur, lam, 3.0 * st.sem_variance / dur):
            ok = False
            msgs.append(f"var b={b[3]}: {st.variance / dur:.3f} vs {lam:.3f}")
        if not _within(st.dispersion, 1.0, 3.0 * st.sem_dispersion):
            ok = False
            msgs.append(f"dispersion b={b[3]}: {st.dispersion:.3f} "
                        f"+-{3 * st.sem_dispersion:.3f}")
    if n_cond < 10000:
        ok = False
        msgs.append(f"only {n_cond} conditioned realizations")
    detail = "; ".join(msgs) if msgs else \
        f"5 boxes ok, n_cond={n_cond}, worst |z_mean|={worst_z:.2f}"
    return _result("unitary-spike-law", ok, detail, t0)


def _worst_z(rows):
    return max(abs(r.mean_per_time - r.lambda_theory) / r.sem_mean for r in rows)


def crit_thermal_spike_law(workers=1):
    t0 = time.perf_counter()
    cfg = PRESETS["fig6"]()
    rows = harness.run(cfg, workers=workers)
    ok, msgs = _check_boxes(rows, lambda r: r.lambda_theory)
    detail = "; ".join(msgs) if msgs else \
        f"5 boxes ok, n_cond={rows[0].n_conditioned}, worst |z_mean|={_worst_z(rows):.2f}"
    return _result("thermal-spike-law", ok, detail, t0)


def crit_measurement_spike_law(workers=1):
    t0 = time.perf_counter()
    cfg = PRESETS["fig7"]()
    rows = harness.run(cfg, workers=workers)
    ok, msgs = _check_boxes(rows, lambda r: r.lambda_theory)
    detail = "; ".join(msgs) if msgs else \
        f"5 boxes ok, n_cond={rows[0].n_conditioned}, worst |z_mean|={_worst_z(rows):.2f}"
    return _result("measurement-spike-law", ok, detail, t0)


def crit_jump_time_laws(workers=1):
    """First-passage means 1/(4 omega), 1/W-+ (and return 1/W+-), 1/gamma2,
    each within 3 sem over >= 1e3 passages, with exponential KS p > 0.01."""
    t0 = time.perf_counter()
    n = 1200
    ok, msgs = True, []

    um = models.collapse_unitary(models.UnitaryParams(1.0, 1e6))
    jumps, _ = renewal.passage_times(um, n, SEED)
    fp = first_passage_stats(jumps)
    ok, msgs = _passage_check(ok, msgs, "unitary", fp, 0.25)

    tm = models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e6))
    jumps, excess = renewal.passage_times(tm, n, SEED + 1)
    fp = first_passage_stats(jumps)
    ok, msgs = _passage_check(ok, msgs, "thermal 0->1", fp, 1.0 / 0.77)
    fr = first_passage_stats(excess)
    ok, msgs = _passage_check(ok, msgs, "thermal return", fr, 1.0 / 0.23)

    mm = models.collapse_measurement(models.MeasurementParams(1e6, 0.33, 1.0, 0.33))
    jumps, _ = renewal.passage_times(mm, n, SEED + 2)
    fp = first_passage_stats(jumps)
    ok, msgs = _passage_check(ok, msgs, "measurement 0->1", fp, 1.0)

    return _result("jump-time-laws", ok, "; ".join(msgs), t0)


def _passage_check(ok, msgs, name, fp, target):
    within = _within(fp["mean_jump_time"], target, 3.0 * fp["sem"])
    pv = fp["exp_fit_pvalue"]
    good = within and pv > 0.01
    msgs.append(f"{name}: mean {fp['mean_jump_time']:.4f} (target {target:.4f}), "
                f"KS p {pv:.3f}{'' if good else ' FAIL'}")
    return ok and good, msgs


def crit_oracle_agreement(workers=1):
    t0 = time.perf_counter()
    parts = [check_flows_vs_rk4(), check_survival_vs_quadrature(),
             check_laplace_triples(), check_survival_identity()]
    ok = all(p.passed for p in parts)
    return _result("oracle-agreement", ok,
                   "; ".join(f"{p.name}:{'ok' if p.passed else 'FAIL'}" for p in parts), t0)


def crit_asymptotic_generating(workers=1):
    t0 = time.perf_counter()
    r = check_asymptotic_convergence()
    return _result("asymptotic-generating-functions", r.passed, r.detail, t0)


def crit_method_equivalence(workers=1):
    """Euler (rule-based step) vs exact-event conditioned tip counts at rate
    1e4: two-sample KS at significance 0.01, 1e4 samples each."""
    t0 = time.perf_counter()
    box = SpaceTimeBox(0.0, 0.1, 0.01, 0.9)
    cfg_common = dict(model="thermal",
                      params={"w_minus_plus": 0.77, "w_plus_minus": 0.23},
                      gammas=[1e4], t_end=0.1, boxes=[(0.0, 0.1, 0.01, 0.9)],
                      n_realizations=10000, master_seed=SEED)
    exact_oc, _ = harness.ensemble_outcomes(
        ExperimentConfig(method="exact", **cfg_common), 1e4, workers)
    euler_oc, _ = harness.ensemble_outcomes(
        ExperimentConfig(method="euler", **cfg_common, dt=0.0), 1e4, workers)

    def counts(ocs):
        out = []
        for oc in ocs:
            jt = oc.jump_time
            if jt is not None and box.t0 < jt < box.t1:
                continue
            m = ((oc.tip_times > box.t0) & (oc.tip_times < box.t1)
                 & (oc.tip_heights > box.a) & (oc.tip_heights < box.b))
            out.append(int(np.count_nonzero(m)))
        return np.asarray(out)

    ce, cu = counts(exact_oc), counts(euler_oc)
    ks = sps.ks_2samp(ce, cu)
    ok = ks.pvalue > 0.01
    return _result("method-equivalence", ok,
                   f"KS D={ks.statistic:.4f} p={ks.pvalue:.3f} "
                   f"(exact mean {ce.mean():.3f}, euler mean {cu.mean():.3f})", t0)


def crit_conjecture_examples(workers=1):
    """General resetting drifts at rate 1e7 match |F(0)|(1/a - 1/b); the
    general-operator thermal model spikes from both ends with the from-zero
    law; the degenerate second-measurement variants give zero tips."""
    t0 = time.perf_counter()
    ok, msgs = True, []
    for preset, f0 in (("figA-cos", 1.0), ("figA-exp", 0.5)):
        cfg = PRESETS[preset]()
        rows = harness.run(cfg, workers=workers)
        good, m = _check_boxes(rows, lambda r: r.lambda_theory)
        ok &= good
        msgs.append(f"{preset}: {'ok (worst z %.2f)' % _worst_z(rows) if good else '; '.join(m)}")

    cfg9 = PRESETS["fig9"]()
    model9 = harness.build_model(cfg9.model, cfg9.params, cfg9.gammas[0])
    outcomes, extra = harness.ensemble_outcomes(cfg9, cfg9.gammas[0], workers)
    worst9 = 0.0
    for b in cfg9.boxes:
        box = SpaceTimeBox(*b)
        st = conditioned_box_stats(outcomes, box)
        lam = oracle.model_box_rate(model9, box)
        z = abs(st.mean / box.duration - lam) / (st.sem_mean / box.duration)
        worst9 = max(worst9, z)
        if z > 3.0:
            ok = False
            msgs.append(f"fig9 b={b[3]}: mean/t {st.mean / box.duration:.2f} vs {lam:.2f}")
    msgs.append(f"fig9 from-zero worst z {worst9:.2f}")
    n_up = extra.get("n_upper_tips", 0)
    if n_up < 10:
        ok = False
    msgs.append(f"upper-side tips: {n_up}")

    # eta2 = 1: tips vanish entirely
    cfg_e = ExperimentConfig(model="measurement",
                             params={"gamma2": 1.0, "eta1": 0.33, "eta2": 1.0},
                             gammas=[1e6], t_end=0.1,
                             boxes=[(0.0, 0.1, 0.01, 0.1)], n_realizations=20000,
                             master_seed=SEED)
    rows_e = harness.run(cfg_e, workers=workers)
    if not (rows_e[0].mean_per_time == 0.0):
        ok = False
    msgs.append(f"eta2=1 mean: {rows_e[0].mean_per_time}")

    # spontaneous absorption (n_a, n_b) = (0, 1): both channels reset to 0
    cfg_a = ExperimentConfig(model="measurement_general",
                             params={"gamma2": 1.0, "eta1": 0.33, "eta2": 0.33,
                                     "n_a": 0.0, "n_b": 1.0},
                             gammas=[1e6], t_end=0.1,
                             boxes=[(0.0, 0.1, 0.01, 0.1)], n_realizations=20000,
                             master_seed=SEED)
    rows_a = harness.run(cfg_a, workers=workers)
    if not (rows_a[0].mean_per_time == 0.0):
        ok = False
    msgs.append(f"absorption mean: {rows_a[0].mean_per_time}")
    return _result("conjecture-examples", ok, "; ".join(msgs), t0)


def crit_scaling_trends(workers=1):
    """Drive scaled as rate**alpha: the conditioned tip rate decreases over
    gamma for alpha = 0.4, increases for alpha = 0.6 (beyond combined 3 sem)
    and stays flat for alpha = 0.5."""
    t0 = time.perf_counter()
    d = SWEEP_ALPHA_DEFAULTS
    rows = harness.sweep_alpha(d["alphas"], d["gammas"], t_end=d["t_end"],
                               boxes=d["boxes"], master_seed=SEED, workers=workers)
    by = {}
    for r in rows:
        alpha = float(r.model.split("alpha")[1])
        by.setdefault((alpha, r.b), []).append(r)
    ok, msgs = True, []
    for (alpha, b), series in sorted(by.items()):
        series.sort(key=lambda r: r.gamma)
        vals = [r.mean_per_time for r in series]
        sems = [r.sem_mean for r in series]
        for i in range(len(vals) - 1):
            gap = vals[i + 1] - vals[i]
            band = 3.0 * math.hypot(sems[i], sems[i + 1])
            if alpha < 0.5 and not gap < -band:
                ok = False
                msgs.append(f"a={alpha} b={b}: not decreasing ({gap:+.3f} band {band:.3f})")
            elif alpha > 0.5 and not gap > band:
                ok = False
                msgs.append(f"a={alpha} b={b}: not increasing ({gap:+.3f} band {band:.3f})")
            elif alpha == 0.5 and not abs(gap) <= band:
                ok = False
                msgs.append(f"a={alpha} b={b}: drift {gap:+.3f} exceeds band {band:.3f}")
    return _result("scaling-trends", ok, "; ".join(msgs) if msgs else
                   "0.4 down, 0.5 flat, 0.6 up at every box edge", t0)


def crit_determinism(workers=1):
    """Identical config and seed produce byte-identical CSV for 1 vs 8
    workers."""
    t0 = time.perf_counter()
    cfg = ExperimentConfig(model="thermal",
                           params={"w_minus_plus": 0.77, "w_plus_minus": 0.23},
                           gammas=[1e4], t_end=0.1,
                           boxes=[(0.0, 0.1, 0.01, 0.05), (0.0, 0.1, 0.02, 0.1)],
                           n_realizations=400, master_seed=SEED)
    csv1 = harness.rows_to_csv(harness.run(cfg, workers=1))
    csv8 = harness.rows_to_csv(harness.run(cfg, workers=8))
    ok = csv1 == csv8
    return _result("worker-determinism", ok,
                   f"{len(csv1)} bytes, identical={ok}", t0)


FAST_CHECKS = [
    check_intensity_antiderivatives,
    check_poisson_pmf,
    check_flows_vs_rk4,
    check_survival_vs_quadrature,
    check_laplace_triples,
    check_survival_identity,
    check_z_series,
    check_asymptotic_convergence,
    check_laplace_inversion,
    check_fixed_points,
    check_level_times,
    check_zeno_and_classification,
]

FULL_CHECKS = [
    crit_unitary_spike_law,
    crit_thermal_spike_law,
    crit_measurement_spike_law,
    crit_jump_time_laws,
    crit_oracle_agreement,
    crit_asymptotic_generating,
    crit_method_equivalence,
    crit_conjecture_examples,
    crit_scaling_trends,
    crit_determinism,
]


def run_suite(suite: str = "fast", workers: int = 1, report=print):
    """Run the named suite; returns the list of CheckResults."""
    if suite == "fast":
        checks = [(fn, {}) for fn in FAST_CHECKS]
    elif suite == "full":
        checks = [(fn, {}) for fn in FAST_CHECKS] + \
                 [(fn, {"workers": workers}) for fn in FULL_CHECKS]
    else:
        raise ValueError(f"unknown suite {suite!r}; use 'fast' or 'full'")
    results = []
    for fn, kwargs in checks:
        r = fn(**kwargs)
        results.append(r)
        report(f"[{'PASS' if r.passed else 'FAIL'}] {r.name} ({r.elapsed_s:.1f}s): {r.detail}")
    return results
