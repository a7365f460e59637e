"""The fast renewal/chain/euler engines against the reference integrators
and closed laws."""

import math

import numpy as np
import pytest
from scipy import stats as sps

from spikes import harness, models, pdmp, renewal
from spikes.pdmp import RngStream
from spikes.stats import SpaceTimeBox, conditioned_box_stats, outcome_from_log


class TestWaitLaws:
    def test_thermal_mixture_vs_survival(self):
        m = models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e3))
        rng = np.random.default_rng(1)
        sess = renewal.reset_wait_session(m, rng)
        w = np.concatenate([sess.draw(8192) for _ in range(6)])
        ks = sps.ks_1samp(w, lambda t: 1.0 - m.closed_survival(0.0, t))
        assert ks.pvalue > 0.01

    def test_unitary_rejection_vs_survival(self):
        m = models.collapse_unitary(models.UnitaryParams(1.0, 300.0))
        rng = np.random.default_rng(2)
        sess = renewal.reset_wait_session(m, rng)
        w = np.concatenate([sess.draw(8192) for _ in range(8)])
        ks = sps.ks_1samp(w, lambda t: 1.0 - m.closed_survival(math.pi, t))
        assert ks.pvalue > 0.01

    def test_measurement_atom_mass(self):
        m = models.collapse_measurement(models.MeasurementParams(1e3, 1.0, 1.0, 0.7))
        rng = np.random.default_rng(3)
        sess = renewal.reset_wait_session(m, rng)
        w = np.concatenate([sess.draw(8192) for _ in range(40)])
        p_emp = np.mean(np.isinf(w))
        p_th = -m.aux.o / (1.0 - m.aux.o)
        assert abs(p_emp - p_th) < 4.0 * math.sqrt(p_th / w.size)

    def test_tabulated_survival_vs_engine(self):
        gp = models.GeneralParams(drift=harness.DRIFT_REGISTRY["cos50"],
                                  chi=harness.CHI_REGISTRY["quartic"], gamma=1e4)
        gm = models.general_resetting(gp)
        law = renewal.tabulated_law(gm)
        for t in (1e-4, 1e-3, 5e-3):
            assert float(law.survival(t)) == pytest.approx(
                pdmp.survival(gm, 0.0, t), rel=5e-7)
        rng = np.random.default_rng(4)
        w = np.concatenate([renewal.TabulatedSession(rng, law).draw(8192)
                            for _ in range(4)])
        ks = sps.ks_1samp(w, lambda t: 1.0 - law.survival(t))
        assert ks.pvalue > 0.01


class TestWindowEngineVsExact:
    def test_outcomes_match_simulate_exact_distribution(self):
        # same tip/jump statistics as the event-driven reference at small rate
        m = models.collapse_thermal(models.ThermalParams(0.77, 0.23, 400.0))
        boxes = [SpaceTimeBox(0.0, 1.0, 0.05, 0.9)]
        fast = renewal.window_outcomes(m, boxes, 1.0, 800, master_seed=51,
                                       stop_after_jump=False)
        slow = [outcome_from_log(pdmp.simulate_exact(m, 0.0, 1.0, RngStream(97, i)), m)
                for i in range(800)]

        def counts(ocs):
            box = boxes[0]
            out = []
            for oc in ocs:
                if oc.jump_time is not None and box.t0 < oc.jump_time < box.t1:
                    continue
                mask = ((oc.tip_times > box.t0) & (oc.tip_times < box.t1)
                        & (oc.tip_heights > box.a) & (oc.tip_heights < box.b))
                out.append(int(mask.sum()))
            return np.array(out)

        ks = sps.ks_2samp(counts(fast), counts(slow))
        assert ks.pvalue > 0.01
        # jump fractions agree
        jf = np.mean([oc.jump_time is not None for oc in fast])
        js = np.mean([oc.jump_time is not None for oc in slow])
        assert abs(jf - js) < 4.0 * math.sqrt(js * (1 - js) / 800) + 1e-9

    def test_measurement_channel2_jumps(self):
        m = models.collapse_measurement(models.MeasurementParams(500.0, 1.0, 2.0, 0.5))
        ocs = renewal.window_outcomes(m, [SpaceTimeBox(0, 1, 0.05, 0.9)], 1.0,
                                      2000, master_seed=8, stop_after_jump=False)
        jumps = np.array([oc.jump_time for oc in ocs if oc.jump_time is not None])
        # jump rate gamma2 = 2: P(jump before 1) = 1 - e^-2
        frac = jumps.size / 2000
        p = 1 - math.exp(-2.0)
        assert abs(frac - p) < 4.0 * math.sqrt(p * (1 - p) / 2000)

    def test_deterministic_in_index(self):
        m = models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e4))
        boxes = [SpaceTimeBox(0.0, 0.1, 0.01, 0.5)]
        a = renewal.window_outcomes(m, boxes, 0.1, 50, master_seed=5)
        b = renewal.window_outcomes(m, boxes, 0.1, 50, master_seed=5)
        c = renewal.window_outcomes(m, boxes, 0.1, 30, master_seed=5,
                                    index_offset=20)
        for x, y in zip(a, b):
            assert np.array_equal(x.tip_times, y.tip_times)
            assert x.jump_time == y.jump_time
        for x, y in zip(a[20:], c):
            assert np.array_equal(x.tip_times, y.tip_times)


class TestPassages:
    def test_unitary_mean(self):
        m = models.collapse_unitary(models.UnitaryParams(1.0, 1e4))
        jumps, _ = renewal.passage_times(m, 400, master_seed=77)
        sem = jumps.std(ddof=1) / math.sqrt(jumps.size)
        assert abs(jumps.mean() - 0.25) < 3.5 * sem

    def test_thermal_forward_and_return(self):
        m = models.collapse_thermal(models.ThermalParams(0.77, 0.23, 1e4))
        jumps, excess = renewal.passage_times(m, 400, master_seed=78)
        sem_j = jumps.std(ddof=1) / math.sqrt(jumps.size)
        assert abs(jumps.mean() - 1.0 / 0.77) < 3.5 * sem_j
        sem_r = excess.std(ddof=1) / math.sqrt(excess.size)
        assert abs(excess.mean() - 1.0 / 0.23) < 3.5 * sem_r


class TestEulerEngine:
    def test_counts_match_exact_at_moderate_rate(self):
        cfg = dict(model="thermal",
                   params={"w_minus_plus": 0.77, "w_plus_minus": 0.23},
                   gammas=[300.0], t_end=0.5, boxes=[(0.0, 0.5, 0.05, 0.9)],
                   n_realizations=1500, master_seed=13)
        ex, _ = harness.ensemble_outcomes(
            harness.ExperimentConfig(method="exact", **cfg), 300.0, 1)
        eu, _ = harness.ensemble_outcomes(
            harness.ExperimentConfig(method="euler", **cfg), 300.0, 1)
        box = SpaceTimeBox(0.0, 0.5, 0.05, 0.9)
        se = conditioned_box_stats(ex, box)
        su = conditioned_box_stats(eu, box)
        assert abs(se.mean - su.mean) < 3.0 * math.hypot(se.sem_mean, su.sem_mean)

    def test_unitary_euler_tips(self):
        cfg = harness.ExperimentConfig(
            model="unitary", params={"omega": 1.0}, gammas=[400.0], method="euler",
            t_end=0.5, boxes=[(0.0, 0.5, 0.0, 2.0)], n_realizations=400,
            master_seed=4)
        ocs, _ = harness.ensemble_outcomes(cfg, 400.0, 1)
        st = conditioned_box_stats(ocs, SpaceTimeBox(0.0, 0.5, 0.0, 2.0))
        assert st.mean > 0


class TestChainEngine:
    def test_reduces_to_thermal_counts(self):
        # resetting entries: the chain engine must agree with the renewal one
        p_reset = models.ThermalParams(0.77, 0.23, 1e4, n_plus=0.0, n_minus=1.0)
        mt = models.collapse_thermal(p_reset)
        boxes = [SpaceTimeBox(0.0, 0.1, 0.01, 0.5)]
        fast = renewal.window_outcomes(mt, boxes, 0.1, 3000, master_seed=3,
                                       stop_after_jump=False)
        mg = models.collapse_thermal_general(p_reset)
        chain, _ = renewal.chain_outcomes(mg, boxes, 0.1, 3000, master_seed=303)
        sf = conditioned_box_stats(fast, boxes[0])
        sc = conditioned_box_stats(chain, boxes[0])
        assert abs(sf.mean - sc.mean) < 3.0 * math.hypot(sf.sem_mean, sc.sem_mean)

    def test_two_sided_spiking_detected(self):
        tg = models.collapse_thermal_general(models.ThermalParams(
            0.77, 0.23, 1e5, n_plus=math.sqrt(0.2), n_minus=math.sqrt(0.4)))
        boxes = [SpaceTimeBox(0.0, 0.1, 0.01, 0.1)]
        ocs, n_up = renewal.chain_outcomes(tg, boxes, 0.1, 1500, master_seed=7)
        st = conditioned_box_stats(ocs, boxes[0])
        lam = 0.77 * (1 / 0.01 - 1 / 0.1)
        assert abs(st.mean / 0.1 - lam) < 4.0 * st.sem_mean / 0.1 + 0.02 * lam
        assert n_up > 0


class TestIntensityConvergence:
    def test_error_nonincreasing_in_rate(self):
        """|empirical mean/t - closed box rate| shrinks with the measurement
        rate, within combined statistical error, for all three models."""
        from spikes.oracle import model_box_rate
        cases = [
            ("unitary", lambda g: models.collapse_unitary(models.UnitaryParams(1.0, g)),
             SpaceTimeBox(0.0, 0.1, 0.0, 2.0)),
            ("thermal", lambda g: models.collapse_thermal(
                models.ThermalParams(0.77, 0.23, g)), SpaceTimeBox(0.0, 0.1, 0.01, 0.1)),
            ("measurement", lambda g: models.collapse_measurement(
                models.MeasurementParams(g, 0.33, 1.0, 0.33)),
             SpaceTimeBox(0.0, 0.1, 0.01, 0.1)),
        ]
        for name, build, box in cases:
            errs, sems = [], []
            for g in (1e4, 1e5, 1e6):
                m = build(g)
                ocs = renewal.window_outcomes(m, [box], 0.1, 3000, master_seed=61)
                st = conditioned_box_stats(ocs, box)
                lam = model_box_rate(m, box)
                errs.append(abs(st.mean / box.duration - lam))
                sems.append(st.sem_mean / box.duration)
            for k in range(len(errs) - 1):
                band = 3.0 * math.hypot(sems[k], sems[k + 1])
                assert errs[k + 1] <= errs[k] + band, \
                    f"{name}: |err| grew {errs[k]:.3f} -> {errs[k + 1]:.3f} (band {band:.3f})"
