"""Acceptance gate: every primary criterion at its stated scale and
tolerance.  Each test prints one pass/fail line; run with `pytest -s
tests/test_acceptance.py` (or `spikes verify --suite full`) to see them.
The Monte Carlo criteria run at the documented sample sizes and take tens
of minutes in total on one core.
"""

import pytest

from spikes import verify


def _run(fn, **kw):
    r = fn(**kw)
    print(f"\n[{'PASS' if r.passed else 'FAIL'}] {r.name} ({r.elapsed_s:.1f}s): {r.detail}")
    assert r.passed, f"{r.name}: {r.detail}"


# --- criterion 1: angular-model counting law at rate 1e6 ------------------
def test_criterion_1_unitary_spike_law():
    _run(verify.crit_unitary_spike_law)


# --- criterion 2: thermal counting law at rate 1e6, 1e5 realizations ------
def test_criterion_2_thermal_spike_law():
    _run(verify.crit_thermal_spike_law)


# --- criterion 3: two-measurement counting law -----------------------------
def test_criterion_3_measurement_spike_law():
    _run(verify.crit_measurement_spike_law)


# --- criterion 4: pointer jump-time laws -----------------------------------
def test_criterion_4_jump_time_laws():
    _run(verify.crit_jump_time_laws)


# --- criterion 5: deterministic oracle agreement ---------------------------
def test_criterion_5_oracle_agreement():
    _run(verify.crit_oracle_agreement)


# --- criterion 6: generating-function limits -------------------------------
def test_criterion_6_asymptotic_generating_functions():
    _run(verify.crit_asymptotic_generating)


# --- criterion 7: Euler vs exact-event equivalence --------------------------
def test_criterion_7_method_equivalence():
    _run(verify.crit_method_equivalence)


# --- criterion 8: conjecture examples ---------------------------------------
def test_criterion_8_conjecture_examples():
    _run(verify.crit_conjecture_examples)


# --- criterion 9: drive-scaling trends --------------------------------------
def test_criterion_9_scaling_trends():
    _run(verify.crit_scaling_trends)


# --- criterion 10: worker determinism ----------------------------------------
def test_criterion_10_determinism():
    _run(verify.crit_determinism)
