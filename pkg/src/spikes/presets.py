"""Canned experiment configurations for the headline figures."""

from __future__ import annotations

import math

from .errors import ConfigurationError
from .harness import ExperimentConfig

_B_SMALL = (0.02, 0.04, 0.06, 0.08, 0.10)


def _boxes(a, bs, t=0.1):
    return [(0.0, t, a, b) for b in bs]


def _fig5():
    # angular model: boxes (0, b) x (0, 0.1); ~2/3 of runs survive the
    # no-jump conditioning, so 16500 keeps >= 1e4 conditioned realizations
    return ExperimentConfig(
        model="unitary", params={"omega": 1.0}, gammas=[1e6], t_end=0.1,
        boxes=_boxes(0.0, (0.5, 1.0, 1.5, 2.0, 2.5)),
        n_realizations=16500, label="unitary")


def _fig6():
    return ExperimentConfig(
        model="thermal",
        params={"w_minus_plus": 0.77, "w_plus_minus": 0.23, "eta": 1.0},
        gammas=[1e6], t_end=0.1, boxes=_boxes(0.01, _B_SMALL),
        n_realizations=100000, label="thermal")


def _fig7():
    return ExperimentConfig(
        model="measurement",
        params={"gamma2": 1.0, "eta1": 0.33, "eta2": 0.33},
        gammas=[1e6], t_end=0.1, boxes=_boxes(0.01, _B_SMALL),
        n_realizations=100000, label="measurement")


def _fig9():
    return ExperimentConfig(
        model="thermal_general",
        params={"w_minus_plus": 0.77, "w_plus_minus": 0.23, "eta": 1.0,
                "n_plus": math.sqrt(0.2), "n_minus": math.sqrt(0.4)},
        gammas=[1e7], t_end=0.1, boxes=_boxes(0.01, _B_SMALL),
        n_realizations=10000, label="thermal_general")


def _figA_cos():
    return ExperimentConfig(
        model="general_resetting", params={"drift": "cos50", "chi": "quartic"},
        gammas=[1e7], t_end=0.1, boxes=_boxes(0.01, _B_SMALL),
        n_realizations=10000, label="general-cos")


def _figA_exp():
    return ExperimentConfig(
        model="general_resetting",
        params={"drift": "exp_minus_half", "chi": "quartic"},
        gammas=[1e7], t_end=0.1, boxes=_boxes(0.01, _B_SMALL),
        n_realizations=10000, label="general-exp")


PRESETS = {
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig9": _fig9,
    "figA-cos": _figA_cos,
    "figA-exp": _figA_exp,
}

# preset groups runnable under one name
GROUPS = {
    "figA": ("figA-cos", "figA-exp"),
}

# trajectory presets (time-series dumps rather than box statistics)
TRAJECTORY_PRESETS = {
    # inefficient angular detection: 3-component state, first-order scheme
    "fig8": {"model": "unitary_bloch",
             "params": {"omega": 1.0, "eta": 0.33}, "gamma": 1e4,
             "dt": 1e-6, "t_end": 3.0, "stride": 100},
}

SWEEP_ALPHA_DEFAULTS = {
    "alphas": (0.4, 0.5, 0.6),
    "gammas": (1e4, 1e5, 1e6),
    "t_end": 0.1,
    "boxes": ((0.0, 0.1, 0.0, 1.0),),
}


def get_preset(name: str):
    if name in PRESETS:
        return [PRESETS[name]()]
    if name in GROUPS:
        return [PRESETS[n]() for n in GROUPS[name]]
    raise ConfigurationError(
        f"unknown preset {name!r}; available: {sorted(PRESETS) + sorted(GROUPS)}")
