"""Monte Carlo engine and analytic oracles for one-dimensional
piecewise-deterministic Markov processes driven by Poisson resetting noise,
with conditioned counting statistics of the excursion ("spike") tips that
decorate the pointer-state jump process at large measurement rates."""

from .models import (GeneralParams, MeasurementParams, Resetting,
                     ThermalParams, UnitaryParams, classify_resetting,
                     collapse_measurement, collapse_measurement_general,
                     collapse_thermal, collapse_thermal_general,
                     collapse_unitary, collapse_unitary_bloch_full,
                     general_resetting, time_to_level)
from .pdmp import (ClickEvent, EventLog, PdmpModel, PoissonChannel, RngStream,
                   flow, sample_click_time, simulate_euler, simulate_exact,
                   state_at, survival)
from .stats import (CountStats, SpaceTimeBox, TrajectoryOutcome,
                    conditioned_box_stats, detect_jump, extract_prespikes,
                    first_passage_stats, outcome_from_log,
                    sample_limit_spike_process)

__version__ = "0.1.0"
