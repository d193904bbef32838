"""Time-bin entangled photon pairs from a cooled fiber: rate model and Monte Carlo."""

from .fringe import FitResult, FringeCurve, fit_visibility, sweep
from .link import ChannelParams, DetectorParams, FrequencyPlan, transmittance
from .montecarlo import Scenario, TallyCounters, coincidence_rate_hz, expected_tallies, simulate
from .raman import RamanParams, anti_stokes_mean, scale_noise_to_temperature, stokes_mean
from .rates import (
    SourceBrightness,
    accidental_rate,
    bell_violation_margin,
    correlated_rate,
    estimate_mu_c,
    singles_rate,
    visibility,
)
from .timebin_state import (
    JointOutcomeDistribution,
    PhaseConfig,
    SingleOutcome,
    coincidence_probability_slot2,
    joint_outcome_distribution,
    single_photon_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelParams", "DetectorParams", "FitResult", "FrequencyPlan", "FringeCurve",
    "JointOutcomeDistribution", "PhaseConfig", "RamanParams", "Scenario", "SingleOutcome",
    "SourceBrightness", "TallyCounters", "accidental_rate", "anti_stokes_mean",
    "bell_violation_margin", "coincidence_probability_slot2", "coincidence_rate_hz",
    "correlated_rate", "estimate_mu_c", "expected_tallies", "fit_visibility",
    "joint_outcome_distribution", "scale_noise_to_temperature", "simulate",
    "single_photon_distribution", "singles_rate", "stokes_mean", "sweep", "transmittance",
    "visibility",
]
