"""Closed-form coincidence rates, visibility and the inverse estimate of mu_c.

All rates here are probabilities per frame (one double pulse per detector
gate). Multiply by the gate rate to get hertz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NoSolutionError, ScenarioError, UndefinedVisibilityError

BELL_VISIBILITY = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class SourceBrightness:
    """Mean photon numbers per pump pulse.

    Attributes:
        mu_c: correlated pairs.
        mu_ns: noise photons in the signal channel.
        mu_ni: noise photons in the idler channel.
    """

    mu_c: float
    mu_ns: float = 0.0
    mu_ni: float = 0.0

    def __post_init__(self):
        for name in ("mu_c", "mu_ns", "mu_ni"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ScenarioError(f"{name} must be finite and >= 0, got {value}")

    @property
    def mu_s(self) -> float:
        return self.mu_c + self.mu_ns

    @property
    def mu_i(self) -> float:
        return self.mu_c + self.mu_ni

    @classmethod
    def from_totals(cls, mu_c: float, mu_s: float, mu_i: float) -> "SourceBrightness":
        """Split measured totals into correlated and noise parts."""
        return cls(mu_c, mu_s - mu_c, mu_i - mu_c)


def correlated_rate(mu_c: float, alpha_s: float, alpha_i: float) -> float:
    """Coincidence probability per frame from true pairs at constructive interference."""
    return mu_c / 4.0 * alpha_s * alpha_i


def _accidental(mu_s, mu_i, alpha_s, alpha_i, d_s, d_i):
    return (mu_s * alpha_s / 2.0 + d_s) * (mu_i * alpha_i / 2.0 + d_i)


def accidental_rate(
    brightness: SourceBrightness, alpha_s: float, alpha_i: float, d_s: float, d_i: float
) -> float:
    """Accidental coincidence probability per frame, without the small-dark approximation."""
    return _accidental(brightness.mu_s, brightness.mu_i, alpha_s, alpha_i, d_s, d_i)


def visibility(r_c: float, r_acc: float) -> float:
    """Fringe visibility ``R_c / (R_c + 2 R_acc)``.

    This is (max - min) / (max + min) of ``R_acc + (R_c / 2)(1 + cos(theta - phi))``.
    """
    if r_c < 0 or r_acc < 0:
        raise ValueError("rates must be non-negative")
    if r_c == 0 and r_acc == 0:
        raise UndefinedVisibilityError("visibility undefined with no coincidences at all")
    return r_c / (r_c + 2.0 * r_acc)


def fringe_rate(r_c: float, r_acc: float, theta: float, phi: float = 0.0) -> float:
    """Expected slot-2 coincidence probability at total analyzer phase ``theta``."""
    return r_acc + 0.5 * r_c * (1.0 + math.cos(theta - phi))


def bell_violation_margin(v: float) -> float:
    """Distance of ``v`` above the 1/sqrt(2) visibility threshold (negative below it)."""
    return v - BELL_VISIBILITY


def singles_rate(mu_x: float, alpha_x: float, d_x: float, gate_rate_hz: float) -> float:
    """Port-a singles rate in Hz.

    Two pulses per frame each reach port a with probability 1/2, plus one dark
    count opportunity per gate.
    """
    return (mu_x * alpha_x + d_x) * gate_rate_hz


def estimate_mu_c(
    v_measured: float,
    mu_s: float,
    mu_i: float,
    alpha_s: float,
    alpha_i: float,
    d_s: float,
    d_i: float,
    tol: float = 1e-12,
) -> float:
    """Correlated pair number that reproduces a measured visibility.

    ``mu_s`` and ``mu_i`` are held at their measured totals, so the accidental
    rate is fixed and the visibility rises monotonically with ``mu_c``. The
    root is bracketed on ``[0, 1]`` and found by bisection.
    """
    if not 0.0 < v_measured < 1.0:
        if v_measured == 1.0:
            raise NoSolutionError("visibility 1 needs zero accidentals")
        raise ValueError(f"v_measured must lie in (0, 1), got {v_measured}")
    if not (mu_s > 0 and mu_i > 0):
        raise ValueError("mu_s and mu_i must be positive")
    r_acc = _accidental(mu_s, mu_i, alpha_s, alpha_i, d_s, d_i)
    if r_acc == 0:
        raise NoSolutionError("with zero accidentals every mu_c > 0 gives visibility 1")

    def excess(mu_c: float) -> float:
        return visibility(correlated_rate(mu_c, alpha_s, alpha_i), r_acc) - v_measured

    lo, hi = 0.0, 1.0
    if excess(hi) < 0:
        raise NoSolutionError(f"visibility {v_measured} unreachable with mu_c <= 1")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
