"""Phase sweeps of the slot-2 coincidence rate and sinusoidal visibility fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Literal, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DegenerateFitError
from .montecarlo import Scenario, simulate
from .rates import accidental_rate, correlated_rate, fringe_rate, singles_rate

Mode = Literal["analytic", "montecarlo"]


@dataclass
class FringeCurve:
    """Coincidence probability per frame versus total analyzer phase.

    ``singles_signal_hz`` and ``singles_idler_hz`` ride along so the curve can
    also be expressed per start pulse, as in a start-stop measurement.
    """

    theta: np.ndarray
    rate: np.ndarray
    sigma: np.ndarray
    singles_signal_hz: np.ndarray
    singles_idler_hz: np.ndarray
    gate_rate_hz: float = 4e6
    metadata: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, float)
        self.rate = np.asarray(self.rate, float)
        self.sigma = np.asarray(self.sigma, float)
        self.singles_signal_hz = np.asarray(self.singles_signal_hz, float)
        self.singles_idler_hz = np.asarray(self.singles_idler_hz, float)
        n = len(self.theta)
        for name in ("rate", "sigma", "singles_signal_hz", "singles_idler_hz"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has {len(getattr(self, name))} entries, expected {n}")
        if n and np.any(np.diff(self.theta) <= 0):
            raise ValueError("theta must be strictly increasing")
        if np.any(self.sigma < 0):
            raise ValueError("sigma must be non-negative")

    @property
    def points(self) -> List[tuple]:
        return list(zip(self.theta.tolist(), self.rate.tolist(), self.sigma.tolist()))

    def per_start_pulse(self) -> np.ndarray:
        """Coincidences per signal click instead of per frame."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(
                self.singles_signal_hz > 0, self.rate * self.gate_rate_hz / self.singles_signal_hz, 0.0
            )


def sweep(
    s: Scenario,
    thetas: Sequence[float],
    mode: Mode = "analytic",
    workers: Optional[int] = None,
) -> FringeCurve:
    """Scan the total analyzer phase, holding ``theta_s`` and moving ``theta_i``.

    Monte Carlo points use ``s.frames`` frames each and a seed derived from
    ``(s.seed, point index)``, so points are reproducible and independent of
    evaluation order.
    """
    thetas = np.asarray(thetas, float)
    if thetas.ndim != 1 or len(thetas) == 0:
        raise ValueError("thetas must be a non-empty 1-d sequence")
    if np.any(np.diff(thetas) <= 0):
        raise ValueError("thetas must be strictly increasing")
    gate = s.gate_rate_hz
    n = len(thetas)
    rate, sigma = np.zeros(n), np.zeros(n)
    sing_s, sing_i = np.zeros(n), np.zeros(n)
    b = s.brightness
    a_s, a_i = s.alpha_s, s.alpha_i
    d_s = s.signal_channel.detector.dark_count_per_gate
    d_i = s.idler_channel.detector.dark_count_per_gate

    if mode == "analytic":
        r_c = correlated_rate(b.mu_c, a_s, a_i)
        r_acc = accidental_rate(b, a_s, a_i, d_s, d_i)
        rate[:] = [fringe_rate(r_c, r_acc, t, s.phases.phi) for t in thetas]
        sing_s[:] = singles_rate(b.mu_s, a_s, d_s, gate)
        sing_i[:] = singles_rate(b.mu_i, a_i, d_i, gate)
    elif mode == "montecarlo":
        for k, theta in enumerate(thetas):
            point = s.replace(phases=s.phases.with_total_theta(float(theta)), seed=point_seed(s.seed, k))
            t = simulate(point, workers=workers)
            count = t.coincidences(2, 2)
            rate[k] = count / t.frames_run
            sigma[k] = math.sqrt(count) / t.frames_run
            sing_s[k] = t.singles_signal / t.frames_run * gate
            sing_i[k] = t.singles_idler / t.frames_run * gate
    else:
        raise ValueError(f"mode must be 'analytic' or 'montecarlo', got {mode!r}")

    meta = {"mode": mode, "frames_per_point": s.frames if mode == "montecarlo" else 0, "seed": s.seed}
    return FringeCurve(thetas, rate, sigma, sing_s, sing_i, gate, meta)


def point_seed(seed: int, index: int) -> int:
    """64-bit seed of sweep point ``index``."""
    ss = np.random.SeedSequence(seed, spawn_key=(1, index))
    return int(ss.generate_state(1, np.uint64)[0])


class FitResult(NamedTuple):
    visibility: float
    theta0: float
    offset: float
    sigma_visibility: float


def fit_visibility(curve: FringeCurve) -> FitResult:
    """Fit ``y = C (1 + V cos(theta - theta0))`` by linear least squares.

    The model is solved as ``y = C + A cos(theta) + B sin(theta)`` with
    ``V = hypot(A, B) / C``. All points carry equal weight: inverse-variance
    weights built from observed counts bias low-count fringes. The point sigmas
    enter only through the sandwich covariance of the coefficients, pushed
    through the gradient of V. V is clipped to ``[0, 1]``.
    """
    theta, y, sig = curve.theta, curve.rate, curve.sigma
    if len(theta) < 3:
        raise DegenerateFitError("need at least 3 points")
    X = np.column_stack([np.ones_like(theta), np.cos(theta), np.sin(theta)])
    if np.linalg.matrix_rank(X) < 3:
        raise DegenerateFitError("phases do not resolve both quadratures")
    M = np.linalg.solve(X.T @ X, X.T)  # coefficients = M @ y
    c, a, b = M @ y
    if not c > 0:
        raise DegenerateFitError(f"fitted offset {c:.3g} is not positive")
    cov = (M * sig**2) @ M.T
    amp = math.hypot(a, b)
    v = amp / c
    if amp > 0:
        grad = np.array([-v / c, a / (c * amp), b / (c * amp)])
        var_v = float(grad @ cov @ grad)
    else:
        var_v = float(cov[1, 1] + cov[2, 2]) / (2 * c * c)
    theta0 = math.atan2(b, a) if amp > 0 else 0.0
    return FitResult(float(min(v, 1.0)), theta0, float(c), math.sqrt(max(var_v, 0.0)))
