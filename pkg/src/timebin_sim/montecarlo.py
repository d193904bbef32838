"""Gate-by-gate Monte Carlo of the pair source, links and gated detectors.

Each frame is one double pulse and one detector gate covering output slots
1, 2 and 3. Per frame:

1. pairs ~ Poisson(2 mu_c); each pair picks a joint outcome from
   :func:`~timebin_sim.timebin_state.joint_outcome_distribution` and each
   photon survives its channel with probability ``alpha``;
2. every input pulse of each channel carries Poisson(mu_n) noise photons,
   routed by :func:`~timebin_sim.timebin_state.single_photon_distribution`
   and thinned the same way;
3. each detector may dark-count in each slot with probability ``d``;
4. only port-a detectors exist; a slot clicks if anything lands there;
5. every (signal slot, idler slot) pair of clicks in the frame is a coincidence.

Sampling is sparse. Poisson counts are thinned to port-a detections before
they are drawn, and a block of frames receives a single Poisson (or binomial)
total that is scattered over frames uniformly. Both steps are exact
identities for independent per-frame draws, and they make the cost scale with
detected events rather than frames.

Frames are grouped into fixed blocks of :data:`BLOCK_FRAMES`. Block ``b``
draws from a Philox stream keyed by ``(seed, b)``, so tallies are a function
of ``(seed, frames)`` only and do not depend on how many workers run the
blocks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .errors import ScenarioError
from .link import ChannelParams, transmittance
from .rates import SourceBrightness
from .timebin_state import (
    INPUT_SLOTS,
    SLOTS,
    PhaseConfig,
    SingleOutcome,
    joint_outcome_distribution,
    single_photon_distribution,
)

BLOCK_FRAMES = 1 << 20
THREADS_ENV = "TIMEBIN_SIM_THREADS"
_SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class Scenario:
    brightness: SourceBrightness
    phases: PhaseConfig
    signal_channel: ChannelParams
    idler_channel: ChannelParams
    frames: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.frames, bool) or not isinstance(self.frames, (int, np.integer)):
            raise ScenarioError(f"frames must be an integer, got {self.frames!r}")
        if self.frames < 1:
            raise ScenarioError(f"frames must be >= 1, got {self.frames}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < _SEED_LIMIT:
            raise ScenarioError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")

    @property
    def alpha_s(self) -> float:
        return transmittance(self.signal_channel)

    @property
    def alpha_i(self) -> float:
        return transmittance(self.idler_channel)

    @property
    def gate_rate_hz(self) -> float:
        return self.signal_channel.detector.gate_rate_hz

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)


@dataclass
class TallyCounters:
    """Singles per slot and the start-stop (signal slot, idler slot) histogram."""

    singles_signal_by_slot: np.ndarray = field(default_factory=lambda: np.zeros(3, np.int64))
    singles_idler_by_slot: np.ndarray = field(default_factory=lambda: np.zeros(3, np.int64))
    coincidences_by_slot_pair: np.ndarray = field(
        default_factory=lambda: np.zeros((3, 3), np.int64)
    )
    frames_run: int = 0

    @property
    def singles_signal(self) -> int:
        return int(self.singles_signal_by_slot.sum())

    @property
    def singles_idler(self) -> int:
        return int(self.singles_idler_by_slot.sum())

    def coincidences(self, slot_s: int, slot_i: int) -> int:
        return int(self.coincidences_by_slot_pair[slot_s - 1, slot_i - 1])

    def __add__(self, other: "TallyCounters") -> "TallyCounters":
        return TallyCounters(
            self.singles_signal_by_slot + other.singles_signal_by_slot,
            self.singles_idler_by_slot + other.singles_idler_by_slot,
            self.coincidences_by_slot_pair + other.coincidences_by_slot_pair,
            self.frames_run + other.frames_run,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, TallyCounters):
            return NotImplemented
        return (
            self.frames_run == other.frames_run
            and np.array_equal(self.singles_signal_by_slot, other.singles_signal_by_slot)
            and np.array_equal(self.singles_idler_by_slot, other.singles_idler_by_slot)
            and np.array_equal(self.coincidences_by_slot_pair, other.coincidences_by_slot_pair)
        )


def coincidence_rate_hz(t: TallyCounters, slot_pair: Tuple[int, int], gate_rate_hz: float) -> float:
    if t.frames_run < 1:
        raise ValueError("no frames were run")
    return t.coincidences(*slot_pair) / t.frames_run * gate_rate_hz


@dataclass(frozen=True)
class _DetectionPlan:
    """Per-frame means of port-a detection events, derived once per scenario."""

    pair_rate: float  # pairs per frame with at least one detected photon
    pair_cdf: np.ndarray  # cumulative over the 15 detected (signal, idler) categories
    pair_sig_slot: np.ndarray  # 0 = not detected, else output slot
    pair_idl_slot: np.ndarray
    noise_rate_s: float
    noise_cdf_s: np.ndarray  # over output slots 1..3
    noise_rate_i: float
    noise_cdf_i: np.ndarray
    dark_s: float
    dark_i: float


def _pair_category_matrix(phases: PhaseConfig, alpha_s: float, alpha_i: float) -> np.ndarray:
    """P(signal outcome, idler outcome) for one pair, with 0 meaning no click.

    Rows and columns are ``[none, slot 1, slot 2, slot 3]``.
    """
    q = np.zeros((4, 4))
    for (s, i), p in joint_outcome_distribution(phases).probabilities.items():
        ks = s.slot if s.port == "a" else 0
        ki = i.slot if i.port == "a" else 0
        if ks and ki:
            q[ks, ki] += p * alpha_s * alpha_i
            q[ks, 0] += p * alpha_s * (1 - alpha_i)
            q[0, ki] += p * (1 - alpha_s) * alpha_i
            q[0, 0] += p * (1 - alpha_s) * (1 - alpha_i)
        elif ks:
            q[ks, 0] += p * alpha_s
            q[0, 0] += p * (1 - alpha_s)
        elif ki:
            q[0, ki] += p * alpha_i
            q[0, 0] += p * (1 - alpha_i)
        else:
            q[0, 0] += p
    return q


def _noise_slot_means(mu_n: float, theta: float, alpha: float) -> np.ndarray:
    """Mean detected noise photons per frame in output slots 1..3."""
    means = np.zeros(3)
    for k in INPUT_SLOTS:
        for slot in SLOTS:
            p = single_photon_distribution(k, theta).get(SingleOutcome(slot, "a"), 0.0)
            means[slot - 1] += mu_n * p * alpha
    return means


def _cdf(weights: np.ndarray) -> np.ndarray:
    total = weights.sum()
    if total <= 0:
        return np.linspace(1 / len(weights), 1.0, len(weights))
    cdf = np.cumsum(weights / total)
    cdf[-1] = 1.0
    return cdf


def _plan(s: Scenario) -> _DetectionPlan:
    b = s.brightness
    q = _pair_category_matrix(s.phases, s.alpha_s, s.alpha_i)
    sig, idl = np.indices((4, 4)).reshape(2, -1)
    keep = (sig > 0) | (idl > 0)
    weights = q[sig[keep], idl[keep]]
    detected = weights.sum()
    noise_s = _noise_slot_means(b.mu_ns, s.phases.theta_s, s.alpha_s)
    noise_i = _noise_slot_means(b.mu_ni, s.phases.theta_i, s.alpha_i)
    return _DetectionPlan(
        pair_rate=2.0 * b.mu_c * detected,
        pair_cdf=_cdf(weights),
        pair_sig_slot=sig[keep],
        pair_idl_slot=idl[keep],
        noise_rate_s=float(noise_s.sum()),
        noise_cdf_s=_cdf(noise_s),
        noise_rate_i=float(noise_i.sum()),
        noise_cdf_i=_cdf(noise_i),
        dark_s=s.signal_channel.detector.dark_count_per_gate,
        dark_i=s.idler_channel.detector.dark_count_per_gate,
    )


def _categorical(rng: np.random.Generator, cdf: np.ndarray, size: int) -> np.ndarray:
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return np.minimum(idx, len(cdf) - 1)


def _poisson_events(rng, rate: float, n: int, cdf: np.ndarray):
    """Frames and categories of Poisson(rate)-per-frame events in a block of ``n`` frames."""
    count = rng.poisson(rate * n) if rate > 0 else 0
    frames = rng.integers(0, n, size=count)
    return frames, _categorical(rng, cdf, count)


def _dark_events(rng, d: float, n: int):
    frames, slots = [], []
    for slot in SLOTS:
        count = rng.binomial(n, d) if d > 0 else 0
        frames.append(rng.choice(n, size=count, replace=False))
        slots.append(np.full(count, slot))
    return np.concatenate(frames), np.concatenate(slots)


def _frame_masks(frames: np.ndarray, slots: np.ndarray):
    """Collapse events to one click per (frame, slot); return per-slot singles and frame masks."""
    codes = np.unique(frames.astype(np.int64) * 3 + (slots.astype(np.int64) - 1))
    singles = np.bincount(codes % 3, minlength=3).astype(np.int64)
    clicked = codes // 3
    bits = (1 << (codes % 3)).astype(np.int8)
    uframes, start = np.unique(clicked, return_index=True)
    masks = np.bitwise_or.reduceat(bits, start) if len(bits) else bits
    return singles, uframes, masks


def _simulate_block(plan: _DetectionPlan, n: int, rng: np.random.Generator) -> TallyCounters:
    pf, pcat = _poisson_events(rng, plan.pair_rate, n, plan.pair_cdf)
    ps, pi = plan.pair_sig_slot[pcat], plan.pair_idl_slot[pcat]
    nf_s, ncat_s = _poisson_events(rng, plan.noise_rate_s, n, plan.noise_cdf_s)
    nf_i, ncat_i = _poisson_events(rng, plan.noise_rate_i, n, plan.noise_cdf_i)
    df_s, ds_s = _dark_events(rng, plan.dark_s, n)
    df_i, ds_i = _dark_events(rng, plan.dark_i, n)

    sig_frames = np.concatenate([pf[ps > 0], nf_s, df_s])
    sig_slots = np.concatenate([ps[ps > 0], ncat_s + 1, ds_s])
    idl_frames = np.concatenate([pf[pi > 0], nf_i, df_i])
    idl_slots = np.concatenate([pi[pi > 0], ncat_i + 1, ds_i])

    singles_s, frames_s, masks_s = _frame_masks(sig_frames, sig_slots)
    singles_i, frames_i, masks_i = _frame_masks(idl_frames, idl_slots)
    _, ix_s, ix_i = np.intersect1d(frames_s, frames_i, assume_unique=True, return_indices=True)
    ms, mi = masks_s[ix_s], masks_i[ix_i]
    coinc = np.zeros((3, 3), np.int64)
    for j in range(3):
        hit_s = (ms >> j) & 1
        for k in range(3):
            coinc[j, k] = int(np.count_nonzero(hit_s & ((mi >> k) & 1)))
    return TallyCounters(singles_s, singles_i, coinc, n)


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Random stream of one block; a pure function of ``(seed, block)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(0, block))))


def worker_count(workers: Optional[int] = None) -> int:
    if workers is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        try:
            workers = int(raw) if raw else 1
        except ValueError:
            raise ScenarioError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if workers < 1:
        raise ScenarioError(f"worker count must be >= 1, got {workers}")
    return workers


def simulate(s: Scenario, workers: Optional[int] = None) -> TallyCounters:
    """Run ``s.frames`` frames and return the tallies.

    ``workers`` defaults to ``$TIMEBIN_SIM_THREADS`` (or 1). It changes wall
    time only; the tallies are bit-identical for any value.
    """
    if not isinstance(s, Scenario):
        raise ScenarioError("simulate expects a Scenario")
    plan = _plan(s)
    n_blocks = -(-s.frames // BLOCK_FRAMES)

    def run(block: int) -> TallyCounters:
        n = min(BLOCK_FRAMES, s.frames - block * BLOCK_FRAMES)
        return _simulate_block(plan, n, block_generator(s.seed, block))

    workers = min(worker_count(workers), n_blocks)
    if workers == 1:
        parts = [run(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    total = TallyCounters()
    for part in parts:
        total = total + part
    return total


@dataclass(frozen=True)
class ExpectedTallies:
    """Exact per-frame click probabilities of the simulated model."""

    singles_signal_by_slot: np.ndarray
    singles_idler_by_slot: np.ndarray
    coincidences_by_slot_pair: np.ndarray


def expected_tallies(s: Scenario) -> ExpectedTallies:
    """Closed-form expectation of :func:`simulate` per frame, detector saturation included.

    Detected photons per slot are Poisson (thinned Poisson pairs plus Poisson
    noise), so a slot stays dark with probability ``(1 - d) exp(-mean)``.
    For a slot pair, pairs that hit either slot form one Poisson variable
    whose mean subtracts the doubly-hitting pairs once.
    """
    b = s.brightness
    q = _pair_category_matrix(s.phases, s.alpha_s, s.alpha_i)
    pair_sig = 2 * b.mu_c * q[1:, :].sum(axis=1)
    pair_idl = 2 * b.mu_c * q[:, 1:].sum(axis=0)
    pair_both = 2 * b.mu_c * q[1:, 1:]
    lam_s = pair_sig + _noise_slot_means(b.mu_ns, s.phases.theta_s, s.alpha_s)
    lam_i = pair_idl + _noise_slot_means(b.mu_ni, s.phases.theta_i, s.alpha_i)
    d_s = s.signal_channel.detector.dark_count_per_gate
    d_i = s.idler_channel.detector.dark_count_per_gate
    quiet_s = (1 - d_s) * np.exp(-lam_s)
    quiet_i = (1 - d_i) * np.exp(-lam_i)
    quiet_both = (1 - d_s) * (1 - d_i) * np.exp(-(lam_s[:, None] + lam_i[None, :] - pair_both))
    coinc = 1 - quiet_s[:, None] - quiet_i[None, :] + quiet_both
    return ExpectedTallies(1 - quiet_s, 1 - quiet_i, coinc)
