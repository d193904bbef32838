"""Exit criteria of the build, one test per criterion.

Each test appends a ``[PASS]``/``[FAIL]`` line that is printed in the pytest
terminal summary. Tolerances are fixed here and not tuned after the fact.
"""

import json
import math
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from timebin_sim.cli import analytic_summary, main
from timebin_sim.fringe import FringeCurve, fit_visibility, sweep
from timebin_sim.link import ChannelParams, DetectorParams, transmittance
from timebin_sim.raman import RamanParams, anti_stokes_mean, stokes_mean
from timebin_sim.rates import (
    SourceBrightness,
    accidental_rate,
    bell_violation_margin,
    correlated_rate,
    visibility,
)
from timebin_sim.scenario_file import PRESETS
from timebin_sim.timebin_state import PhaseConfig, joint_outcome_distribution

TWELVE = np.linspace(0, 2 * math.pi, 12, endpoint=False)


def record(number, text, ok):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number} {text}")
    assert ok, text


def cli_json(capsys, *argv):
    code = main(list(argv))
    out, _ = capsys.readouterr()
    assert code == 0
    return json.loads(out)


def test_criterion_1_raman_cooling_ratios():
    def p(T):
        return RamanParams(1e-3, 500.0, 0.0, 400e9, T)

    r_s = stokes_mean(p(77)) / stokes_mean(p(293))
    r_as = anti_stokes_mean(p(77)) / anti_stokes_mean(p(293))
    ok = abs(r_s - 0.29) <= 0.005 and abs(r_as - 0.24) <= 0.005
    record(1, f"Raman ratios n_s {r_s:.4f} (0.29), n_as {r_as:.4f} (0.24), tol 0.005", ok)


def test_criterion_2_constructive_probability_and_normalisation():
    start = time.perf_counter()
    p = joint_outcome_distribution(PhaseConfig(0.9, 0.4, 0.5)).prob(2, "a", 2, "a")
    rng = np.random.default_rng(2)
    worst = max(
        abs(joint_outcome_distribution(PhaseConfig(*ph)).total() - 1.0) for ph in rng.uniform(-10, 10, (1000, 3))
    )
    elapsed = time.perf_counter() - start
    ok = abs(p - 1 / 8) <= 1e-15 and worst <= 1e-12 and elapsed < 1.0
    record(2, f"P(2a,2a) at theta=phi {p!r}; max |sum-1| over 1000 phases {worst:.1e}; {elapsed:.2f} s", ok)


def test_criterion_3_sixty_km_analytic(capsys):
    summary = cli_json(capsys, "analytic", "distributed-60km")
    v = summary["visibility"]
    peak_hz = summary["r_c_hz"] + summary["r_acc_hz"]
    singles = summary["singles_signal_hz"]
    ok = 0.70 <= v <= 0.78 and 0.2 <= peak_hz <= 0.5 and 430 / 2 <= singles <= 430 * 2
    record(3, f"60 km: V {v:.4f} in [0.70, 0.78], peak {peak_hz:.3f} Hz in [0.2, 0.5], "
              f"signal singles {singles:.0f} Hz within x2 of 430", ok)


def test_criterion_4_cooling_improvement(capsys):
    v = {name: cli_json(capsys, "analytic", name)["visibility"] for name in ("uncooled", "cooled")}
    lows = {name: sweep(PRESETS[name], TWELVE).rate.min() for name in v}
    minima_ok = abs(lows["cooled"] - lows["uncooled"]) <= 0.05 * lows["uncooled"]
    analytic_ok = v["uncooled"] < v["cooled"] and 0.78 <= v["cooled"] <= 0.88 and 0.62 <= v["uncooled"] <= 0.76

    mc = {}
    for name in v:
        s = PRESETS[name].replace(frames=10**9, seed=4)
        mc[name] = fit_visibility(sweep(s, TWELVE, "montecarlo"))
    mc_ok = (
        mc["uncooled"].visibility < mc["cooled"].visibility
        and 0.78 <= mc["cooled"].visibility <= 0.88
        and 0.62 <= mc["uncooled"].visibility <= 0.76
    )
    record(
        4,
        f"cooling: analytic V {v['uncooled']:.3f} -> {v['cooled']:.3f}, MC V {mc['uncooled'].visibility:.3f} -> "
        f"{mc['cooled'].visibility:.3f} (brackets [0.62,0.76] / [0.78,0.88]); "
        f"minima differ by {abs(lows['cooled'] / lows['uncooled'] - 1):.1%} (<= 5%)",
        analytic_ok and mc_ok and minima_ok,
    )


def test_criterion_5_monte_carlo_matches_analytic():
    s = PRESETS["cooled"].replace(frames=10**7, seed=20051)
    start = time.perf_counter()
    mc = sweep(s, TWELVE, "montecarlo")
    elapsed = time.perf_counter() - start
    ref = sweep(s, TWELVE, "analytic")
    expected = ref.rate * s.frames
    z = (mc.rate * s.frames - expected) / np.sqrt(expected)
    fit, ref_fit = fit_visibility(mc), fit_visibility(ref)
    throughput = 12 * s.frames / elapsed * 60
    ok = (
        np.all(np.abs(z) <= 4)
        and abs(fit.visibility - ref_fit.visibility) <= 3 * fit.sigma_visibility
        and elapsed <= 300
        and throughput >= 1e8
    )
    record(
        5,
        f"MC vs analytic, 12 x 1e7 frames: max |z| {np.abs(z).max():.2f} (<= 4); V {fit.visibility:.3f} +- "
        f"{fit.sigma_visibility:.3f} vs {ref_fit.visibility:.3f} (3 sigma); {elapsed:.2f} s, "
        f"{throughput:.2e} frames/min (>= 1e8)",
        ok,
    )


def test_criterion_6_inverse_estimation(capsys, tmp_path):
    cooled = cli_json(capsys, "estimate", "0.800", "cooled")["mu_c_hat"]
    uncooled = cli_json(capsys, "estimate", "0.647", "uncooled")["mu_c_hat"]
    s = PRESETS["cooled"]
    worst = 0.0
    for mu_c in (0.005, 0.01, 0.02, 0.04):
        forward = s.replace(brightness=SourceBrightness.from_totals(mu_c, 0.05, 0.06))
        v = analytic_summary(forward)["visibility"]
        est = cli_json(capsys, "estimate", repr(v), "cooled")["mu_c_hat"]
        worst = max(worst, abs(est - mu_c))
    ok = 0.03 <= cooled <= 0.05 and 0.012 <= uncooled <= 0.022 and worst <= 1e-9
    record(6, f"mu_c estimates: cooled {cooled:.4f} in [0.03,0.05], uncooled {uncooled:.4f} in [0.012,0.022]; "
              f"round-trip error {worst:.1e} (<= 1e-9)", ok)


def test_criterion_7_bell_threshold():
    hi, lo = bell_violation_margin(0.758), bell_violation_margin(0.647)
    record(7, f"Bell margin +{hi:.4f} at V=0.758, {lo:.4f} at V=0.647", hi > 0 and lo < 0)


def test_criterion_8_determinism(monkeypatch, tmp_path, capsys):
    blobs = []
    for run, threads in enumerate(("1", "4", "8", "1")):
        monkeypatch.setenv("TIMEBIN_SIM_THREADS", threads)
        csv_path, json_path = tmp_path / f"{run}.csv", tmp_path / f"{run}.json"
        code = main(["sweep", "cooled", "--mode", "montecarlo", "--frames", "5000000", "--points", "12",
                     "--seed", "8", "--csv", str(csv_path), "--json", str(json_path)])
        assert code == 0
        main(["analytic", "cooled"])
        main(["estimate", "0.8", "cooled"])
        blobs.append((csv_path.read_bytes(), json_path.read_bytes(), capsys.readouterr().out))
    ok = all(b == blobs[0] for b in blobs)
    record(8, "byte-identical CSV/JSON across repeated runs and TIMEBIN_SIM_THREADS in {1, 4, 8}", ok)


def test_criterion_9_property_suites():
    rng = np.random.default_rng(9)
    worst_fit = 0.0
    for _ in range(500):
        c, v, t0 = rng.uniform(1e-6, 10), rng.uniform(0, 0.99), rng.uniform(-3, 3)
        y = c * (1 + v * np.cos(TWELVE - t0))
        fit = fit_visibility(FringeCurve(TWELVE, y, np.zeros(12), np.zeros(12), np.zeros(12)))
        err = [abs(fit.offset / c - 1), abs(fit.visibility - v)]
        if v > 1e-2:
            err.append(abs(math.remainder(fit.theta0 - t0, 2 * math.pi)) * v)
        worst_fit = max(worst_fit, *err)

    worst_scale = 0.0
    for _ in range(500):
        r_c, r_acc, k = rng.uniform(1e-9, 1), rng.uniform(0, 1), 10 ** rng.uniform(-6, 6)
        worst_scale = max(worst_scale, abs(visibility(k * r_c, k * r_acc) / visibility(r_c, r_acc) - 1))

    worst_mult = 0.0
    for _ in range(500):
        a, b = rng.uniform(0, 30, 2)

        def t(loss):
            return transmittance(ChannelParams(loss, DetectorParams(1.0, 0.0)))

        worst_mult = max(worst_mult, abs(t(a + b) / (t(a) * t(b)) - 1))

    a_s, a_i = 0.08 * 10 ** -0.8, 0.07 * 10 ** -0.8
    mus = np.geomspace(0.5, 1e-6, 50)
    vs = [visibility(correlated_rate(m, a_s, a_i), accidental_rate(SourceBrightness(m), a_s, a_i, 0, 0)) for m in mus]
    monotone = bool(np.all(np.diff(vs) > 0)) and vs[-1] > 1 - 1e-5

    ok = worst_fit <= 1e-9 and worst_scale <= 1e-12 and worst_mult <= 1e-12 and monotone
    record(9, f"properties: fit round-trip {worst_fit:.1e} (1e-9), scale invariance {worst_scale:.1e}, "
              f"transmittance multiplicativity {worst_mult:.1e}, Poisson-limit V -> 1 monotone {monotone}", ok)
