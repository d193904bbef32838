"""INI-style scenario files and the shipped presets.

A scenario file looks like::

    [source]
    mu_c = 0.04
    mu_noise_signal = 0.01
    mu_noise_idler = 0.02

    [phases]
    phi = 0
    theta_s = 0
    theta_i = 0

    [signal]
    fixed_loss_db = 8
    fiber_length_km = 0
    fiber_loss_db_per_km = 0.2
    efficiency = 0.08
    dark_per_gate = 4e-5

    [idler]
    ...

    [run]
    frames = 10000000
    seed = 1
    gate_rate_hz = 4e6

Instead of ``mu_noise_*`` the source may give noise levels measured at a
reference temperature (``raman_ref_signal``, ``raman_ref_idler``,
``raman_ref_temperature_k``) plus ``temperature_k`` and ``detuning_ghz``. The
signal sits on the blue (anti-Stokes) side of the pump and the idler on the
red (Stokes) side.

``[phases]`` and ``[run]`` are optional. Unknown sections or keys are
rejected.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

from .errors import ScenarioError, ScenarioParseError
from .link import ChannelParams, DetectorParams
from .montecarlo import Scenario
from .raman import scale_noise_to_temperature
from .rates import SourceBrightness
from .timebin_state import PhaseConfig


def _nonneg(x):
    return x >= 0


def _positive(x):
    return x > 0


def _unit(x):
    return 0 <= x <= 1


def _prob(x):
    return 0 <= x < 1


def _any(x):
    return True


# key -> (type, check, description of the check)
_Field = Tuple[type, Callable[[float], bool], str]
_CHANNEL: Dict[str, _Field] = {
    "fixed_loss_db": (float, _nonneg, ">= 0"),
    "fiber_length_km": (float, _nonneg, ">= 0"),
    "fiber_loss_db_per_km": (float, _nonneg, ">= 0"),
    "efficiency": (float, _unit, "in [0, 1]"),
    "dark_per_gate": (float, _prob, "in [0, 1)"),
}
SCHEMA: Dict[str, Dict[str, _Field]] = {
    "source": {
        "mu_c": (float, _nonneg, ">= 0"),
        "mu_noise_signal": (float, _nonneg, ">= 0"),
        "mu_noise_idler": (float, _nonneg, ">= 0"),
        "raman_ref_signal": (float, _nonneg, ">= 0"),
        "raman_ref_idler": (float, _nonneg, ">= 0"),
        "raman_ref_temperature_k": (float, _positive, "> 0"),
        "temperature_k": (float, _positive, "> 0"),
        "detuning_ghz": (float, _positive, "> 0"),
    },
    "phases": {"phi": (float, _any, ""), "theta_s": (float, _any, ""), "theta_i": (float, _any, "")},
    "signal": _CHANNEL,
    "idler": _CHANNEL,
    "run": {
        "frames": (int, lambda n: n >= 1, ">= 1"),
        "seed": (int, lambda n: 0 <= n < 2**64, "in [0, 2**64)"),
        "gate_rate_hz": (float, _positive, "> 0"),
    },
}
REQUIRED_SECTIONS = ("source", "signal", "idler")
RUN_DEFAULTS = {"frames": 10_000_000, "seed": 1, "gate_rate_hz": 4e6}
_DIRECT_NOISE = ("mu_noise_signal", "mu_noise_idler")
_RAMAN_NOISE = ("raman_ref_signal", "raman_ref_idler", "raman_ref_temperature_k", "temperature_k", "detuning_ghz")

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^#=:\s][^=:]*?)\s*[=:]")


def _line_index(text: str) -> Dict[Tuple[str, Optional[str]], int]:
    """Line number of every section header and ``(section, key)`` in ``text``."""
    lines: Dict[Tuple[str, Optional[str]], int] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            lines.setdefault((section, None), lineno)
            continue
        m = _KEY_RE.match(line)
        if m and section is not None and not line[:1].isspace():
            lines.setdefault((section, m.group(1).strip()), lineno)
    return lines


@dataclass
class _Where:
    source: str
    lines: Dict[Tuple[str, Optional[str]], int]

    def at(self, section: str, key: Optional[str] = None) -> str:
        line = self.lines.get((section, key)) or self.lines.get((section, None))
        return f"{self.source}:{line}" if line else self.source


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """Build a :class:`Scenario` from scenario-file text.

    Raises:
        ScenarioParseError: malformed text (the CLI exits with 2).
        ScenarioError: well-formed values that break a model invariant (exit 3).
    """
    where = _Where(source, _line_index(text))
    cp = configparser.ConfigParser(
        comment_prefixes=("#",), inline_comment_prefixes=("#",), interpolation=None, default_section="\0"
    )
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioParseError(f"{source}: {exc.message if hasattr(exc, 'message') else exc}") from None

    values: Dict[str, Dict[str, float]] = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ScenarioParseError(f"{where.at(section)}: unknown section [{section}]")
        values[section] = {}
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                raise ScenarioParseError(f"{where.at(section, key)}: unknown key {key!r} in [{section}]")
            kind, check, desc = SCHEMA[section][key]
            try:
                value = _convert(kind, raw)
            except ValueError:
                raise ScenarioParseError(
                    f"{where.at(section, key)}: {key} = {raw!r} is not a valid {kind.__name__}"
                ) from None
            if not check(value):
                raise ScenarioError(f"{where.at(section, key)}: {key} = {raw} must be {desc}")
            values[section][key] = value
    for section in REQUIRED_SECTIONS:
        if section not in values:
            raise ScenarioParseError(f"{source}: missing section [{section}]")
    for section in ("signal", "idler"):
        missing = [k for k in _CHANNEL if k not in values[section]]
        if missing:
            raise ScenarioParseError(f"{where.at(section)}: missing {', '.join(missing)}")

    try:
        return _build(values, where)
    except ScenarioError as exc:
        if str(exc).startswith(source):
            raise
        raise ScenarioError(f"{source}: {exc}") from None


def _convert(kind: type, raw: str):
    raw = raw.strip()
    if kind is int:
        return int(raw.replace("_", ""))
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError(raw)
    return value


def _build(values: Dict[str, Dict[str, float]], where: _Where) -> Scenario:
    src = values["source"]
    if "mu_c" not in src:
        raise ScenarioParseError(f"{where.at('source')}: missing mu_c")
    direct = [k for k in _DIRECT_NOISE if k in src]
    raman = [k for k in _RAMAN_NOISE if k in src]
    if direct and raman:
        raise ScenarioParseError(
            f"{where.at('source', raman[0])}: give either mu_noise_* or raman_* keys, not both"
        )
    if raman:
        missing = [k for k in _RAMAN_NOISE if k not in src]
        if missing:
            raise ScenarioParseError(f"{where.at('source')}: missing {', '.join(missing)}")
        nu = src["detuning_ghz"] * 1e9
        t_ref, t_new = src["raman_ref_temperature_k"], src["temperature_k"]
        mu_ns = scale_noise_to_temperature(src["raman_ref_signal"], t_ref, t_new, nu, "anti_stokes")
        mu_ni = scale_noise_to_temperature(src["raman_ref_idler"], t_ref, t_new, nu, "stokes")
    else:
        mu_ns = src.get("mu_noise_signal", 0.0)
        mu_ni = src.get("mu_noise_idler", 0.0)

    run = {**RUN_DEFAULTS, **values.get("run", {})}
    phases = values.get("phases", {})

    def channel(name: str) -> ChannelParams:
        c = values[name]
        return ChannelParams(
            fixed_loss_db=c["fixed_loss_db"],
            fiber_length_km=c["fiber_length_km"],
            fiber_loss_db_per_km=c["fiber_loss_db_per_km"],
            detector=DetectorParams(c["efficiency"], c["dark_per_gate"], run["gate_rate_hz"]),
        )

    return Scenario(
        brightness=SourceBrightness(src["mu_c"], mu_ns, mu_ni),
        phases=PhaseConfig(phases.get("phi", 0.0), phases.get("theta_s", 0.0), phases.get("theta_i", 0.0)),
        signal_channel=channel("signal"),
        idler_channel=channel("idler"),
        frames=int(run["frames"]),
        seed=int(run["seed"]),
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioParseError(f"{path}: {exc.strerror}") from None
    return parse_scenario(text, source=str(path))


def format_scenario(s: Scenario) -> str:
    """Scenario-file text that parses back to ``s``."""
    b, p = s.brightness, s.phases

    def channel(c: ChannelParams) -> str:
        return (
            f"fixed_loss_db = {c.fixed_loss_db!r}\n"
            f"fiber_length_km = {c.fiber_length_km!r}\n"
            f"fiber_loss_db_per_km = {c.fiber_loss_db_per_km!r}\n"
            f"efficiency = {c.detector.efficiency_eta!r}\n"
            f"dark_per_gate = {c.detector.dark_count_per_gate!r}\n"
        )

    return (
        "[source]\n"
        f"mu_c = {b.mu_c!r}\n"
        f"mu_noise_signal = {b.mu_ns!r}\n"
        f"mu_noise_idler = {b.mu_ni!r}\n\n"
        "[phases]\n"
        f"phi = {p.phi!r}\ntheta_s = {p.theta_s!r}\ntheta_i = {p.theta_i!r}\n\n"
        f"[signal]\n{channel(s.signal_channel)}\n"
        f"[idler]\n{channel(s.idler_channel)}\n"
        "[run]\n"
        f"frames = {s.frames}\nseed = {s.seed}\ngate_rate_hz = {s.gate_rate_hz!r}\n"
    )


# Measured totals mu_s ~ 0.05 and mu_i ~ 0.06 split into correlated pairs and
# noise with the mu_c estimates of each configuration.
MU_SIGNAL_TOTAL = 0.05
MU_IDLER_TOTAL = 0.06


def _preset(mu_c: float, mu_ns: float, mu_ni: float, span_km: float, darks: bool = True) -> Scenario:
    def channel(eta: float, dark: float) -> ChannelParams:
        return ChannelParams(
            fixed_loss_db=8.0,
            fiber_length_km=span_km,
            fiber_loss_db_per_km=0.2,
            detector=DetectorParams(eta, dark if darks else 0.0, 4e6),
        )

    return Scenario(
        brightness=SourceBrightness(mu_c, mu_ns, mu_ni),
        phases=PhaseConfig(0.0, 0.0, 0.0),
        signal_channel=channel(0.08, 4e-5),
        idler_channel=channel(0.07, 5e-5),
        frames=RUN_DEFAULTS["frames"],
        seed=RUN_DEFAULTS["seed"],
    )


def _split(mu_c: float) -> Tuple[float, float, float]:
    return mu_c, round(MU_SIGNAL_TOTAL - mu_c, 12), round(MU_IDLER_TOTAL - mu_c, 12)


PRESETS: Dict[str, Scenario] = {
    "uncooled": _preset(*_split(0.02), span_km=0.0),
    "cooled": _preset(*_split(0.04), span_km=0.0),
    "distributed-60km": _preset(*_split(0.04), span_km=30.0),
    "zero-noise": _preset(1e-4, 0.0, 0.0, span_km=0.0, darks=False),
}


def resolve_scenario(name_or_path: str) -> Scenario:
    """Preset by name, otherwise a scenario file path."""
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    return load_scenario(name_or_path)
