"""TOML run configuration with strict keys and defaults.

Every section and key is optional; anything left out takes the value shown
by ``cigyro --print-defaults``. Unknown keys are rejected with a suggestion.
"""

from __future__ import annotations

import difflib
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .beams import PhaseTarget
from .core_dynamics import HBAR, RB87_MASS, RB_D2_K, PhysicalParams, recoil_resonance


class ConfigError(ValueError):
    """Configuration could not be parsed or violates an invariant."""


# section -> key -> default; None means "derived" (see comments in DEFAULTS_TOML)
SCHEMA: dict[str, dict[str, Any]] = {
    "physical": {
        "k": RB_D2_K,
        "m": RB87_MASS,
        "omega0": None,
        "omega0_T": 3.3,
        "delta0_diff": None,
        "delta0_common": 2 * math.pi * 1e9,
        "vx": 300.0,
        "L": 3e-3,
        "hbar": HBAR,
    },
    "beam": {
        "kind": "gaussian",
        "n_slices": 500,
        "window_half_width_L": 2.5,
        "scan_length_L": 1.0,
        "delta_l_over_l": 0.48,
        "delta_tau_over_tau": 0.5,
        "phase_target": "last_zone",
        "doppler": True,
        "phi": 0.0,
    },
    "rotation": {"omega_rot": 0.03, "axis_x": 0.0},
    "scan": {"n_phi": 64, "S0": 1e6, "phase_offset": 0.0},
    "grid": {"span_hk": 6.0, "n_p": 512},
    "sweep": {"start": -0.48, "stop": 0.48, "count": 25, "workers": 1},
    "analytic": {"delta_phi0": 0.1, "count": 101},
    "oracle": {"ladder": [5.0, 20.0, 50.0, 100.0], "n_slices": 4000, "threshold": 1e-3},
    "output": {"directory": "out", "emit_svg": False, "record_every": 5},
}

DEFAULTS_TOML = """\
# cigyro defaults; every key is optional.

[physical]
k = 8.0556e6               # two-photon half wavevector (1/m)
m = 1.44316e-25            # atomic mass (kg)
# omega0 = 330000.0        # Raman Rabi frequency (rad/s); overrides omega0_T
omega0_T = 3.3             # omega0 * L / vx, used when omega0 is not given
# delta0_diff = ...        # two-photon detuning (rad/s); default: recoil resonance
delta0_common = 6283185307.179586
vx = 300.0                 # longitudinal speed (m/s)
L = 0.003                  # beam length scale (m)
hbar = 1.054571817e-34

[beam]
kind = "gaussian"          # gaussian | bci
n_slices = 500
window_half_width_L = 2.5  # simulated window is +/- this many L
scan_length_L = 1.0        # l in units of L; delta_l = delta_l_over_l * l
delta_l_over_l = 0.48
delta_tau_over_tau = 0.5   # bci only
phase_target = "last_zone" # bci only: last_zone | from_delta_tau
doppler = true
phi = 0.0                  # applied phase for `simulate`

[rotation]
omega_rot = 0.03           # rad/s
axis_x = 0.0               # m, relative to the beam center

[scan]
n_phi = 64
S0 = 1000000.0
phase_offset = 0.0

[grid]
span_hk = 6.0              # momentum grid half-span in units of hbar k
n_p = 512

[sweep]
start = -0.48
stop = 0.48
count = 25
workers = 1

[analytic]
delta_phi0 = 0.1
count = 101

[oracle]
ladder = [5.0, 20.0, 50.0, 100.0]   # delta0 / Omega1
n_slices = 4000
threshold = 0.001

[output]
directory = "out"
emit_svg = false
record_every = 5
"""


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams
    sections: dict[str, dict[str, Any]]

    def __getitem__(self, section: str) -> dict[str, Any]:
        return self.sections[section]

    def to_json(self) -> str:
        return json.dumps(self.sections, sort_keys=True, separators=(",", ":"))

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    def echo(self) -> str:
        lines = []
        for name in sorted(self.sections):
            lines.append(f"[{name}]")
            for key in sorted(self.sections[name]):
                lines.append(f"  {key} = {self.sections[name][key]!r}")
        return "\n".join(lines)

    def with_overrides(self, section: str, **values) -> "RunConfig":
        raw = {s: dict(v) for s, v in self.sections.items()}
        # omega0 and omega0_T are stored together after a build; keep only one
        if section == "physical" and "omega0_T" in values:
            raw["physical"].pop("omega0", None)
        else:
            raw["physical"].pop("omega0_T", None)
        raw[section].update(values)
        return build_config(raw)


def _suggest(word: str, options) -> str:
    close = difflib.get_close_matches(word, list(options), n=1)
    return f" (did you mean {close[0]!r}?)" if close else ""


def _coerce(section: str, key: str, value, default):
    where = f"{section}.{key}"
    if key in ("omega0", "delta0_diff"):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{where} must be a number")
        return float(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false")
        return value
    if isinstance(default, int):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{where} must be an integer")
        return value
    if isinstance(default, float):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{where} must be a number")
        if not math.isfinite(value):
            raise ConfigError(f"{where} must be finite")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string")
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{where} must be a list of numbers")
        return [float(v) for v in value]
    return value


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def build_config(raw: dict[str, Any]) -> RunConfig:
    """Merge ``raw`` over the defaults, validate, and build physical params."""
    sections: dict[str, dict[str, Any]] = {}
    for name in raw:
        if name not in SCHEMA:
            raise ConfigError(f"unknown section [{name}]{_suggest(name, SCHEMA)}")
        if not isinstance(raw[name], dict):
            raise ConfigError(f"[{name}] must be a table")
    for name, keys in SCHEMA.items():
        given = raw.get(name, {})
        for key in given:
            if key not in keys:
                raise ConfigError(f"unknown key {name}.{key}{_suggest(key, keys)}")
        sec = {}
        for key, default in keys.items():
            if key in given:
                sec[key] = _coerce(name, key, given[key], default)
            elif default is not None:
                sec[key] = list(default) if isinstance(default, list) else default
        sections[name] = sec

    ph = sections["physical"]
    for key in ("k", "m", "vx", "L", "hbar"):
        _require(ph[key] > 0, f"physical.{key} > 0")
    if "omega0" in ph:
        _require(ph["omega0"] >= 0, "omega0 >= 0")
        if "omega0_T" in raw.get("physical", {}):
            raise ConfigError("give either physical.omega0 or physical.omega0_T, not both")
        ph["omega0_T"] = ph["omega0"] * ph["L"] / ph["vx"]
    else:
        _require(ph["omega0_T"] >= 0, "omega0_T >= 0")
        ph["omega0"] = ph["omega0_T"] * ph["vx"] / ph["L"]
    if "delta0_diff" not in ph:
        ph["delta0_diff"] = recoil_resonance(ph["k"], ph["m"], ph["hbar"])
    try:
        params = PhysicalParams(
            k=ph["k"], m=ph["m"], omega0=ph["omega0"], delta0_diff=ph["delta0_diff"],
            delta0_common=ph["delta0_common"], vx=ph["vx"], L=ph["L"], hbar=ph["hbar"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    b = sections["beam"]
    _require(b["kind"] in ("gaussian", "bci"), "beam.kind must be 'gaussian' or 'bci'")
    _require(b["n_slices"] >= 3, "beam.n_slices >= 3")
    _require(b["window_half_width_L"] > 0, "beam.window_half_width_L > 0")
    _require(b["scan_length_L"] > 0, "beam.scan_length_L > 0")
    _require(
        abs(b["delta_l_over_l"] * b["scan_length_L"]) <= b["window_half_width_L"],
        "beam.delta_l_over_l must place the phase start inside the window",
    )
    _require(abs(b["delta_tau_over_tau"]) <= 0.5, "|beam.delta_tau_over_tau| <= 0.5")
    try:
        PhaseTarget(b["phase_target"])
    except ValueError:
        raise ConfigError("beam.phase_target must be 'last_zone' or 'from_delta_tau'") from None
    if b["kind"] == "bci":
        _require(params.omega0 > 0, "omega0 > 0 for a bci beam")

    s = sections["scan"]
    _require(s["n_phi"] >= 16, "scan.n_phi >= 16")
    _require(s["S0"] > 0, "scan.S0 > 0")
    g = sections["grid"]
    _require(g["n_p"] >= 16, "grid.n_p >= 16")
    _require(g["span_hk"] > 0, "grid.span_hk > 0")
    sw = sections["sweep"]
    _require(sw["count"] >= 1, "sweep.count >= 1")
    _require(sw["workers"] >= 1, "sweep.workers >= 1")
    _require(sw["start"] <= sw["stop"], "sweep.start <= sweep.stop")
    an = sections["analytic"]
    _require(an["delta_phi0"] != 0, "analytic.delta_phi0 != 0")
    _require(an["count"] >= 2, "analytic.count >= 2")
    orc = sections["oracle"]
    _require(len(orc["ladder"]) >= 1 and all(r > 0 for r in orc["ladder"]), "oracle.ladder entries > 0")
    _require(orc["n_slices"] >= 10, "oracle.n_slices >= 10")
    _require(orc["threshold"] > 0, "oracle.threshold > 0")
    _require(sections["output"]["record_every"] >= 0, "output.record_every >= 0")
    return RunConfig(params, sections)


def parse_config_text(text: str) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from None
    return build_config(raw)


def load_config(path: str | Path | None, echo: bool = True) -> RunConfig:
    """Read and validate a TOML file; ``None`` gives the defaults."""
    if path is None:
        cfg = build_config({})
    else:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        cfg = parse_config_text(p.read_text())
    if echo:
        print("# effective configuration")
        print(cfg.echo())
    return cfg


def default_config() -> RunConfig:
    return build_config({})


def sweep_positions(cfg: RunConfig):
    sw = cfg["sweep"]
    if sw["count"] == 1:
        return [sw["start"]]
    step = (sw["stop"] - sw["start"]) / (sw["count"] - 1)
    return [round(sw["start"] + i * step, 12) for i in range(sw["count"])]


__all__ = [
    "ConfigError", "RunConfig", "SCHEMA", "DEFAULTS_TOML", "build_config", "default_config",
    "load_config", "parse_config_text", "sweep_positions",
]
