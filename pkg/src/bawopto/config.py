"""Sectioned ``key = value`` config files.

::

    [cavity]
    f_c = 6.075 GHz
    q_loaded = 2500

    [mode A_5_0_0]
    f_m = 8.30 MHz
    m_eff = 3.52e-4 g     # masses may be given in grams

Values are ``<number><optional unit>``; everything is converted to SI on load.
``family`` is the only key that takes a bare word.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .model import (
    AcousticMode,
    BvdBranch,
    CavityMode,
    CrystalGeometry,
    MaterialProperties,
    ModeEntry,
    ModeFamily,
    PhysicalConstants,
    ReadoutSettings,
    SystemConfig,
    validate,
)

UNITS = {
    "": 1.0,
    "mHz": 1e-3, "Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9,
    "mg": 1e-6, "g": 1e-3, "kg": 1.0,
    "nm": 1e-9, "um": 1e-6, "mm": 1e-3, "cm": 1e-2, "m": 1.0,
    "Ω": 1.0, "ohm": 1.0, "kΩ": 1e3, "kohm": 1e3,
    "H": 1.0, "mH": 1e-3, "uH": 1e-6,
    "F": 1.0, "pF": 1e-12, "fF": 1e-15,
    "V": 1.0, "mV": 1e-3,
    "W": 1.0, "mW": 1e-3,
    "J": 1.0, "J*s": 1.0,
    "kg/m^3": 1.0, "g/cm^3": 1e3,
    "Hz/m": 1.0, "V/rad": 1.0, "C/m": 1.0, "%": 1e-2,
}

# unit suffixes a key accepts; keys not listed take any known unit
_DIMENSIONS = {
    "frequency": {"mHz", "Hz", "kHz", "MHz", "GHz"},
    "mass": {"mg", "g", "kg"},
    "length": {"nm", "um", "mm", "cm", "m"},
    "resistance": {"Ω", "ohm", "kΩ", "kohm"},
}
_KEY_DIMENSION = {
    "f_c": "frequency", "f_m": "frequency", "gamma_m": "frequency",
    "m_eff": "mass",
    "diameter": "length", "center_thickness": "length", "convex_radius": "length",
    "envelope_waist_r0": "length",
    "r_m": "resistance",
}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")
_HEADER = re.compile(r"^\[\s*([a-z_]+)(?:\s+(\S+))?\s*\]$")
_LABEL_INDICES = re.compile(r"^([AB])_?(\d+)_(\d+)_(\d+)$|^([AB])(\d)(\d)(\d)$")

_SECTION_KEYS = {
    "cavity": {"f_c", "q_loaded", "beta1", "beta2", "q_unloaded", "kappa_c"},
    "material": {"density"},
    "geometry": {"diameter", "center_thickness", "convex_radius"},
    "constants": {"hbar"},
    "readout": {"k_phi", "drive_voltage", "incident_power"},
    "overlap": {"fraction_split", "fraction_single"},
    "mode": {
        "family", "n", "m", "p", "f_m", "q_m", "m_eff", "gamma_m",
        "r_m", "l_m", "c_m", "overtone_n", "envelope_waist_r0", "pull_factor_g",
    },
}
_PULL_KEY = re.compile(r"^(delta_x|delta_f_c)_(\d+)$")


class ConfigError(ValueError):
    """Malformed config text or a value that violates an invariant."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class UnitError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


def parse_quantity(text: str, key: str = "", line: int | None = None) -> float:
    """``"3.52e-4 g"`` -> ``3.52e-7``."""
    match = _NUMBER.match(text)
    if not match:
        raise ConfigError(f"cannot parse number in {text!r}", line)
    number, unit = match.groups()
    if unit not in UNITS:
        raise UnitError(f"unknown unit suffix {unit!r} for {key or 'value'}", line)
    dim = _KEY_DIMENSION.get(key)
    if unit and dim and unit not in _DIMENSIONS[dim]:
        raise UnitError(f"unit {unit!r} is not a {dim} unit (key {key})", line)
    return float(number) * UNITS[unit]


@dataclass
class _Section:
    kind: str
    label: str | None
    line: int
    values: dict[str, float] = field(default_factory=dict)
    words: dict[str, str] = field(default_factory=dict)
    lines: dict[str, int] = field(default_factory=dict)


def _tokenize(text: str) -> list[_Section]:
    sections: list[_Section] = []
    current: _Section | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            match = _HEADER.match(line)
            if not match:
                raise ConfigError(f"malformed section header {line!r}", lineno)
            kind, label = match.groups()
            if kind in ("mode", "pull") and not label:
                raise ConfigError(f"[{kind}] section needs a label", lineno)
            if kind not in _SECTION_KEYS and kind not in ("pull", "paper_values"):
                raise ConfigError(f"unknown section [{kind}]", lineno)
            current = _Section(kind, label, lineno)
            sections.append(current)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ConfigError("key/value outside of any section", lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if not key:
            raise ConfigError("empty key", lineno)
        if key in current.lines:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        allowed = _SECTION_KEYS.get(current.kind)
        if allowed is not None and key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{current.kind}]", lineno)
        if current.kind == "pull" and not _PULL_KEY.match(key):
            raise ConfigError(f"pull keys are delta_x_<i> / delta_f_c_<i>, got {key!r}", lineno)
        current.lines[key] = lineno
        if key == "family":
            current.words[key] = value
        else:
            current.values[key] = parse_quantity(value, key, lineno)
    return sections


def _require(section: _Section, key: str, where: str) -> float:
    if key not in section.values:
        raise ValidationError([f"{where}: missing required field {key}"])
    return section.values[key]


def _as_int(section: _Section, key: str) -> int | None:
    if key not in section.values:
        return None
    value = section.values[key]
    if value != int(value):
        raise ConfigError(f"{key} must be an integer", section.lines[key])
    return int(value)


def _build_mode(section: _Section, pulls: dict[str, _Section]) -> ModeEntry:
    label = section.label
    where = f"mode {label}"
    match = _LABEL_INDICES.match(label)
    groups = [g for g in match.groups() if g is not None] if match else None

    if "family" in section.words:
        try:
            family = ModeFamily.parse(section.words["family"])
        except ValueError as exc:
            raise ConfigError(str(exc), section.lines["family"]) from None
    elif groups:
        family = ModeFamily.parse(groups[0])
    else:
        raise ValidationError([f"{where}: missing required field family"])

    defaults = [int(g) for g in groups[1:]] if groups else [None, None, None]
    indices = []
    for key, default in zip("nmp", defaults):
        value = _as_int(section, key)
        value = default if value is None else value
        if value is None:
            raise ValidationError([f"{where}: missing required field {key}"])
        indices.append(value)

    mode = AcousticMode(
        label=label,
        family=family,
        indices=tuple(indices),
        f_m=_require(section, "f_m", where),
        q_m=_require(section, "q_m", where),
        m_eff=_require(section, "m_eff", where),
        gamma_m=section.values.get("gamma_m"),
    )

    bvd = None
    values = section.values
    if "r_m" in values:
        bvd = BvdBranch.from_mode(mode, values["r_m"]) if mode.q_m > 0 and values["r_m"] > 0 else BvdBranch(values["r_m"])
        # declared L/C are kept so validate() can check them against the values implied by k_m
        if "l_m" in values or "c_m" in values:
            bvd = BvdBranch(
                r_m=bvd.r_m,
                l_m=values.get("l_m", bvd.l_m),
                c_m=values.get("c_m", bvd.c_m),
                k_m=bvd.k_m,
            )
    elif "l_m" in values or "c_m" in values:
        raise ValidationError([f"{where}: l_m/c_m given without r_m"])

    overtone = _as_int(section, "overtone_n")
    if overtone is None and "envelope_waist_r0" in values:
        overtone = mode.indices[0]

    samples: tuple[tuple[float, float], ...] = ()
    pull = pulls.get(label)
    if pull is not None:
        samples = _pull_samples(pull)
        if "pull_factor_g" in values:
            raise ValidationError([f"{where}: give either pull_factor_g or a [pull] section, not both"])

    return ModeEntry(
        mode=mode,
        bvd=bvd,
        overtone_n=overtone,
        envelope_waist_r0=values.get("envelope_waist_r0"),
        pull_factor_g=values.get("pull_factor_g"),
        pull_samples=samples,
    )


def _pull_samples(section: _Section) -> tuple[tuple[float, float], ...]:
    pairs: dict[int, dict[str, float]] = {}
    for key, value in section.values.items():
        name, idx = _PULL_KEY.match(key).groups()
        pairs.setdefault(int(idx), {})[name] = value
    samples = []
    for idx in sorted(pairs):
        pair = pairs[idx]
        if set(pair) != {"delta_x", "delta_f_c"}:
            raise ValidationError([f"pull {section.label}: sample {idx} needs both delta_x and delta_f_c"])
        samples.append((pair["delta_x"], pair["delta_f_c"]))
    return tuple(samples)


def parse_config(text: str) -> SystemConfig:
    sections = _tokenize(text)
    singles: dict[str, _Section] = {}
    mode_sections: list[_Section] = []
    pulls: dict[str, _Section] = {}
    for sec in sections:
        if sec.kind == "mode":
            mode_sections.append(sec)
        elif sec.kind == "pull":
            if sec.label in pulls:
                raise ConfigError(f"duplicate [pull {sec.label}] section", sec.line)
            pulls[sec.label] = sec
        else:
            if sec.kind in singles:
                raise ConfigError(f"duplicate [{sec.kind}] section", sec.line)
            singles[sec.kind] = sec

    labels = {sec.label for sec in mode_sections}
    for label, sec in pulls.items():
        if label not in labels:
            raise ConfigError(f"[pull {label}] refers to an undefined mode", sec.line)

    if "cavity" not in singles:
        raise ValidationError(["missing [cavity] section"])
    cav = singles["cavity"]
    # q_unloaded / kappa_c in the file are ignored; they are always recomputed
    cavity = CavityMode(
        f_c=_require(cav, "f_c", "cavity"),
        q_loaded=_require(cav, "q_loaded", "cavity"),
        beta1=cav.values.get("beta1", 0.0),
        beta2=cav.values.get("beta2", 0.0),
    )

    def get(kind: str) -> dict[str, float]:
        return singles[kind].values if kind in singles else {}

    constants = PhysicalConstants(**get("constants"))
    material = MaterialProperties(**get("material"))
    geometry = CrystalGeometry(**get("geometry"))
    readout = ReadoutSettings(**get("readout"))

    overlap = None
    if "overlap" in singles:
        ov = singles["overlap"]
        overlap = (_require(ov, "fraction_split", "overlap"), _require(ov, "fraction_single", "overlap"))

    modes = tuple(_build_mode(sec, pulls) for sec in mode_sections)
    refs = tuple(get("paper_values").items())

    config = SystemConfig(
        cavity=cavity,
        modes=modes,
        constants=constants,
        material=material,
        geometry=geometry,
        readout=readout,
        overlap=overlap,
        paper_reference_values=refs,
    )
    violations = validate(config)
    if violations:
        raise ValidationError(violations)
    return config


def load_config(path) -> SystemConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _num(value: float) -> str:
    return repr(float(value)) if math.isfinite(value) else str(value)


def dump_config(config: SystemConfig) -> str:
    """Serialize to the config grammar, in SI units with full precision."""
    out = []

    def section(header: str, items: list[tuple[str, float | str | None, str]]):
        out.append(f"[{header}]")
        for key, value, unit in items:
            if value is None:
                continue
            text = value if isinstance(value, str) else _num(value)
            out.append(f"{key} = {text} {unit}".rstrip())
        out.append("")

    c = config.cavity
    section("cavity", [("f_c", c.f_c, "Hz"), ("q_loaded", c.q_loaded, ""),
                       ("beta1", c.beta1, ""), ("beta2", c.beta2, "")])
    section("constants", [("hbar", config.constants.hbar, "J*s")])
    section("material", [("density", config.material.density, "kg/m^3")])
    g = config.geometry
    section("geometry", [("diameter", g.diameter, "m"), ("center_thickness", g.center_thickness, "m"),
                         ("convex_radius", g.convex_radius, "m")])
    r = config.readout
    if any(v is not None for v in (r.k_phi, r.drive_voltage, r.incident_power)):
        section("readout", [("k_phi", r.k_phi, "V/rad"), ("drive_voltage", r.drive_voltage, "V"),
                            ("incident_power", r.incident_power, "W")])
    if config.overlap is not None:
        section("overlap", [("fraction_split", config.overlap[0], ""),
                            ("fraction_single", config.overlap[1], "")])
    for entry in config.modes:
        m = entry.mode
        items = [
            ("family", m.family.value, ""),
            ("n", float(m.indices[0]), ""), ("m", float(m.indices[1]), ""), ("p", float(m.indices[2]), ""),
            ("f_m", m.f_m, "Hz"), ("q_m", m.q_m, ""), ("m_eff", m.m_eff, "kg"), ("gamma_m", m.gamma_m, "Hz"),
        ]
        if entry.bvd is not None:
            items += [("r_m", entry.bvd.r_m, "ohm"), ("l_m", entry.bvd.l_m, "H"), ("c_m", entry.bvd.c_m, "F")]
        if entry.overtone_n is not None:
            items.append(("overtone_n", float(entry.overtone_n), ""))
        items += [("envelope_waist_r0", entry.envelope_waist_r0, "m"),
                  ("pull_factor_g", entry.pull_factor_g, "Hz/m")]
        section(f"mode {m.label}", items)
        if entry.pull_samples:
            pull_items = []
            for i, (dx, df) in enumerate(entry.pull_samples, start=1):
                pull_items += [(f"delta_x_{i}", dx, "m"), (f"delta_f_c_{i}", df, "Hz")]
            section(f"pull {m.label}", pull_items)
    if config.paper_reference_values:
        section("paper_values", [(k, v, "") for k, v in config.paper_reference_values])
    return "\n".join(out)
