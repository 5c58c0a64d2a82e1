"""Domain types shared by every part of the toolkit.

All quantities are strict SI. Linewidths (``kappa_c``, ``gamma_m``) are
cycle-frequency widths in Hz, never rad/s.

Config types never raise on construction; :func:`validate` reports every broken
invariant so a config with several mistakes can be diagnosed in one pass.
Derived fields (``q_unloaded``, ``kappa_c``) are always recomputed.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

HBAR_CODATA = 1.054571817e-34  # J s
LINBO3_DENSITY = 4650.0  # kg/m^3


class ModeFamily(enum.Enum):
    A_longitudinal = "A"
    B_shear = "B"

    @classmethod
    def parse(cls, text: str) -> "ModeFamily":
        key = text.strip()
        for member in cls:
            if key in (member.value, member.name):
                return member
        raise ValueError(f"unknown mode family {text!r} (expected A or B)")


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = HBAR_CODATA


@dataclass(frozen=True)
class MaterialProperties:
    density: float = LINBO3_DENSITY
    name: str = "LiNbO3"


@dataclass(frozen=True)
class CrystalGeometry:
    """Plano-convex BAW blank. Defaults are the 30 mm x 2 mm, R=100 mm crystal."""

    diameter: float = 30e-3
    center_thickness: float = 2e-3
    convex_radius: float = 100e-3

    @property
    def radius(self) -> float:
        return self.diameter / 2


@dataclass(frozen=True)
class AcousticMode:
    label: str
    family: ModeFamily
    indices: tuple[int, int, int]
    f_m: float
    q_m: float
    m_eff: float
    gamma_m: float | None = None

    def __post_init__(self):
        if self.gamma_m is None and self.q_m:
            object.__setattr__(self, "gamma_m", self.f_m / self.q_m)


@dataclass(frozen=True)
class CavityMode:
    f_c: float
    q_loaded: float
    beta1: float = 0.0
    beta2: float = 0.0
    q_unloaded: float = field(init=False)
    kappa_c: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "q_unloaded", self.q_loaded * (1.0 + self.beta1 + self.beta2)
        )
        kappa = self.f_c / self.q_loaded if self.q_loaded else math.inf
        object.__setattr__(self, "kappa_c", kappa)


@dataclass(frozen=True)
class BvdBranch:
    """Motional arm of the Butterworth-Van Dyke circuit.

    Only ``r_m`` is normally measured; :meth:`from_mode` fills ``k_m``, ``l_m``
    and ``c_m`` from the mode via ``k_m^2 = w_m M / (Q_m R_m)``,
    ``M = k_m^2 L_m`` and ``R_m = k_m^2 / C_m``.
    """

    r_m: float
    l_m: float | None = None
    c_m: float | None = None
    k_m: float | None = None

    @classmethod
    def from_mode(cls, mode: AcousticMode, r_m: float) -> "BvdBranch":
        k2 = 2 * math.pi * mode.f_m * mode.m_eff / (mode.q_m * r_m)
        return cls(r_m=r_m, l_m=mode.m_eff / k2, c_m=k2 / r_m, k_m=math.sqrt(k2))


@dataclass(frozen=True)
class ReadoutSettings:
    k_phi: float | None = None  # mixer phase gain, V/rad
    drive_voltage: float | None = None  # V
    incident_power: float | None = None  # W, recorded only


@dataclass(frozen=True)
class ModeEntry:
    """One acoustic mode plus everything the config attaches to it."""

    mode: AcousticMode
    bvd: BvdBranch | None = None
    overtone_n: int | None = None
    envelope_waist_r0: float | None = None
    pull_factor_g: float | None = None
    pull_samples: tuple[tuple[float, float], ...] = ()

    @property
    def label(self) -> str:
        return self.mode.label


@dataclass(frozen=True)
class SystemConfig:
    cavity: CavityMode
    modes: tuple[ModeEntry, ...]
    constants: PhysicalConstants = PhysicalConstants()
    material: MaterialProperties = MaterialProperties()
    geometry: CrystalGeometry = CrystalGeometry()
    readout: ReadoutSettings = ReadoutSettings()
    overlap: tuple[float, float] | None = None  # (split-post, single-post) fractions
    paper_reference_values: tuple[tuple[str, float], ...] = ()

    def mode(self, label: str) -> ModeEntry:
        for entry in self.modes:
            if entry.label == label:
                return entry
        raise KeyError(f"no mode labelled {label!r}")

    def reference(self, name: str) -> float | None:
        for key, value in self.paper_reference_values:
            if key == name:
                return value
        return None


def _rel_mismatch(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def _positive(value, name: str, out: list[str], where: str = "") -> bool:
    prefix = f"{where}: " if where else ""
    if value is None or not math.isfinite(value) or value <= 0:
        out.append(f"{prefix}{name} must be > 0")
        return False
    return True


def validate(config: SystemConfig) -> list[str]:
    """Return one message per violated invariant; empty when the config is valid."""
    out: list[str] = []

    if not config.constants.hbar > 0:
        out.append("hbar must be > 0")
    _positive(config.material.density, "density", out, "material")

    geo = config.geometry
    ok = all(
        _positive(getattr(geo, name), name, out, "geometry")
        for name in ("diameter", "center_thickness", "convex_radius")
    )
    if ok and not geo.convex_radius > geo.center_thickness:
        out.append("geometry: convex_radius must be > center_thickness")

    cav = config.cavity
    _positive(cav.f_c, "f_c", out, "cavity")
    _positive(cav.q_loaded, "q_loaded", out, "cavity")
    for name in ("beta1", "beta2"):
        if not getattr(cav, name) >= 0:
            out.append(f"cavity: {name} must be >= 0")
    expected_q0 = cav.q_loaded * (1 + cav.beta1 + cav.beta2)
    if _rel_mismatch(cav.q_unloaded, expected_q0) > 1e-12:
        out.append("cavity: q_unloaded inconsistent with q_loaded*(1+beta1+beta2)")

    if not config.modes:
        out.append("at least one acoustic mode is required")
    labels = [entry.label for entry in config.modes]
    for label in sorted({lab for lab in labels if labels.count(lab) > 1}):
        out.append(f"mode label {label!r} is not unique")

    for entry in config.modes:
        out.extend(_validate_entry(entry, config.geometry))

    if config.overlap is not None:
        for name, frac in zip(("fraction_split", "fraction_single"), config.overlap):
            if not 0 < frac <= 1:
                out.append(f"overlap: {name} must be in (0, 1]")
    return out


def _validate_entry(entry: ModeEntry, geometry: CrystalGeometry) -> list[str]:
    out: list[str] = []
    mode = entry.mode
    where = f"mode {mode.label}"
    ok_f = _positive(mode.f_m, "f_m", out, where)
    ok_q = _positive(mode.q_m, "q_m", out, where)
    _positive(mode.m_eff, "m_eff", out, where)
    if any(i < 0 for i in mode.indices):
        out.append(f"{where}: indices must be non-negative")
    if ok_f and ok_q and _positive(mode.gamma_m, "gamma_m", out, where):
        if _rel_mismatch(mode.gamma_m * mode.q_m, mode.f_m) > 1e-12:
            out.append(f"{where}: gamma_m inconsistent with f_m/q_m")

    bvd = entry.bvd
    if bvd is not None:
        for name in ("r_m", "l_m", "c_m", "k_m"):
            value = getattr(bvd, name)
            if value is not None:
                _positive(value, name, out, where)
        if bvd.k_m and bvd.l_m and mode.m_eff > 0:
            if _rel_mismatch(bvd.k_m**2 * bvd.l_m, mode.m_eff) > 1e-9:
                out.append(f"{where}: k_m^2 * l_m inconsistent with m_eff")
        if bvd.k_m and bvd.c_m and bvd.r_m > 0:
            if _rel_mismatch(bvd.k_m**2 / bvd.c_m, bvd.r_m) > 1e-9:
                out.append(f"{where}: k_m^2 / c_m inconsistent with r_m")

    if entry.overtone_n is not None and entry.overtone_n < 1:
        out.append(f"{where}: overtone_n must be a positive integer")
    r0 = entry.envelope_waist_r0
    if r0 is not None and _positive(r0, "envelope_waist_r0", out, where):
        if r0 > geometry.radius:
            out.append(f"{where}: envelope_waist_r0 must not exceed the crystal radius")
    if entry.pull_factor_g is not None and not entry.pull_factor_g >= 0:
        out.append(f"{where}: pull_factor_g must be >= 0")
    for dx, _ in entry.pull_samples:
        if not dx > 0:
            out.append(f"{where}: pull sample delta_x must be > 0")
            break
    return out


@dataclass(frozen=True, eq=False)
class Spectrum:
    """A sampled frequency-domain trace.

    ``convention`` says how ``values`` scale with the underlying response:
    ``"amplitude"`` for linear magnitudes (volts, metres), ``"power"`` for
    squared ones. The fitter uses it to pick the matching line shape.
    """

    frequencies: np.ndarray
    values: np.ndarray
    label: str = ""
    convention: str = "power"

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if f.ndim != 1 or f.shape != v.shape:
            raise ValueError("frequencies and values must be 1-D and of equal length")
        if f.size > 1 and not np.all(np.diff(f) > 0):
            raise ValueError("frequencies must be strictly increasing")
        if self.convention not in ("amplitude", "power"):
            raise ValueError(f"unknown convention {self.convention!r}")
        f.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.frequencies.size
