"""Closed-form optomechanical and piezoelectric quantities.

Frequencies and linewidths are in Hz; ``w = 2 pi f`` is formed internally
wherever an angular frequency enters a formula. The pull factor G is a
positive magnitude in Hz/m (cavity frequency shift per metre of displacement).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import PhysicalConstants


@dataclass(frozen=True)
class PullSample:
    delta_x: float  # m
    delta_f_c: float  # Hz

    def __post_init__(self):
        if not self.delta_x > 0:
            raise ValueError("delta_x must be > 0")


@dataclass(frozen=True)
class CouplingResult:
    x_zpf: float
    pull_factor_g: float
    g0: float
    c0: float | None
    source: str  # "measured-G" or "table-g0"

    @property
    def x_zpf_conventional(self) -> float:
        """sqrt(hbar / (2 M w)), exactly half of ``x_zpf``."""
        return self.x_zpf / 2


def zero_point_fluctuation(f_m: float, m_eff: float,
                           constants: PhysicalConstants = PhysicalConstants()) -> float:
    """x_zpf = sqrt(2 hbar / (w_m M_eff)).

    This is twice the textbook sqrt(hbar / (2 M w)); see
    :attr:`CouplingResult.x_zpf_conventional`.
    """
    if not (f_m > 0 and m_eff > 0):
        raise ValueError("f_m and m_eff must be > 0")
    return math.sqrt(2 * constants.hbar / (2 * math.pi * f_m * m_eff))


def piezo_coupling_constant(f_m: float, m_eff: float, q_m: float, r_m: float) -> float:
    """BVD charge-displacement constant k_m = sqrt(w_m M / (Q_m R_m)), in C/m."""
    if min(f_m, m_eff, q_m, r_m) <= 0:
        raise ValueError("all inputs must be > 0")
    return math.sqrt(2 * math.pi * f_m * m_eff / (q_m * r_m))


def motional_current(k_m: float, f_m: float, displacement: float) -> float:
    return k_m * 2 * math.pi * f_m * displacement


def displacement_from_current(k_m: float, f_m: float, current: float) -> float:
    denom = k_m * 2 * math.pi * f_m
    if denom == 0:
        raise ZeroDivisionError("k_m * f_m is zero")
    return current / denom


def pull_factor(samples: Sequence[PullSample] | Iterable[tuple[float, float]]) -> float:
    """Slope of the through-origin least-squares line of delta_f_c against delta_x.

    Returned as a magnitude. Accepts PullSample objects or (dx, df) pairs.
    """
    pts = [s if isinstance(s, PullSample) else PullSample(*s) for s in samples]
    if len(pts) < 2:
        raise ValueError("pull_factor needs at least 2 samples")
    if len({p.delta_x for p in pts}) < 2:
        raise ValueError("all delta_x are equal; slope is undetermined")
    sxy = math.fsum(p.delta_x * p.delta_f_c for p in pts)
    sxx = math.fsum(p.delta_x * p.delta_x for p in pts)
    return abs(sxy / sxx)


def coupling_rate(pull_factor_g: float, x_zpf: float) -> float:
    """g0 = G x_zpf."""
    return pull_factor_g * x_zpf


def cooperativity(g0: float, gamma_m: float, kappa_c: float) -> float:
    """C0 = 4 g0^2 / (Gamma_m kappa_c)."""
    if gamma_m == 0 or kappa_c == 0:
        raise ZeroDivisionError("linewidths must be non-zero")
    return 4 * g0**2 / (gamma_m * kappa_c)


def implied_linewidth(g0: float, c0: float, kappa_c: float) -> float:
    """Mechanical linewidth Gamma_m that a reported (g0, C0) pair implies."""
    if c0 == 0 or kappa_c == 0:
        raise ZeroDivisionError("c0 and kappa_c must be non-zero")
    return 4 * g0**2 / (c0 * kappa_c)


def overlap_ratio(fraction_split: float, fraction_single: float) -> float:
    """Ratio of electric energy fractions inside the mechanical mode volume."""
    for frac in (fraction_split, fraction_single):
        if not 0 < frac <= 1:
            raise ValueError("energy fractions must lie in (0, 1]")
    return fraction_split / fraction_single


def couple(f_m: float, m_eff: float, *, pull_factor_g: float | None = None, g0: float | None = None,
           gamma_m: float | None = None, kappa_c: float | None = None,
           constants: PhysicalConstants = PhysicalConstants()) -> CouplingResult:
    """Assemble a CouplingResult from either a measured G or a tabulated g0."""
    if (pull_factor_g is None) == (g0 is None):
        raise ValueError("give exactly one of pull_factor_g or g0")
    x = zero_point_fluctuation(f_m, m_eff, constants)
    if pull_factor_g is not None:
        g0 = coupling_rate(pull_factor_g, x)
        source = "measured-G"
    else:
        pull_factor_g = g0 / x
        source = "table-g0"
    c0 = cooperativity(g0, gamma_m, kappa_c) if gamma_m and kappa_c else None
    return CouplingResult(x_zpf=x, pull_factor_g=pull_factor_g, g0=g0, c0=c0, source=source)
