"""Effective modal mass from an analytic trapped-mode displacement.

The displacement is modelled as a flat-plate standing wave with a Gaussian
transverse envelope,

    u(r, z) = sin(n pi z / t0) * exp(-r^2 / r0^2),

peak-normalized to 1, and the mass is ``rho * integral(u^2 dV)`` over the
axisymmetric volume element ``2 pi r dr dz``. For ``r0`` well inside the blank
the integral has the closed form ``rho * pi * r0^2 * t0 / 4``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import CrystalGeometry, MaterialProperties


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModeShapeSpec:
    overtone_n: int
    envelope_waist_r0: float
    normalization: str = "peak_unity"

    def __post_init__(self):
        if self.overtone_n < 1 or int(self.overtone_n) != self.overtone_n:
            raise ValueError("overtone_n must be a positive integer")
        if not self.envelope_waist_r0 > 0:
            raise ValueError("envelope_waist_r0 must be > 0")
        if self.normalization != "peak_unity":
            raise ValueError(f"unsupported normalization {self.normalization!r}")


@dataclass(frozen=True)
class QuadratureSpec:
    radial_points: int = 256
    axial_points: int = 256
    scheme: str = "composite_gauss"
    panel_order: int = 8  # Gauss-Legendre nodes per panel
    rtol: float = 1e-6

    def __post_init__(self):
        if self.scheme != "composite_gauss":
            raise ValueError(f"unsupported quadrature scheme {self.scheme!r}")
        for name in ("radial_points", "axial_points"):
            value = getattr(self, name)
            if value < 16:
                raise ValueError(f"{name} must be >= 16")

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.radial_points, 2 * self.axial_points,
                              self.scheme, self.panel_order, self.rtol)


def composite_gauss(a: float, b: float, points: int, order: int = 8):
    """Nodes and weights of a composite Gauss-Legendre rule on [a, b]."""
    panels = max(1, math.ceil(points / order))
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _check_shape_domain(spec: ModeShapeSpec, geometry: CrystalGeometry):
    if spec.envelope_waist_r0 > geometry.radius:
        raise ValueError("envelope_waist_r0 must not exceed the crystal radius")


def mode_shape(spec: ModeShapeSpec, geometry: CrystalGeometry, r, z):
    """Peak-normalized displacement amplitude at (r, z). Accepts arrays."""
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    t0 = geometry.center_thickness
    if np.any(r < 0) or np.any(r > geometry.radius) or np.any(z < 0) or np.any(z > t0):
        raise ValueError("point lies outside the crystal")
    u = np.sin(spec.overtone_n * np.pi * z / t0) * np.exp(-(r**2) / spec.envelope_waist_r0**2)
    return float(u) if u.ndim == 0 else u


def _radial_rule(radius: float, quad: QuadratureSpec, core: float | None):
    if core is None or core >= radius:
        return composite_gauss(0.0, radius, quad.radial_points, quad.panel_order)
    # full resolution inside the envelope core, a coarse rule for the tail
    r1, w1 = composite_gauss(0.0, core, quad.radial_points, quad.panel_order)
    r2, w2 = composite_gauss(core, radius, max(quad.radial_points // 4, quad.panel_order), quad.panel_order)
    return np.concatenate([r1, r2]), np.concatenate([w1, w2])


def volume_integral(func: Callable, geometry: CrystalGeometry, quad: QuadratureSpec,
                    radial_core: float | None = None) -> float:
    """``integral(func(r, z) * 2 pi r dr dz)`` over the flat cylinder.

    ``radial_core`` splits the radial rule at that radius, for integrands
    concentrated near the axis.
    """
    r, wr = _radial_rule(geometry.radius, quad, radial_core)
    z, wz = composite_gauss(0.0, geometry.center_thickness, quad.axial_points, quad.panel_order)
    values = func(r[:, None], z[None, :])
    values = np.broadcast_to(values, (r.size, z.size))
    return float(2 * np.pi * np.einsum("i,ij,j->", wr * r, values, wz))


def modal_mass(func: Callable, geometry: CrystalGeometry, material: MaterialProperties,
               quad: QuadratureSpec = QuadratureSpec(), radial_core: float | None = None) -> float:
    """``rho * integral(|u|^2 dV)`` for an arbitrary peak-normalized shape ``func(r, z)``.

    Raises ConvergenceError if doubling both point counts moves the result by
    more than ``quad.rtol``; otherwise returns the finer estimate.
    """
    def integrand(r, z):
        return np.abs(func(r, z)) ** 2

    coarse = volume_integral(integrand, geometry, quad, radial_core)
    fine = volume_integral(integrand, geometry, quad.doubled(), radial_core)
    if fine <= 0:
        raise ConvergenceError("mode shape integrates to zero")
    change = abs(fine - coarse) / fine
    if change > quad.rtol:
        raise ConvergenceError(
            f"doubling resolution changed the mass by {change:.3g} (> {quad.rtol:g})"
        )
    return material.density * fine


def effective_mass(spec: ModeShapeSpec, geometry: CrystalGeometry, material: MaterialProperties,
                   quad: QuadratureSpec = QuadratureSpec()) -> float:
    _check_shape_domain(spec, geometry)
    return modal_mass(lambda r, z: mode_shape(spec, geometry, r, z), geometry, material, quad,
                      radial_core=8 * spec.envelope_waist_r0)


def gaussian_mass_closed_form(spec: ModeShapeSpec, geometry: CrystalGeometry,
                              material: MaterialProperties) -> float:
    """Untruncated closed form ``rho pi r0^2 t0 / 4``."""
    return material.density * math.pi * spec.envelope_waist_r0**2 * geometry.center_thickness / 4


def potential_energy(m_eff: float, f_m: float, amplitude: float) -> float:
    """Stored energy 1/2 M w^2 a^2 of a mode oscillating with peak amplitude ``amplitude``."""
    return 0.5 * m_eff * (2 * math.pi * f_m) ** 2 * amplitude**2
