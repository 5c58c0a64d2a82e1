"""Resonance-parameter extraction: Lorentzian line fits and cavity coupling.

Two line shapes share the parameters (f0, fwhm, amplitude, baseline):

* ``power``      ``y = A (w/2)^2 / ((f - f0)^2 + (w/2)^2) + b``
* ``amplitude``  ``y = A (w/2) / sqrt((f - f0)^2 + (w/2)^2) + b``

The second is the square root of the first, i.e. the magnitude of a
single-pole response. In both, ``w`` is the half-power linewidth, so
``Q = f0 / w`` regardless of whether the trace is a power or a voltage.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import Spectrum

MAX_ITERATIONS = 200
PARAM_RTOL = 1e-10


class FitError(RuntimeError):
    pass


class SingularStepError(FitError):
    pass


class NoPeakError(FitError):
    pass


@dataclass(frozen=True)
class FitResult:
    f0: float
    fwhm: float
    amplitude: float
    baseline: float
    residual_rms: float
    iterations: int
    converged: bool
    convention: str = "power"

    @property
    def q_loaded(self) -> float:
        return self.f0 / self.fwhm

    @property
    def params(self) -> tuple[float, float, float, float]:
        return (self.f0, self.fwhm, self.amplitude, self.baseline)


def lorentzian(f, f0: float, fwhm: float, amplitude: float, baseline: float,
               convention: str = "power"):
    half = fwhm / 2
    shape = half**2 / ((np.asarray(f) - f0) ** 2 + half**2)
    if convention == "amplitude":
        shape = np.sqrt(shape)
    return amplitude * shape + baseline


def estimate_initial(trace: Spectrum, convention: str | None = None) -> tuple[float, float, float, float]:
    """Initial (f0, fwhm, amplitude, baseline) from the raw trace.

    The baseline is the median, the peak is the largest excursion from it
    (lowest frequency wins a tie), and the width comes from interpolated
    crossings of the half-power level.
    """
    convention = convention or trace.convention
    f, y = trace.frequencies, trace.values
    if f.size < 7:
        raise FitError("trace needs at least 7 points")
    baseline = float(np.median(y))
    excursion = np.abs(y - baseline)
    peak = int(np.argmax(excursion))  # argmax returns the first, i.e. lowest-frequency, tie
    if excursion[peak] == 0:
        raise NoPeakError("no peak found")
    amplitude = float(y[peak] - baseline)
    f0 = float(f[peak])

    level = 0.5 if convention == "power" else math.sqrt(0.5)
    target = level * excursion[peak]
    left = _crossing(f, excursion, peak, target, -1)
    right = _crossing(f, excursion, peak, target, +1)
    if left is not None and right is not None:
        fwhm = right - left
    elif left is not None:
        fwhm = 2 * (f0 - left)
    elif right is not None:
        fwhm = 2 * (right - f0)
    else:
        fwhm = 10 * float(np.mean(np.diff(f)))
    return f0, float(fwhm), amplitude, baseline


def _crossing(f, e, peak: int, target: float, step: int) -> float | None:
    i = peak
    while 0 <= i + step < f.size:
        j = i + step
        if e[j] <= target:
            # linear interpolation between samples i (above) and j (below)
            frac = (e[i] - target) / (e[i] - e[j])
            return float(f[i] + frac * (f[j] - f[i]))
        i = j
    return None


def _model_and_jacobian(x, p, convention):
    """Model and Jacobian in centred frequency ``x = f - f_ref``."""
    x0, w, a, b = p
    half = w / 2
    d = x - x0
    denom = d**2 + half**2
    s = half**2 / denom  # power shape
    ds_dx0 = 2 * d * s / denom
    ds_dw = half * d**2 / denom**2
    if convention == "amplitude":
        r = np.sqrt(s)
        dr = 0.5 / r
        shape, dshape_dx0, dshape_dw = r, dr * ds_dx0, dr * ds_dw
    else:
        shape, dshape_dx0, dshape_dw = s, ds_dx0, ds_dw
    model = a * shape + b
    jac = np.column_stack([a * dshape_dx0, a * dshape_dw, shape, np.ones_like(x)])
    return model, jac


def fit_lorentzian(trace: Spectrum, init: Sequence[float] | None = None,
                   convention: str | None = None, max_iterations: int = MAX_ITERATIONS) -> FitResult:
    """Damped least-squares (Levenberg-Marquardt) fit of a single resonance line.

    ``convention`` defaults to the trace's own; ``init`` defaults to
    :func:`estimate_initial`. Steps are accepted only if they lower the sum of
    squares; the damping factor starts at 1e-3 and moves by x10 per
    rejected/accepted step. Converges when every parameter changes by less
    than 1e-10 relative. Non-convergence returns the best point found with
    ``converged=False``.
    """
    convention = convention or trace.convention
    if convention not in ("power", "amplitude"):
        raise ValueError(f"unknown convention {convention!r}")
    f, y = trace.frequencies, trace.values
    if init is None:
        try:
            init = estimate_initial(trace, convention)
        except NoPeakError:
            # a flat trace still gets fitted; its zero amplitude makes the step singular
            init = (float(np.median(f)), 10 * float(np.mean(np.diff(f))), 0.0, float(np.median(y)))
    f0, w, a, b = (float(v) for v in init)

    # centre frequencies so f0 is resolved at Hz-scale precision near MHz carriers
    f_ref = f0
    x = f - f_ref
    p = np.array([0.0, abs(w), a, b])
    span = float(f[-1] - f[0]) or 1.0
    scale = np.array([abs(f_ref) or span, 0.0, 0.0, 0.0])

    model, jac = _model_and_jacobian(x, p, convention)
    resid = y - model
    cost = float(resid @ resid)
    lam = 1e-3
    converged = False
    iterations = 0

    while iterations < max_iterations:
        iterations += 1
        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        if np.any(diag == 0) or not np.all(np.isfinite(jtj)):
            raise SingularStepError("normal equations are degenerate (zero-amplitude line?)")
        grad = jac.T @ resid
        try:
            step = np.linalg.solve(jtj + lam * np.diag(diag), grad)
        except np.linalg.LinAlgError as exc:
            raise SingularStepError("normal equations are singular") from exc

        ref = np.maximum(np.abs(p) + scale, [0.0, abs(p[1]), abs(p[2]), abs(p[2])])
        small = np.all(np.abs(step) <= PARAM_RTOL * ref)

        trial = p + step
        trial[1] = abs(trial[1])
        t_model, t_jac = _model_and_jacobian(x, trial, convention)
        t_resid = y - t_model
        t_cost = float(t_resid @ t_resid)
        if t_cost < cost or (small and t_cost <= cost):
            p, jac, resid, cost = trial, t_jac, t_resid, t_cost
            lam = max(lam / 10, 1e-15)
        else:
            lam *= 10
        if small:
            converged = True
            break
        if lam > 1e16:
            break

    return FitResult(
        f0=float(f_ref + p[0]),
        fwhm=float(p[1]),
        amplitude=float(p[2]),
        baseline=float(p[3]),
        residual_rms=math.sqrt(cost / f.size),
        iterations=iterations,
        converged=converged,
        convention=convention,
    )


def fit_many(traces: Iterable[Spectrum], convention: str | None = None,
             max_workers: int | None = None) -> list[FitResult]:
    """Fit several traces concurrently; results keep the input order."""
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda t: fit_lorentzian(t, convention=convention), traces))


def s11_from_beta(beta: float) -> float:
    """|S11| at resonance for an undercoupled port with coupling ``beta``."""
    return abs(1 - beta) / (1 + beta)


def beta_from_reflection(s11_min_magnitude: float, branch: str = "undercoupled") -> float:
    """Port coupling coefficient from the reflection-dip depth at resonance."""
    s = s11_min_magnitude
    if not 0 <= s <= 1:
        raise ValueError("|S11| must lie in [0, 1]")
    if branch == "undercoupled":
        return (1 - s) / (1 + s)
    if branch == "overcoupled":
        if s == 1:
            raise ZeroDivisionError("overcoupled branch undefined at |S11| = 1")
        return (1 + s) / (1 - s)
    raise ValueError(f"branch must be 'undercoupled' or 'overcoupled', not {branch!r}")


def unloaded_q(q_loaded: float, beta1: float, beta2: float) -> float:
    if q_loaded <= 0 or beta1 < 0 or beta2 < 0:
        raise ValueError("q_loaded must be > 0 and betas >= 0")
    return q_loaded * (1 + beta1 + beta2)
