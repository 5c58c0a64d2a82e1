"""Simulated phase-bridge readout of a piezoelectrically driven BAW mode.

Chain: drive voltage -> force ``k_m V`` -> single-pole mechanical response
``x(f)`` -> cavity frequency shift ``G x`` -> mixer voltage
``(dV/df_c) G x``. The bridge is an ideal quadrature discriminator, flat
over the mechanical bandwidth; the oscillator is strictly linear.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import AcousticMode, Spectrum


class SidebandTruncationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DriveSpec:
    voltage_amplitude: float
    frequency: float

    def __post_init__(self):
        if not self.voltage_amplitude >= 0:
            raise ValueError("voltage_amplitude must be >= 0")
        if not self.frequency > 0:
            raise ValueError("frequency must be > 0")


@dataclass(frozen=True)
class DiscriminatorSpec:
    phase_gain_k_phi: float
    q_loaded: float
    f_c: float

    @property
    def sensitivity(self) -> float:
        return discriminator_sensitivity(self.phase_gain_k_phi, self.q_loaded, self.f_c)


def discriminator_sensitivity(phase_gain_k_phi: float, q_loaded: float, f_c: float) -> float:
    """Mixer volts per hertz of cavity shift.

    A resonator's transmission phase slope at line centre is
    ``dphi/df = 2 Q_L / f_c``; the mixer converts phase with gain K_phi.
    """
    if q_loaded <= 0 or f_c <= 0:
        raise ValueError("q_loaded and f_c must be > 0")
    return phase_gain_k_phi * 2 * q_loaded / f_c


def driven_response(mode: AcousticMode, k_m: float, drive: DriveSpec | None = None, *,
                    voltage: float | None = None, frequency=None):
    """Steady-state displacement amplitude (m) and phase (rad) of a driven mode.

    Pass a DriveSpec, or ``voltage`` with a scalar/array ``frequency``.
    """
    if drive is not None:
        voltage, frequency = drive.voltage_amplitude, drive.frequency
    wm = 2 * np.pi * mode.f_m
    wd = 2 * np.pi * np.asarray(frequency, dtype=float)
    accel = k_m * voltage / mode.m_eff
    detune = wm**2 - wd**2
    damping = wd * wm / mode.q_m
    amplitude = accel / np.hypot(detune, damping)
    phase = np.arctan2(damping, detune)
    if amplitude.ndim == 0:
        return float(amplitude), float(phase)
    return amplitude, phase


def bessel_j_orders(max_order: int, x: float) -> np.ndarray:
    """J_0(x) .. J_max_order(x) by Miller's backward recurrence.

    Normalized with J_0 + 2 sum J_2k = 1, which keeps every order accurate
    including those far beyond x where forward recurrence is unstable.
    """
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    out = np.zeros(max_order + 1)
    if x == 0:
        out[0] = 1.0
        return out
    sign = 1.0
    if x < 0:
        x, sign = -x, -1.0
    start = max(max_order, int(x)) + 20 + int(math.sqrt(40 * max(max_order, x, 1)))
    start += start % 2
    j_next, j = 0.0, 1e-300
    norm = 0.0
    for k in range(start, 0, -1):
        j_prev = 2 * k / x * j - j_next
        j_next, j = j, j_prev
        if k - 1 <= max_order:
            out[k - 1] = j
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2 * j
        if abs(j) > 1e250:
            j_next *= 1e-250
            j *= 1e-250
            out *= 1e-250
            norm *= 1e-250
    norm += j  # J_0 term
    out /= norm
    if sign < 0:
        out[1::2] *= -1  # J_k(-x) = (-1)^k J_k(x)
    return out


def fm_sideband_spectrum(f_c: float, peak_deviation: float, f_mod: float, max_order: int) -> Spectrum:
    """Line spectrum of a sinusoidally frequency-modulated carrier.

    Lines sit at ``f_c + k f_mod`` for ``k = -max_order .. max_order`` with
    relative amplitude ``|J_k(beta)|``, ``beta = peak_deviation / f_mod``.
    Warns with SidebandTruncationWarning when the outermost line still
    carries more than 1e-6 of the carrier scale.
    """
    if not f_mod > 0:
        raise ValueError("f_mod must be > 0")
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    beta = peak_deviation / f_mod
    j = np.abs(bessel_j_orders(max_order, beta))
    if j[-1] > 1e-6:
        warnings.warn(
            f"|J_{max_order}({beta:g})| = {j[-1]:.3g}; sideband series truncated",
            SidebandTruncationWarning,
            stacklevel=2,
        )
    k = np.arange(-max_order, max_order + 1)
    return Spectrum(f_c + k * f_mod, j[np.abs(k)], label=f"fm beta={beta:g}", convention="amplitude")


def sideband_power_sum(spectrum: Spectrum) -> float:
    """Sum of squared line amplitudes; 1 for an untruncated FM spectrum."""
    return float(np.sum(spectrum.values**2))


def default_grid(mode: AcousticMode, points: int = 2001, span_fwhm: float = 10.0) -> np.ndarray:
    """``f_m +/- span_fwhm`` linewidths, ``points`` samples."""
    fwhm = mode.f_m / mode.q_m
    return np.linspace(mode.f_m - span_fwhm * fwhm, mode.f_m + span_fwhm * fwhm, points)


def drive_sweep(voltage: float, frequencies) -> list[DriveSpec]:
    return [DriveSpec(voltage, float(f)) for f in frequencies]


def mixer_output_trace(mode: AcousticMode, k_m: float, disc: DiscriminatorSpec, pull_factor_g: float,
                       drive_sweep: Sequence[DriveSpec], *, noise: float = 0.0,
                       seed: int | None = None) -> Spectrum:
    """Mixer voltage magnitude across a frequency sweep at fixed drive voltage.

    ``noise`` adds white Gaussian noise with standard deviation ``noise``
    times the noiseless peak; ``seed`` makes it reproducible.
    """
    if not drive_sweep:
        raise ValueError("drive_sweep is empty")
    voltages = {d.voltage_amplitude for d in drive_sweep}
    if len(voltages) != 1:
        raise ValueError("all drives in a sweep must share voltage_amplitude")
    freqs = np.array([d.frequency for d in drive_sweep])
    if freqs.size > 1 and not np.all(np.diff(freqs) > 0):
        raise ValueError("drive frequencies must be strictly increasing")
    amplitude, _ = driven_response(mode, k_m, voltage=voltages.pop(), frequency=freqs)
    values = disc.sensitivity * pull_factor_g * np.atleast_1d(amplitude)
    if noise:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, noise * np.max(np.abs(values)), values.size)
    return Spectrum(freqs, values, label=f"mixer {mode.label}", convention="amplitude")


def power_sweep(mode: AcousticMode, k_m: float, disc: DiscriminatorSpec, pull_factor_g: float,
                voltages: Sequence[float], freq_grid) -> list[Spectrum]:
    volts = list(voltages)
    if any(v <= 0 for v in volts) or any(b <= a for a, b in zip(volts, volts[1:])):
        raise ValueError("voltages must be positive and ascending")
    return [
        mixer_output_trace(mode, k_m, disc, pull_factor_g, drive_sweep(v, freq_grid))
        for v in volts
    ]
