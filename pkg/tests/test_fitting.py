import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import curve_fit

from bawopto.fitting import (
    FitError,
    NoPeakError,
    SingularStepError,
    beta_from_reflection,
    estimate_initial,
    fit_lorentzian,
    fit_many,
    lorentzian,
    s11_from_beta,
    unloaded_q,
)
from bawopto.model import Spectrum

F0 = 5.8e6


def synthetic(q, amplitude=1.0, baseline=0.0, convention="power", points=2001, span=10, noise=0.0, seed=0):
    fwhm = F0 / q
    f = np.linspace(F0 - span * fwhm, F0 + span * fwhm, points)
    y = lorentzian(f, F0, fwhm, amplitude, baseline, convention)
    if noise:
        y = y + np.random.default_rng(seed).normal(0, noise * amplitude, f.size)
    return Spectrum(f, y, convention=convention)


def test_estimate_initial_noiseless():
    trace = synthetic(3e6)
    f0, fwhm, amp, base = estimate_initial(trace)
    step = trace.frequencies[1] - trace.frequencies[0]
    assert abs(f0 - F0) <= step
    assert fwhm == pytest.approx(1.933, rel=0.2)
    assert amp > 0.9


def test_estimate_initial_flat():
    flat = Spectrum(np.arange(10.0), np.full(10, 3.0))
    with pytest.raises(NoPeakError, match="no peak found"):
        estimate_initial(flat)


def test_estimate_initial_tie_prefers_lower_frequency():
    y = np.zeros(11)
    y[3] = y[7] = 1.0
    assert estimate_initial(Spectrum(np.arange(11.0), y))[0] == 3.0


def test_estimate_initial_too_few_points():
    with pytest.raises(FitError):
        estimate_initial(Spectrum(np.arange(6.0), np.arange(6.0)))


@pytest.mark.parametrize("convention", ["power", "amplitude"])
def test_noiseless_recovery(convention):
    fit = fit_lorentzian(synthetic(3.3e6, convention=convention))
    assert fit.converged
    assert fit.f0 == pytest.approx(F0, rel=1e-6)
    assert fit.fwhm == pytest.approx(F0 / 3.3e6, rel=1e-6)
    assert fit.amplitude == pytest.approx(1.0, rel=1e-6)
    assert fit.q_loaded * fit.fwhm == pytest.approx(fit.f0, rel=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_noisy_recovery(seed):
    q = 3.3e6
    fit = fit_lorentzian(synthetic(q, noise=0.01, seed=seed))
    assert fit.q_loaded == pytest.approx(q, rel=0.02)
    assert abs(fit.f0 - F0) < 0.1 * F0 / q


def test_matches_scipy_curve_fit():
    # independent optimizer on the same noisy data
    trace = synthetic(3.3e6, amplitude=2.0, baseline=0.3, noise=0.02, seed=11)
    fit = fit_lorentzian(trace)
    x = trace.frequencies - F0
    popt, _ = curve_fit(lambda x, x0, w, a, b: lorentzian(x, x0, w, a, b), x, trace.values,
                        p0=(0.0, F0 / 3.3e6, 2.0, 0.3), xtol=1e-14, ftol=1e-14)
    assert fit.f0 - F0 == pytest.approx(popt[0], abs=1e-6 * popt[1])
    np.testing.assert_allclose(fit.params[1:], popt[1:], rtol=1e-6)


def test_zero_amplitude_is_singular():
    flat = Spectrum(np.linspace(0, 1, 50), np.zeros(50))
    with pytest.raises(SingularStepError):
        fit_lorentzian(flat)
    with pytest.raises(SingularStepError):
        fit_lorentzian(synthetic(3.3e6), init=(F0, 1.0, 0.0, 0.0))


def test_non_convergence_returns_best():
    fit = fit_lorentzian(synthetic(3.3e6, noise=0.01), max_iterations=1)
    assert not fit.converged
    assert fit.iterations == 1


@pytest.mark.parametrize("convention", ["power", "amplitude"])
def test_refit_idempotent(convention):
    first = fit_lorentzian(synthetic(3.3e6, noise=0.01, seed=3, convention=convention))
    again = fit_lorentzian(synthetic(3.3e6, noise=0.01, seed=3, convention=convention), init=first.params)
    assert again.converged and again.iterations <= 2
    np.testing.assert_allclose(again.params[:3], first.params[:3], rtol=1e-10)
    assert again.baseline == pytest.approx(first.baseline, abs=1e-10 * abs(first.amplitude))


@settings(max_examples=20, deadline=None)
@given(c=st.floats(1e-3, 1e3))
def test_scale_equivariance(c):
    trace = synthetic(3.3e6, baseline=0.2, noise=0.01, seed=5)
    ref = fit_lorentzian(trace)
    fit = fit_lorentzian(Spectrum(trace.frequencies, c * trace.values))
    assert fit.f0 == pytest.approx(ref.f0, rel=1e-9)
    assert fit.fwhm == pytest.approx(ref.fwhm, rel=1e-9)
    assert fit.amplitude == pytest.approx(c * ref.amplitude, rel=1e-9)
    assert fit.baseline == pytest.approx(c * ref.baseline, rel=1e-9)


@settings(max_examples=20, deadline=None)
@given(delta=st.floats(-1e6, 1e6))
def test_shift_equivariance(delta):
    trace = synthetic(3.3e6, noise=0.01, seed=6)
    ref = fit_lorentzian(trace)
    fit = fit_lorentzian(Spectrum(trace.frequencies + delta, trace.values))
    assert fit.f0 - delta == pytest.approx(ref.f0, abs=1e-6 * ref.fwhm)
    assert fit.fwhm == pytest.approx(ref.fwhm, rel=1e-9)


def test_fit_many_keeps_order():
    traces = [synthetic(q) for q in (1e6, 2e6, 3e6, 4e6)]
    results = fit_many(traces, max_workers=4)
    assert [round(r.q_loaded / 1e6, 6) for r in results] == [1, 2, 3, 4]


@pytest.mark.parametrize("s11, expected", [(0.1111, 0.800), (0.7606, 0.136), (1.0, 0.0)])
def test_beta_from_reflection_paper_values(s11, expected):
    assert beta_from_reflection(s11, "undercoupled") == pytest.approx(expected, abs=1e-3)


def test_beta1_dip_depth():
    assert s11_from_beta(0.8) == pytest.approx(0.1111, abs=1e-4)
    assert s11_from_beta(0.136) == pytest.approx(0.7606, abs=1e-4)


def test_overcoupled_branch():
    assert beta_from_reflection(0.5, "overcoupled") == pytest.approx(3.0)
    with pytest.raises(ZeroDivisionError):
        beta_from_reflection(1.0, "overcoupled")
    with pytest.raises(ValueError):
        beta_from_reflection(1.2)


@settings(max_examples=200)
@given(beta=st.floats(0, 0.999999))
def test_reflection_round_trip(beta):
    assert beta_from_reflection(s11_from_beta(beta)) == pytest.approx(beta, abs=1e-12)


@pytest.mark.parametrize("ql, b1, b2, expected", [
    (2500, 0.8, 0.136, 4840.0),
    (2500, 0.0, 0.0, 2500.0),
    (330, 0.8, 0.136, 638.88),
])
def test_unloaded_q(ql, b1, b2, expected):
    assert unloaded_q(ql, b1, b2) == pytest.approx(expected, rel=1e-12)
