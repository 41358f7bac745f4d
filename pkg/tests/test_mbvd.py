import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import REF_DEVICE
from sezawa.mbvd import (
    FitConfig,
    MbvdParams,
    NoResonanceError,
    _model_and_jacobian,
    derived_kpis,
    fit_mbvd,
    initial_guess,
    mbvd_admittance,
    motional_admittance,
)

F = np.linspace(15.0e9, 17.0e9, 2001)


def test_closed_form_frequencies():
    p = REF_DEVICE
    assert p.fs == pytest.approx(1 / (2 * math.pi * math.sqrt(1e-7 * 1e-15)), rel=1e-15)
    assert p.fp == pytest.approx(p.fs * math.sqrt(1 + 1 / 26), rel=1e-15)
    assert p.qm == pytest.approx(380.23, rel=1e-4)


def test_admittance_limits():
    # without resistances and far below resonance the circuit is C0 + Cm
    p = MbvdParams(1e-9, 1e-7, 1e-15, 26e-15)
    f = np.array([1e6])
    y = mbvd_admittance(p, f)
    assert y[0].imag / (2 * math.pi * 1e6) == pytest.approx(27e-15, rel=1e-6)
    # motional branch alone is purely resistive at fs
    ym = motional_admittance(26.3, 1e-7, 1e-15, [REF_DEVICE.fs])
    assert ym[0] == pytest.approx(1 / 26.3, rel=1e-12)


def test_jacobian_matches_finite_differences():
    theta = np.log(REF_DEVICE.as_array())
    w = 2 * np.pi * F[::100]
    _, jac = _model_and_jacobian(theta, w)
    for i in range(6):
        h = 1e-6
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        fd = (mbvd_admittance(MbvdParams.from_array(np.exp(tp)), w / (2 * np.pi))
              - mbvd_admittance(MbvdParams.from_array(np.exp(tm)), w / (2 * np.pi))) / (2 * h)
        np.testing.assert_allclose(jac[:, i], fd, rtol=1e-6, atol=1e-9 * np.max(np.abs(fd)))


@given(
    rm=st.floats(1, 100), lm=st.floats(1e-8, 1e-6), cm=st.floats(1e-16, 1e-14),
    ratio=st.floats(2, 200), r0=st.floats(0, 10), rs=st.floats(0, 10),
)
def test_fs_below_fp(rm, lm, cm, ratio, r0, rs):
    p = MbvdParams(rm, lm, cm, cm * ratio, r0, rs)
    assert p.fs < p.fp
    k = derived_kpis(p)
    assert 0 < k.kt2 < 1


def test_magnitude_extrema_near_fs_fp():
    p = MbvdParams(1.0, 1e-7, 1e-15, 26e-15)
    f = np.linspace(p.fs * 0.97, p.fp * 1.03, 20001)
    mag = np.abs(mbvd_admittance(p, f))
    i = int(np.argmax(mag))
    j = int(np.argmin(mag))
    assert abs(f[i] / p.fs - 1) < 1e-5
    assert abs(f[j] / p.fp - 1) < 1e-4


def test_roundtrip_noise_free():
    y = mbvd_admittance(REF_DEVICE, F)
    rep = fit_mbvd(F, y, initial_guess(F, y))
    assert rep.converged, rep.message
    np.testing.assert_allclose(rep.params.as_array(), REF_DEVICE.as_array(), rtol=1e-6)


def test_idempotent_at_truth():
    y = mbvd_admittance(REF_DEVICE, F)
    rep = fit_mbvd(F, y, REF_DEVICE)
    assert rep.converged
    assert rep.params == REF_DEVICE
    assert rep.residual == 0.0


@pytest.mark.parametrize("k", [0.1, 3.0])
def test_impedance_scale_covariance(k):
    # scaling R, L by k and C by 1/k scales Y by 1/k at the same frequencies
    y = mbvd_admittance(REF_DEVICE, F)
    ys = mbvd_admittance(REF_DEVICE.scaled(k), F)
    np.testing.assert_allclose(ys, y / k, rtol=1e-12)
    rep = fit_mbvd(F, ys, initial_guess(F, ys))
    np.testing.assert_allclose(rep.params.as_array(), REF_DEVICE.scaled(k).as_array(), rtol=1e-6)


def test_initial_guess_is_close():
    y = mbvd_admittance(REF_DEVICE, F)
    g = initial_guess(F, y)
    assert g.fs == pytest.approx(REF_DEVICE.fs, rel=2e-3)
    assert g.C0 == pytest.approx(REF_DEVICE.C0, rel=0.05)


def test_no_resonance_raises():
    y = 1j * 2 * np.pi * F * 1e-13
    with pytest.raises(NoResonanceError):
        initial_guess(F, y)


def test_degenerate_trace_reports_not_converged():
    rep = fit_mbvd(F, np.zeros_like(F, dtype=complex), REF_DEVICE)
    assert not rep.converged
    assert "degenerate" in rep.message


def test_iteration_budget_reported():
    y = mbvd_admittance(REF_DEVICE, F)
    g = initial_guess(F, y)
    rep = fit_mbvd(F, y, g, FitConfig(max_iterations=1))
    assert not rep.converged and rep.iterations == 1


def test_too_few_points():
    with pytest.raises(ValueError, match="50"):
        fit_mbvd(F[:10], mbvd_admittance(REF_DEVICE, F[:10]), REF_DEVICE)


def test_invalid_params():
    with pytest.raises(ValueError):
        MbvdParams(-1, 1e-7, 1e-15, 1e-14)
    with pytest.raises(ValueError):
        MbvdParams(1, 1e-7, 1e-15, 1e-14, R0=-1)


def test_derived_kpis_fom_is_fraction_product():
    k = derived_kpis(REF_DEVICE)
    assert k.FOM == pytest.approx(k.Qm * k.kt2, rel=1e-15)
    assert k.kt2 == pytest.approx(0.045, abs=0.001)


def test_report_json_fields():
    y = mbvd_admittance(REF_DEVICE, F)
    d = fit_mbvd(F, y, REF_DEVICE).to_dict()
    assert set(d) == {"params", "residual", "iterations", "converged", "message"}
    assert set(d["params"]) == {"Rm", "Lm", "Cm", "C0", "R0", "Rs"}


@pytest.mark.parametrize("k", [1e-3, 0.5, 7.0, 1e4])
def test_derived_kpis_scale_free(k):
    a = derived_kpis(REF_DEVICE)
    b = derived_kpis(REF_DEVICE.scaled(k))
    for name in ("fs", "fp", "Qm", "kt2", "FOM"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), rel=1e-12)
