import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_passive_s
from sezawa.touchstone import (
    NetworkData,
    PassivityWarning,
    SingularConversionError,
    TouchstoneError,
    admittance_trace,
    check_passivity,
    conjugate_match,
    design_l_section,
    parse_touchstone,
    s_to_y,
    serialize_touchstone,
    series_two_port,
    y_to_s,
)

HEADER = "! test\n# GHz S RI R 50\n"


def _row(f, vals):
    return f"{f} " + " ".join(f"{v.real} {v.imag}" for v in vals) + "\n"


def test_parse_minimal_ri():
    text = HEADER + _row(1, [0.1 + 0.2j, 0.3, 0.4, 0.5j]) + _row(2, [0.1, 0.2, 0.3, 0.4])
    net = parse_touchstone(text)
    assert net.kind == "S" and net.z0 == 50.0
    np.testing.assert_array_equal(net.freqs, [1e9, 2e9])
    # column order is 11, 21, 12, 22
    assert net.params[0, 0, 0] == 0.1 + 0.2j
    assert net.params[0, 1, 0] == 0.3
    assert net.params[0, 0, 1] == 0.4
    assert net.params[0, 1, 1] == 0.5j


def test_ma_and_db_decode():
    ma = "# Hz S MA R 50\n1 0.5 90 0 0 0 0 0.5 -90\n2 0.5 0 0 0 0 0 0.5 0\n"
    net = parse_touchstone(ma)
    assert abs(net.params[0, 0, 0] - 0.5j) < 1e-15
    assert abs(net.params[0, 1, 1] + 0.5j) < 1e-15
    db = "# Hz S DB R 50\n1 -20 0 -200 0 -200 0 -20 0\n2 -20 0 -200 0 -200 0 -20 0\n"
    assert abs(parse_touchstone(db).params[0, 0, 0] - 0.1) < 1e-15


def test_defaults_without_option_values():
    net = parse_touchstone("#\n1 1 0 0 0 0 0 1 0\n2 1 0 0 0 0 0 1 0\n")
    assert net.freqs[0] == 1e9  # GHz MA R 50


def test_comments_and_blank_lines():
    text = "# MHz S RI R 50\n! c\n\n100 0.1 0 0.2 0 0.3 0 0.4 0 ! tail\n200 0 0 0 0 0 0 0 0\n"
    net = parse_touchstone(text)
    assert net.params[0, 1, 1] == 0.4
    assert len(net) == 2


@pytest.mark.parametrize(
    "text, lineno",
    [
        ("# GHz S RI R 50\n1 0 0 0 0 0 0 0 0\n0.5 0 0 0 0 0 0 0 0\n", 3),
        ("# GHz S RI R 50\n1 0 0 0 0 0 0 0 x\n2 0 0 0 0 0 0 0 0\n", 2),
        ("# GHz S RI R 50\n# GHz S RI R 50\n", 2),
        ("# GHz S QQ R 50\n", 1),
    ],
)
def test_errors_carry_line_numbers(text, lineno):
    with pytest.raises(TouchstoneError) as info:
        parse_touchstone(text)
    assert info.value.lineno == lineno
    assert f"line {lineno}" in str(info.value)


@pytest.mark.parametrize(
    "text, needle",
    [
        ("1 0 0 0 0 0 0 0 0\n", "option line"),
        ("# GHz S RI R 50\n1 0 0 0 0 0 0 0 0\n", "at least 2"),
        ("# GHz H RI R 50\n1 0 0 0 0 0 0 0 0\n", "not supported"),
        ("[Version] 2.0\n# GHz S RI R 50\n", "Touchstone v2"),
    ],
)
def test_rejections(text, needle):
    with pytest.raises(TouchstoneError, match=needle):
        parse_touchstone(text)


def test_noise_block_is_refused():
    text = HEADER + _row(1, [0, 0, 0, 0]) + _row(2, [0, 0, 0, 0]) + "1 1.5 0.3 10 0.2\n"
    with pytest.raises(TouchstoneError, match="noise"):
        parse_touchstone(text)


def test_active_data_warns():
    text = "# Hz S RI R 50\n1 1.5 0 0 0 0 0 0 0\n2 0 0 0 0 0 0 0 0\n"
    with pytest.warns(PassivityWarning):
        net = parse_touchstone(text)
    assert check_passivity(net) == [1.0]


complex_vals = st.complex_numbers(max_magnitude=0.99, min_magnitude=1e-6, allow_nan=False, allow_infinity=False)


@given(
    vals=st.lists(complex_vals, min_size=8, max_size=24).filter(lambda v: len(v) % 4 == 0),
    fmt=st.sampled_from(["RI", "MA", "DB"]),
    unit=st.sampled_from(["Hz", "kHz", "MHz", "GHz"]),
    z0=st.sampled_from([50.0, 75.0, 1.0]),
)
def test_roundtrip(vals, fmt, unit, z0):
    n = len(vals) // 4
    params = np.array(vals).reshape(n, 2, 2)
    freqs = 1e8 * (1.0 + np.arange(n)) * 1.37
    net = NetworkData(freqs, params, "S", z0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PassivityWarning)
        back = parse_touchstone(serialize_touchstone(net, fmt, unit))
    np.testing.assert_allclose(back.freqs, freqs, rtol=1e-15)
    assert np.max(np.abs(back.params - params)) < 1e-12
    assert back.z0 == z0


def test_y_file_roundtrip_and_denormalization():
    rng = np.random.default_rng(3)
    s = NetworkData(np.linspace(1e9, 2e9, 5), random_passive_s(rng, 5), "S", 50.0)
    y = s_to_y(s)
    text = serialize_touchstone(y, "RI")
    assert "# HZ Y RI R 50" in text.upper()
    back = parse_touchstone(text)
    assert back.kind == "Y"
    np.testing.assert_allclose(back.params, y.params, rtol=1e-13, atol=1e-16)


def test_z_file_becomes_s():
    # a matched load on both ports has Z = z0 * I, i.e. normalized z = I
    text = "# Hz Z RI R 50\n1 1 0 0 0 0 0 1 0\n2 1 0 0 0 0 0 1 0\n"
    net = parse_touchstone(text)
    assert net.kind == "S"
    assert np.max(np.abs(net.params)) < 1e-15


def test_involution_1000_random_passive():
    rng = np.random.default_rng(2024)
    s = NetworkData(np.linspace(1e9, 1e10, 1000), random_passive_s(rng, 1000), "S", 50.0)
    back = y_to_s(s_to_y(s))
    assert np.max(np.abs(back.params - s.params)) < 1e-10


def test_series_admittance_oracle():
    # Y of a series element: [[y, -y], [-y, y]]
    f = np.array([1e9, 2e9])
    y_dut = np.array([0.01 + 0.02j, 0.003 - 0.1j])
    y = s_to_y(series_two_port(f, y_dut))
    np.testing.assert_allclose(y.params[:, 0, 0], y_dut, rtol=1e-12)
    np.testing.assert_allclose(admittance_trace(series_two_port(f, y_dut)), y_dut, rtol=1e-12)


def test_singular_conversion_reports_frequency():
    s = np.zeros((2, 2, 2), dtype=complex)
    s[1] = -np.eye(2)  # short circuit: Y undefined
    with pytest.raises(SingularConversionError) as info:
        s_to_y(NetworkData([1e9, 2e9], s))
    assert info.value.freqs == [2e9]


@pytest.mark.parametrize("z_load", [25.0, 100.0, 10 - 30j, 80 + 40j, 5 + 1j])
def test_l_section_matches_at_f0(z_load):
    f0 = 2e9
    sec = design_l_section(z_load, f0)
    gl = (z_load - 50) / (z_load + 50)
    s = np.zeros((1, 2, 2), dtype=complex)
    s[0, 0, 0] = s[0, 1, 1] = gl
    out = conjugate_match(NetworkData([f0], s), f0)
    assert abs(out.s11[0]) < 1e-12
    assert sec.topology in ("shunt-first", "series-first")


def test_l_section_25_ohm_closed_form():
    # R_L < z0: series-first with Q = sqrt(z0/R_L - 1) = 1
    sec = design_l_section(25.0, 1e9)
    assert sec.topology == "series-first"
    assert math.isclose(abs(sec.x0), 25.0, rel_tol=1e-12)
    assert math.isclose(abs(sec.b0), 0.02, rel_tol=1e-12)
    w0 = 2 * math.pi * 1e9
    if sec.x0 > 0:
        assert math.isclose(sec.elements["series_L"], 25.0 / w0, rel_tol=1e-12)


def test_already_matched_is_identity():
    f = np.linspace(1e9, 3e9, 7)
    rng = np.random.default_rng(1)
    s = random_passive_s(rng, 7)
    i0 = 3
    s[i0, 0, 0] = 0.0
    net = NetworkData(f, s)
    out, sec = conjugate_match(net, f[i0], return_section=True)
    assert sec.x0 == pytest.approx(0.0, abs=1e-12) and sec.b0 == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(out.params, net.params, atol=1e-12)


def test_match_rejects_out_of_band():
    net = NetworkData([1e9, 2e9], np.zeros((2, 2, 2)))
    with pytest.raises(ValueError, match="outside"):
        conjugate_match(net, 3e9)


def test_network_invariants():
    with pytest.raises(ValueError):
        NetworkData([2e9, 1e9], np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        NetworkData([1e9], np.zeros((2, 2)))
    net = NetworkData([1e9], np.zeros((1, 2, 2)))
    with pytest.raises(ValueError):
        net.params[0, 0, 0] = 1
