"""Touchstone v1 two-port I/O, S/Y conversion and L-section matching."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NetworkData",
    "TouchstoneError",
    "SingularConversionError",
    "PassivityWarning",
    "parse_touchstone",
    "read_touchstone",
    "serialize_touchstone",
    "write_touchstone",
    "check_passivity",
    "s_to_y",
    "y_to_s",
    "LSection",
    "design_l_section",
    "conjugate_match",
    "admittance_trace",
    "series_two_port",
]

_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
_FORMATS = ("RI", "MA", "DB")
_PARAMS = ("S", "Y", "Z")
# column order of a v1 two-port data row
_ORDER = ((0, 0), (1, 0), (0, 1), (1, 1))


class TouchstoneError(ValueError):
    """Malformed Touchstone input; ``lineno`` is 1-based."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class SingularConversionError(ValueError):
    """Network-parameter conversion hit a singular matrix."""

    def __init__(self, freqs):
        self.freqs = list(freqs)
        listed = ", ".join(f"{f:.9g} Hz" for f in self.freqs[:5])
        more = "" if len(self.freqs) <= 5 else f" (+{len(self.freqs) - 5} more)"
        super().__init__(f"singular matrix at {listed}{more}")


class PassivityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class NetworkData:
    """Frequency-sampled 2x2 network parameters.

    ``params`` has shape ``(n, 2, 2)``; ``kind`` is ``"S"`` or ``"Y"`` (Y in
    siemens).  Arrays are copied and frozen on construction.
    """

    freqs: np.ndarray
    params: np.ndarray
    kind: str = "S"
    z0: float = 50.0

    def __post_init__(self):
        freqs = np.array(self.freqs, dtype=float).reshape(-1)
        params = np.array(self.params, dtype=complex)
        if freqs.size == 0:
            raise ValueError("network has no frequency points")
        if params.shape != (freqs.size, 2, 2):
            raise ValueError(
                f"params must have shape ({freqs.size}, 2, 2), got {params.shape}"
            )
        if not np.all(np.isfinite(freqs)) or np.any(freqs <= 0):
            raise ValueError("frequencies must be finite and positive")
        if np.any(np.diff(freqs) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if self.kind not in ("S", "Y"):
            raise ValueError(f"kind must be 'S' or 'Y', got {self.kind!r}")
        if not (self.z0 > 0 and math.isfinite(self.z0)):
            raise ValueError("z0 must be positive")
        freqs.setflags(write=False)
        params.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "z0", float(self.z0))

    def __len__(self):
        return self.freqs.size

    def trace(self, i, j):
        """Parameter (i, j) with 1-based port indices, e.g. ``trace(1, 2)``."""
        return self.params[:, i - 1, j - 1]

    @property
    def s11(self):
        if self.kind != "S":
            raise ValueError("s11 requires S parameters")
        return self.params[:, 0, 0]


# -- parsing -----------------------------------------------------------------


def _parse_option_line(tokens, lineno):
    unit, param, fmt, z0 = "GHZ", "S", "MA", 50.0
    it = iter(range(len(tokens)))
    seen = set()
    for i in it:
        tok = tokens[i].upper()
        if tok in _UNITS:
            key, unit = "unit", tok
        elif tok in _PARAMS:
            key, param = "param", tok
        elif tok in ("G", "H"):
            raise TouchstoneError(f"parameter type {tok!r} is not supported", lineno)
        elif tok in _FORMATS:
            key, fmt = "format", tok
        elif tok == "R":
            key = "R"
            try:
                z0 = float(tokens[i + 1])
            except (IndexError, ValueError):
                raise TouchstoneError("option 'R' needs a numeric impedance", lineno)
            next(it)
            if not z0 > 0:
                raise TouchstoneError("reference impedance must be positive", lineno)
        else:
            raise TouchstoneError(f"unknown option token {tokens[i]!r}", lineno)
        if key in seen:
            raise TouchstoneError(f"option {key!r} given twice", lineno)
        seen.add(key)
    return _UNITS[unit], param, fmt, z0


def _to_complex(a, b, fmt):
    if fmt == "RI":
        return complex(a, b)
    mag = a if fmt == "MA" else 10.0 ** (a / 20.0)
    ang = math.radians(b)
    return complex(mag * math.cos(ang), mag * math.sin(ang))


def parse_touchstone(text):
    """Parse Touchstone v1 two-port text into :class:`NetworkData`.

    Z-parameter files are converted to S.  Y and Z values are normalized to
    the ``R`` reference in v1 files and are de-normalized here.
    """
    options = None
    freqs, rows, linenos = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            raise TouchstoneError(
                f"Touchstone v2 keyword {line.split()[0]!r} is not supported", lineno
            )
        if line.startswith("#"):
            if options is not None:
                raise TouchstoneError("duplicate option line", lineno)
            options = _parse_option_line(line[1:].split(), lineno)
            continue
        if options is None:
            raise TouchstoneError("data before option line", lineno)
        cols = line.split()
        if len(cols) == 5 and rows:
            raise TouchstoneError("noise-parameter data is not supported", lineno)
        if len(cols) != 9:
            raise TouchstoneError(f"expected 9 columns, got {len(cols)}", lineno)
        try:
            vals = [float(c) for c in cols]
        except ValueError as exc:
            raise TouchstoneError(f"bad number ({exc})", lineno)
        scale, param, fmt, z0 = options
        f = vals[0] * scale
        if freqs and f <= freqs[-1]:
            raise TouchstoneError("frequencies must be strictly increasing", lineno)
        if f <= 0:
            raise TouchstoneError("frequency must be positive", lineno)
        m = np.empty((2, 2), dtype=complex)
        for n, (i, j) in enumerate(_ORDER):
            m[i, j] = _to_complex(vals[1 + 2 * n], vals[2 + 2 * n], fmt)
        freqs.append(f)
        rows.append(m)
        linenos.append(lineno)

    if options is None:
        raise TouchstoneError("missing option line")
    if len(rows) < 2:
        raise TouchstoneError(f"need at least 2 frequency points, got {len(rows)}")
    _, param, _, z0 = options
    params = np.array(rows)
    if param == "S":
        net = NetworkData(freqs, params, "S", z0)
    elif param == "Y":
        net = NetworkData(freqs, params / z0, "Y", z0)
    else:
        eye = np.eye(2)
        zn = params  # normalized impedance
        try:
            s = np.linalg.solve((zn + eye).transpose(0, 2, 1), (zn - eye).transpose(0, 2, 1))
        except np.linalg.LinAlgError:
            raise TouchstoneError("singular Z matrix, cannot convert to S")
        net = NetworkData(freqs, s.transpose(0, 2, 1), "S", z0)

    if net.kind == "S":
        bad = check_passivity(net)
        if bad:
            warnings.warn(
                f"{len(bad)} non-passive point(s), first at {bad[0]:.9g} Hz",
                PassivityWarning,
                stacklevel=2,
            )
    return net


def read_touchstone(path):
    with open(path, encoding="utf-8") as fh:
        return parse_touchstone(fh.read())


def check_passivity(net, tol=1e-6):
    """Frequencies where the largest singular value of S exceeds 1 + tol."""
    s = net.params if net.kind == "S" else y_to_s(net).params
    sv = np.linalg.svd(s, compute_uv=False)[:, 0]
    return [float(f) for f in net.freqs[sv > 1.0 + tol]]


# -- serialization -----------------------------------------------------------


def _pair(z, fmt):
    if fmt == "RI":
        return z.real, z.imag
    mag = abs(z)
    ang = math.degrees(math.atan2(z.imag, z.real))
    if fmt == "MA":
        return mag, ang
    if mag == 0.0:
        raise ValueError("zero magnitude cannot be written in DB format")
    return 20.0 * math.log10(mag), ang


def serialize_touchstone(net, fmt="RI", unit="Hz", comment=None):
    """Render ``net`` as Touchstone v1 text that :func:`parse_touchstone` inverts."""
    fmt = fmt.upper()
    if fmt not in _FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    key = unit.upper()
    if key not in _UNITS:
        raise ValueError(f"unknown frequency unit {unit!r}")
    if len(net) == 0:
        raise ValueError("network has no frequency points")
    scale = _UNITS[key]
    params = net.params if net.kind == "S" else net.params * net.z0
    lines = []
    if comment:
        lines.extend(f"! {c}" for c in comment.splitlines())
    lines.append(f"# {unit} {net.kind} {fmt} R {net.z0:.17g}")
    for f, m in zip(net.freqs, params):
        cols = [f"{f / scale:.17g}"]
        for i, j in _ORDER:
            a, b = _pair(complex(m[i, j]), fmt)
            cols.append(f"{a:.17g}")
            cols.append(f"{b:.17g}")
        lines.append(" ".join(cols))
    return "\n".join(lines) + "\n"


def write_touchstone(path, net, fmt="RI", unit="Hz", comment=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_touchstone(net, fmt, unit, comment))


# -- conversions -------------------------------------------------------------


def _solve_right(num, den, freqs):
    # num @ inv(den), per frequency point
    cond = np.linalg.cond(den)
    bad = ~np.isfinite(cond) | (cond > 1e13)
    if np.any(bad):
        raise SingularConversionError(freqs[bad])
    return np.linalg.solve(den.transpose(0, 2, 1), num.transpose(0, 2, 1)).transpose(0, 2, 1)


def s_to_y(net):
    """Y = (1/z0) (I - S) (I + S)^-1."""
    if net.kind != "S":
        raise ValueError("s_to_y expects S parameters")
    eye = np.eye(2)
    y = _solve_right(eye - net.params, eye + net.params, net.freqs) / net.z0
    return NetworkData(net.freqs, y, "Y", net.z0)


def y_to_s(net):
    """S = (I - z0 Y) (I + z0 Y)^-1."""
    if net.kind != "Y":
        raise ValueError("y_to_s expects Y parameters")
    eye = np.eye(2)
    yn = net.params * net.z0
    s = _solve_right(eye - yn, eye + yn, net.freqs)
    return NetworkData(net.freqs, s, "S", net.z0)


def admittance_trace(net):
    """Resonator admittance of a series-connected two-port: ``-Y12``.

    A device in series between the ports has Y12 = -Y_dut; the sign is flipped
    so that the returned trace has the usual positive static capacitance.
    """
    y = s_to_y(net) if net.kind == "S" else net
    return -y.trace(1, 2)


def series_two_port(freqs, y_dut, z0=50.0):
    """S-parameters of an admittance ``y_dut`` placed in series between two ports."""
    z = 1.0 / np.asarray(y_dut, dtype=complex)
    den = z + 2.0 * z0
    s = np.empty((z.size, 2, 2), dtype=complex)
    s[:, 0, 0] = s[:, 1, 1] = z / den
    s[:, 0, 1] = s[:, 1, 0] = 2.0 * z0 / den
    return NetworkData(np.asarray(freqs, dtype=float), s, "S", z0)


# -- matching ----------------------------------------------------------------


@dataclass(frozen=True)
class LSection:
    """Lossless two-element match designed at ``f0``.

    ``topology`` is ``"shunt-first"`` (shunt element across the device port,
    series element toward the source) or ``"series-first"``.  ``x0`` and
    ``b0`` are the series reactance and shunt susceptance at ``f0``; positive
    x0 / negative b0 are inductors, the others capacitors.
    """

    topology: str
    f0: float
    x0: float
    b0: float
    z0: float = 50.0
    elements: dict = field(default_factory=dict, compare=False)

    def reactance(self, freqs):
        r = np.asarray(freqs, dtype=float) / self.f0
        return self.x0 * r if self.x0 >= 0 else self.x0 / r

    def susceptance(self, freqs):
        r = np.asarray(freqs, dtype=float) / self.f0
        return self.b0 * r if self.b0 >= 0 else self.b0 / r

    def abcd(self, freqs):
        n = np.size(freqs)
        series = np.zeros((n, 2, 2), dtype=complex)
        series[:, 0, 0] = series[:, 1, 1] = 1.0
        series[:, 0, 1] = 1j * self.reactance(freqs)
        shunt = np.zeros((n, 2, 2), dtype=complex)
        shunt[:, 0, 0] = shunt[:, 1, 1] = 1.0
        shunt[:, 1, 0] = 1j * self.susceptance(freqs)
        if self.topology == "shunt-first":
            return series @ shunt
        return shunt @ series

    def s_params(self, freqs):
        abcd = self.abcd(freqs)
        a, b, c, d = abcd[:, 0, 0], abcd[:, 0, 1], abcd[:, 1, 0], abcd[:, 1, 1]
        z0 = self.z0
        den = a + b / z0 + c * z0 + d
        s = np.empty_like(abcd)
        s[:, 0, 0] = (a + b / z0 - c * z0 - d) / den
        s[:, 0, 1] = 2.0 * (a * d - b * c) / den
        s[:, 1, 0] = 2.0 / den
        s[:, 1, 1] = (-a + b / z0 - c * z0 + d) / den
        return s


def _element_values(x0, b0, f0):
    w0 = 2.0 * math.pi * f0
    out = {}
    if x0 > 0:
        out["series_L"] = x0 / w0
    elif x0 < 0:
        out["series_C"] = -1.0 / (w0 * x0)
    if b0 > 0:
        out["shunt_C"] = b0 / w0
    elif b0 < 0:
        out["shunt_L"] = -1.0 / (w0 * b0)
    return out


def design_l_section(z_load, f0, z0=50.0):
    """Pick the L-section that transforms ``z_load`` to ``z0`` at ``f0``."""
    z_load = complex(z_load)
    r, x = z_load.real, z_load.imag
    if not r > 0:
        raise ValueError(f"input impedance at {f0:.9g} Hz has non-positive real part")
    y = 1.0 / z_load
    g, b = y.real, y.imag
    # shunt-first: z0 = j x_s + 1 / (y + j b_p)
    if g <= 1.0 / z0 * (1.0 + 1e-12):
        d = math.sqrt(max(g / z0 - g * g, 0.0))
        bp = -b + d
        xs = -(1.0 / complex(g, b + bp)).imag
        topo = "shunt-first"
    else:
        # series-first: 1/z0 = j b_p + 1 / (z + j x_s)
        d = math.sqrt(max(r * z0 - r * r, 0.0))
        xs = -x + d
        bp = -(1.0 / complex(r, x + xs)).imag
        topo = "series-first"
    return LSection(topo, float(f0), float(xs), float(bp), float(z0), _element_values(xs, bp, f0))


def _cascade(m, d):
    """Star product: ``m`` (port 2) feeding port 1 of ``d``."""
    den = 1.0 - m[:, 1, 1] * d[:, 0, 0]
    out = np.empty_like(d)
    out[:, 0, 0] = m[:, 0, 0] + m[:, 0, 1] * d[:, 0, 0] * m[:, 1, 0] / den
    out[:, 0, 1] = m[:, 0, 1] * d[:, 0, 1] / den
    out[:, 1, 0] = d[:, 1, 0] * m[:, 1, 0] / den
    out[:, 1, 1] = d[:, 1, 1] + d[:, 1, 0] * m[:, 1, 1] * d[:, 0, 1] / den
    return out


def conjugate_match(net, f0, return_section=False):
    """Match port 1 of ``net`` to z0 at ``f0`` with an ideal L-section.

    The section is designed once from the input impedance at ``f0`` (linear
    interpolation of S11 between grid points) and applied at every frequency
    with ideal L/C reactances.  Returns the cascaded S network.
    """
    if net.kind != "S":
        raise ValueError("conjugate_match expects S parameters")
    if not net.freqs[0] <= f0 <= net.freqs[-1]:
        raise ValueError(f"f0 = {f0:.9g} Hz is outside the frequency span")
    s11 = net.s11
    g0 = np.interp(f0, net.freqs, s11.real) + 1j * np.interp(f0, net.freqs, s11.imag)
    if g0 == 1.0:
        raise ValueError(f"open-circuit reflection at {f0:.9g} Hz")
    zin = net.z0 * (1.0 + g0) / (1.0 - g0)
    section = design_l_section(zin, f0, net.z0)
    out = NetworkData(net.freqs, _cascade(section.s_params(net.freqs), net.params), "S", net.z0)
    return (out, section) if return_section else out
