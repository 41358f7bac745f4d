"""Scalar resonator metrics extracted from measured or synthetic traces."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

__all__ = [
    "ResonatorKpis",
    "PowerSweepReport",
    "BodeQResult",
    "BandTooNarrowError",
    "kt2_from_freqs",
    "q_3db",
    "bode_q",
    "tcf_fit",
    "power_sweep_compare",
    "qbode_csv",
]


class BandTooNarrowError(ValueError):
    pass


@dataclass(frozen=True)
class PowerSweepReport:
    levels: tuple
    peak_admittance_drift: tuple  # percent vs. baseline
    q3db_drift: tuple  # percent vs. baseline
    returned_to_baseline: bool
    tolerance: float = 0.02
    baseline_index: int = 0

    def __post_init__(self):
        if len(self.levels) == 0:
            raise ValueError("power sweep needs at least one level")
        if not (np.all(np.isfinite(self.peak_admittance_drift)) and np.all(np.isfinite(self.q3db_drift))):
            raise ValueError("drifts must be finite")

    def to_dict(self):
        return {
            "levels": list(self.levels),
            "peak_admittance_drift": list(self.peak_admittance_drift),
            "q3db_drift": list(self.q3db_drift),
            "returned_to_baseline": self.returned_to_baseline,
            "tolerance": self.tolerance,
            "baseline_index": self.baseline_index,
        }


@dataclass(frozen=True)
class ResonatorKpis:
    """Resonator figures of merit; any field may be absent (None).

    ``kt2`` is a fraction.  ``FOM`` is Qm times kt2 (fraction).  ``TCF1`` is
    in ppm/K.
    """

    fs: float | None = None
    fp: float | None = None
    BW3dB: float | None = None
    Q3dB: float | None = None
    Qm: float | None = None
    QBode: float | None = None
    kt2: float | None = None
    FOM: float | None = None
    TCF1: float | None = None
    power_metrics: PowerSweepReport | None = None

    def __post_init__(self):
        if self.fs is not None and self.fp is not None and not self.fs < self.fp:
            raise ValueError("fs must be below fp")
        for name in ("Q3dB", "Qm", "QBode"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.kt2 is not None and not 0.0 < self.kt2 < 1.0:
            raise ValueError("kt2 must lie in (0, 1)")

    def merged(self, other):
        """Fields of ``other`` that are set override ours."""
        updates = {f.name: getattr(other, f.name) for f in fields(other) if getattr(other, f.name) is not None}
        return replace(self, **updates)

    def to_dict(self):
        d = asdict(self)
        if self.power_metrics is not None:
            d["power_metrics"] = self.power_metrics.to_dict()
        return d


def kt2_from_freqs(fs, fp):
    """Coupling from series/parallel resonance: x / tan(x), x = (pi/2) fs/fp."""
    if not 0.0 < fs < fp:
        raise ValueError(f"need 0 < fs < fp, got fs={fs!r}, fp={fp!r}")
    x = 0.5 * math.pi * fs / fp
    return x / math.tan(x)


def _parabolic_peak(x, y, i):
    """Vertex of the parabola through (i-1, i, i+1); falls back to the sample."""
    if i == 0 or i == len(y) - 1:
        return float(x[i]), float(y[i])
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = y0 - 2.0 * y1 + y2
    if den >= 0.0:
        return float(x[i]), float(y1)
    d = 0.5 * (y0 - y2) / den
    if x[i + 1] - x[i] == x[i] - x[i - 1]:
        xv = x[i] + d * (x[i + 1] - x[i])
    else:
        xv = x[i] + d * (x[i + 1] - x[i - 1]) * 0.5
    return float(xv), float(y1 - 0.25 * (y0 - y2) * d)


def _crossing(f, mag, level, i_start, step):
    i = i_start
    while 0 <= i + step < len(mag):
        j = i + step
        if mag[j] < level:
            t = (mag[i] - level) / (mag[i] - mag[j])
            return f[i] + t * (f[j] - f[i])
        i = j
    raise BandTooNarrowError("band too narrow: half-power crossing outside span")


def q_3db(freqs, y):
    """Series resonance, half-power bandwidth and Q3dB of an admittance trace.

    Returns ``(fs, bw3db, q3db)``.  The peak location and height are refined
    by a parabola through log|y| at the three samples around the maximum.
    """
    f = np.asarray(freqs, dtype=float)
    mag = np.abs(np.asarray(y))
    i = int(np.argmax(mag))
    if i == 0 or i == len(mag) - 1:
        raise BandTooNarrowError("band too narrow: peak at span edge")
    fs, log_peak = _parabolic_peak(f, np.log(mag), i)
    level = math.exp(log_peak) / math.sqrt(2.0)
    f_lo = _crossing(f, mag, level, i, -1)
    f_hi = _crossing(f, mag, level, i, +1)
    bw = f_hi - f_lo
    return fs, bw, fs / bw


def peak_magnitude(freqs, y):
    f = np.asarray(freqs, dtype=float)
    mag = np.abs(np.asarray(y))
    i = int(np.argmax(mag))
    return math.exp(_parabolic_peak(f, np.log(mag), i)[1])


def _moving_average(x, window):
    if window == 1:
        return x.copy()
    kernel = np.ones(window)
    num = np.convolve(x, kernel, mode="same")
    cnt = np.convolve(np.ones_like(x), kernel, mode="same")
    return num / cnt


@dataclass(frozen=True)
class BodeQResult:
    freqs: np.ndarray
    q: np.ndarray
    peak: float
    f_peak: float


def bode_q(freqs, s11, window=11, fs=None, bw3db=None):
    """Bode Q of a (matched) reflection trace.

    Q(w) = w * tau_g * |S11| / (1 - |S11|**2) with tau_g = -dphi/dw from
    central differences of the unwrapped phase, then a centered moving
    average of ``window`` points (shrinking at the ends).  The peak is taken
    within fs +/- 3 bw3db when both are given, else over the whole trace.
    """
    f = np.asarray(freqs, dtype=float)
    s = np.asarray(s11, dtype=complex)
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    if window > s.size:
        raise ValueError(f"window ({window}) larger than trace ({s.size})")
    mag = np.abs(s)
    if np.any(mag >= 1.0):
        bad = f[mag >= 1.0][0]
        raise ValueError(f"|S11| >= 1 at {bad:.9g} Hz (active or lossless data)")
    w = 2.0 * np.pi * f
    phase = np.unwrap(np.angle(s), discont=math.pi)
    tau = -np.gradient(phase, w)
    q = _moving_average(w * tau * mag / (1.0 - mag**2), window)
    if fs is not None and bw3db is not None:
        sel = np.abs(f - fs) <= 3.0 * bw3db
        if not np.any(sel):
            raise ValueError("no samples within fs +/- 3 BW3dB")
    else:
        sel = np.ones_like(f, dtype=bool)
    idx = np.flatnonzero(sel)[int(np.argmax(q[sel]))]
    return BodeQResult(f, q, float(q[idx]), float(f[idx]))


def qbode_csv(result):
    lines = ["frequency_hz,q_bode"]
    lines.extend(f"{fi:.12g},{qi:.12g}" for fi, qi in zip(result.freqs, result.q))
    return "\n".join(lines) + "\n"


def tcf_fit(temperatures, frequencies):
    """First-order TCF in ppm/K, normalized to fs at the lowest temperature."""
    t = np.asarray(temperatures, dtype=float)
    fs = np.asarray(frequencies, dtype=float)
    if t.shape != fs.shape or t.ndim != 1:
        raise ValueError("temperatures and frequencies must be equal-length 1-D sequences")
    if np.unique(t).size < 2:
        raise ValueError("need at least two distinct temperatures")
    tc = t - t.mean()
    slope = float(tc @ (fs - fs.mean()) / (tc @ tc))
    f_ref = float(fs[t == t.min()].mean())
    return slope / f_ref * 1e6


def power_sweep_compare(levels, traces, baseline_index=0, tolerance=0.02):
    """Peak-admittance and Q3dB drift of each power level vs. a baseline.

    ``traces`` is a sequence of ``(freqs, y)`` pairs on one shared grid; the
    last trace is checked against the baseline for recovery.
    """
    levels = tuple(float(p) for p in levels)
    if len(traces) < 2 or len(levels) != len(traces):
        raise ValueError("need at least two traces and one power level per trace")
    f_ref = np.asarray(traces[0][0], dtype=float)
    for f, _ in traces[1:]:
        f = np.asarray(f, dtype=float)
        if f.shape != f_ref.shape or not np.array_equal(f, f_ref):
            raise ValueError("all traces must share the same frequency grid")
    peaks = np.array([peak_magnitude(f, y) for f, y in traces])
    qs = np.array([q_3db(f, y)[2] for f, y in traces])
    b = baseline_index
    peak_drift = 100.0 * (peaks / peaks[b] - 1.0)
    q_drift = 100.0 * (qs / qs[b] - 1.0)
    back = bool(abs(peak_drift[-1]) <= 100.0 * tolerance and abs(q_drift[-1]) <= 100.0 * tolerance)
    return PowerSweepReport(
        levels,
        tuple(float(v) for v in peak_drift),
        tuple(float(v) for v in q_drift),
        back,
        float(tolerance),
        int(b),
    )
