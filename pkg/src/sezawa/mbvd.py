"""Modified Butterworth-Van Dyke circuit: synthesis, initial guess and fitting.

Topology: a series resistance Rs feeding the parallel combination of the
motional branch (Rm, Lm, Cm) and the lossy static branch (R0, C0).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .kpi import ResonatorKpis, kt2_from_freqs

__all__ = [
    "MbvdParams",
    "FitConfig",
    "FitReport",
    "NoResonanceError",
    "mbvd_admittance",
    "motional_admittance",
    "initial_guess",
    "fit_mbvd",
    "derived_kpis",
]

_NAMES = ("Rm", "Lm", "Cm", "C0", "R0", "Rs")
R_FLOOR = 1e-6
_MAX_LOG_STEP = 1.0
_ZERO_SEED = 0.1  # fraction of Rm for resistances guessed as zero


class NoResonanceError(ValueError):
    pass


@dataclass(frozen=True)
class MbvdParams:
    Rm: float
    Lm: float
    Cm: float
    C0: float
    R0: float = 0.0
    Rs: float = 0.0

    def __post_init__(self):
        vals = self.as_array()
        if not np.all(np.isfinite(vals)):
            raise ValueError("MBVD parameters must be finite")
        if not (self.Lm > 0 and self.Cm > 0 and self.C0 > 0 and self.Rm > 0):
            raise ValueError("Rm, Lm, Cm and C0 must be positive")
        if self.R0 < 0 or self.Rs < 0:
            raise ValueError("R0 and Rs must be non-negative")

    @classmethod
    def from_array(cls, values):
        return cls(*(float(v) for v in values))

    def as_array(self):
        return np.array([getattr(self, n) for n in _NAMES], dtype=float)

    def to_dict(self):
        return asdict(self)

    def scaled(self, k):
        """Impedance scaling by ``k``: R and L times k, C divided by k."""
        return MbvdParams(self.Rm * k, self.Lm * k, self.Cm / k, self.C0 / k, self.R0 * k, self.Rs * k)

    @property
    def fs(self):
        return 1.0 / (2.0 * math.pi * math.sqrt(self.Lm * self.Cm))

    @property
    def fp(self):
        return self.fs * math.sqrt(1.0 + self.Cm / self.C0)

    @property
    def qm(self):
        return 2.0 * math.pi * self.fs * self.Lm / self.Rm


def motional_admittance(Rm, Lm, Cm, freqs):
    w = 2.0 * np.pi * np.asarray(freqs, dtype=float)
    return 1.0 / (Rm + 1j * w * Lm + 1.0 / (1j * w * Cm))


def mbvd_admittance(p, freqs):
    """Complex admittance of the MBVD circuit on ``freqs`` (Hz)."""
    w = 2.0 * np.pi * np.asarray(freqs, dtype=float)
    ym = 1.0 / (p.Rm + 1j * w * p.Lm + 1.0 / (1j * w * p.Cm))
    y0 = 1.0 / (p.R0 + 1.0 / (1j * w * p.C0))
    return 1.0 / (p.Rs + 1.0 / (ym + y0))


def initial_guess(freqs, y):
    """Rough MBVD parameters read off an admittance trace."""
    freqs = np.asarray(freqs, dtype=float)
    y = np.asarray(y, dtype=complex)
    mag = np.abs(y)
    i_s = int(np.argmax(mag))
    interior_max = 0 < i_s < len(mag) - 1
    if not interior_max:
        raise NoResonanceError("no resonance detected")
    i_p = i_s + 1 + int(np.argmin(mag[i_s + 1:])) if i_s + 1 < len(mag) else None
    if i_p is None or i_p >= len(mag) - 1 or mag[i_p] >= mag[i_s]:
        raise NoResonanceError("no resonance detected")
    fs, fp = freqs[i_s], freqs[i_p]
    w = 2.0 * np.pi * freqs
    n_low = max(1, len(freqs) // 10)
    # below fs the motional branch adds Cm / (1 - (f/fs)^2) to Im(y)/w
    ratio = (fp / fs) ** 2 - 1.0
    excess = 1.0 + ratio / (1.0 - (freqs[:n_low] / fs) ** 2)
    c0 = float(np.mean(y[:n_low].imag / w[:n_low] / excess))
    if not c0 > 0:
        raise NoResonanceError("no resonance detected (non-capacitive background)")
    cm = c0 * ((fp / fs) ** 2 - 1.0)
    lm = 1.0 / ((2.0 * np.pi * fs) ** 2 * cm)
    rm = 1.0 / mag[i_s]
    return MbvdParams(rm, lm, cm, c0, 0.0, 0.0)


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 500
    xtol: float = 1e-10
    ftol: float = 1e-12
    r_floor: float = R_FLOOR


@dataclass(frozen=True)
class FitReport:
    params: MbvdParams
    residual: float
    iterations: int
    converged: bool
    message: str = ""

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
        }


def _model_and_jacobian(theta, w):
    """Admittance and d(Y)/d(log p) for log-parameters ``theta``."""
    rm, lm, cm, c0, r0, rs = np.exp(theta)
    zm = rm + 1j * w * lm + 1.0 / (1j * w * cm)
    ym = 1.0 / zm
    z0 = r0 + 1.0 / (1j * w * c0)
    y0 = 1.0 / z0
    zp = 1.0 / (ym + y0)
    y = 1.0 / (rs + zp)
    dy_dyp = (y * zp) ** 2  # dY/d(ym + y0)
    ym2, y02 = ym * ym, y0 * y0
    jac = np.empty((w.size, 6), dtype=complex)
    jac[:, 0] = dy_dyp * (-ym2) * rm
    jac[:, 1] = dy_dyp * (-ym2 * 1j * w) * lm
    jac[:, 2] = dy_dyp * (ym2 / (1j * w * cm * cm)) * cm
    jac[:, 3] = dy_dyp * (y02 / (1j * w * c0 * c0)) * c0
    jac[:, 4] = dy_dyp * (-y02) * r0
    jac[:, 5] = -(y * y) * rs
    return y, jac


def _stack(z):
    return np.concatenate([z.real, z.imag], axis=0)


def fit_mbvd(freqs, y, guess, config=None):
    """Weighted Levenberg-Marquardt fit of the MBVD model to ``y``.

    Parameters are fit as logarithms.  The residual is the stacked real and
    imaginary misfit, each point divided by ``|y| + 1e-6 max|y|`` so the
    anti-resonance still pins fp.  Non-convergence is reported in the
    returned :class:`FitReport`, not raised.
    """
    cfg = config or FitConfig()
    freqs = np.asarray(freqs, dtype=float)
    y = np.asarray(y, dtype=complex)
    if freqs.shape != y.shape or freqs.ndim != 1:
        raise ValueError("freqs and y must be 1-D arrays of equal length")
    if freqs.size < 50:
        raise ValueError(f"need at least 50 points to fit, got {freqs.size}")
    if not isinstance(guess, MbvdParams):
        raise TypeError("guess must be MbvdParams")

    w = 2.0 * np.pi * freqs
    ymax = float(np.max(np.abs(y)))
    if not ymax > 0:
        return FitReport(guess, 0.0, 0, False, "degenerate trace (all zero)")
    weight = 1.0 / (np.abs(y) + 1e-6 * ymax)
    lo = np.full(6, -np.inf)
    lo[4] = lo[5] = math.log(cfg.r_floor)
    values = guess.as_array()
    # a log parameter parked at the floor has no leverage; start it inside
    for i in (4, 5):
        if values[i] <= cfg.r_floor:
            values[i] = _ZERO_SEED * values[0]
    theta = np.log(values)

    def evaluate(th):
        model, jac = _model_and_jacobian(th, w)
        r = _stack((model - y) * weight)
        return r, _stack(jac * weight[:, None]), float(r @ r)

    r, J, cost = evaluate(theta)
    mu = 1e-3
    converged, message = False, "maximum iterations reached"
    it = 0
    while it < cfg.max_iterations:
        it += 1
        g = J.T @ r
        H = J.T @ J
        D = np.diag(np.maximum(np.diag(H), 1e-300))
        try:
            step = np.linalg.solve(H + mu * D, -g)
        except np.linalg.LinAlgError:
            mu *= 10.0
            continue
        big = float(np.max(np.abs(step)))
        if big > _MAX_LOG_STEP:
            step *= _MAX_LOG_STEP / big
        trial = np.maximum(theta + step, lo)
        dtheta = trial - theta
        # log-space step is the relative parameter step
        if float(np.max(np.abs(dtheta))) < cfg.xtol:
            converged, message = True, "relative step below xtol"
            break
        predicted = -(2.0 * g @ dtheta + dtheta @ H @ dtheta)
        r_t, J_t, cost_t = evaluate(trial)
        actual = cost - cost_t if np.isfinite(cost_t) else -np.inf
        if predicted <= cfg.ftol * cost and abs(actual) <= cfg.ftol * cost:
            converged, message = True, "relative residual change below ftol"
            break
        if actual > 0.0:
            theta, r, J = trial, r_t, J_t
            values = np.exp(trial)
            rel = actual / cost
            cost = cost_t
            gain = actual / predicted if predicted > 0 else 0.0
            mu = max(mu * max(1.0 / 3.0, 1.0 - (2.0 * gain - 1.0) ** 3), 1e-15)
            if rel < cfg.ftol:
                converged, message = True, "relative residual change below ftol"
                break
        else:
            mu *= 4.0
            if mu > 1e20:
                message = "damping overflow"
                break

    fitted = MbvdParams.from_array(values)
    misfit = mbvd_admittance(fitted, freqs) - y
    rms = float(np.sqrt(np.mean(np.abs(misfit) ** 2)))
    return FitReport(fitted, rms, it, converged, message)


def derived_kpis(p):
    """fs, fp, Qm, kt2 and FOM from circuit elements.

    FOM = Qm * kt2 with kt2 as a fraction (Qm = 380, kt2 = 4.5 % gives 17.1).
    """
    kt2 = kt2_from_freqs(p.fs, p.fp)
    return ResonatorKpis(fs=p.fs, fp=p.fp, Qm=p.qm, kt2=kt2, FOM=p.qm * kt2)
