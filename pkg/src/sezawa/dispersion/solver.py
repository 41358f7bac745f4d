"""Guided P-SV modes of a layered stack over an isotropic half-space.

Phase velocities are zeros of the free-surface traction determinant built
from 4x4 layer propagators at the IDT wavenumber k = 2 pi / lambda.  The
coupling of a mode is estimated from the velocity shift between the stack
with piezoelectrically stiffened layers ("free") and the plain stack
("metallized").
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..materials import Material
from ._backend import kernels

__all__ = [
    "Layer",
    "LayerStack",
    "StackTemplate",
    "DispersionBranch",
    "DesignPoint",
    "SweepResult",
    "NoGuidedModesError",
    "BranchMissingError",
    "SlowOnFastWarning",
    "boundary_determinant",
    "find_roots",
    "find_branches",
    "kt2_delta_v",
    "sweep_design",
    "design_frequency",
    "rayleigh_velocity",
    "SEZAWA",
]

SEZAWA = 1
N_SAMPLES = 2000
ROOT_RTOL = 1e-12
SCAN_FLOOR = 0.75
SCAN_CEIL = 0.999


class NoGuidedModesError(RuntimeError):
    pass


class BranchMissingError(ValueError):
    pass


class SlowOnFastWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Layer:
    material: Material
    thickness: float


@dataclass(frozen=True)
class LayerStack:
    """Layers listed top first over a semi-infinite substrate."""

    layers: tuple
    substrate: Material
    wavelength: float

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        for layer in layers:
            if not layer.thickness > 0:
                raise ValueError(f"layer {layer.material.name}: thickness must be positive")
        if layers and not self.substrate.vT > layers[0].material.vT:
            warnings.warn(
                f"top layer {layers[0].material.name} is not slower than the substrate; "
                "guided modes may not exist",
                SlowOnFastWarning,
                stacklevel=2,
            )

    def stiffened(self):
        """Copy with every piezoelectric layer stiffened (open-circuit surface)."""
        return LayerStack(
            tuple(Layer(l.material.stiffened(), l.thickness) for l in self.layers),
            self.substrate,
            self.wavelength,
        )

    def scaled(self, factor):
        return LayerStack(
            tuple(Layer(l.material, l.thickness * factor) for l in self.layers),
            self.substrate,
            self.wavelength * factor,
        )

    @property
    def piezo_thickness(self):
        return sum(l.thickness for l in self.layers if l.material.K2 > 0)

    def scan_bounds(self):
        """Velocity window searched for guided modes, in m/s."""
        vt_min = min([l.material.vT for l in self.layers] + [self.substrate.vT])
        return SCAN_FLOOR * vt_min, SCAN_CEIL * self.substrate.vT

    def kernel_args(self):
        sub = self.substrate
        rho_ref, stiff_ref = sub.density, sub.c44
        rho = np.array([l.material.density / rho_ref for l in self.layers])
        c11 = np.array([l.material.c11 / stiff_ref for l in self.layers])
        c44 = np.array([l.material.c44 / stiff_ref for l in self.layers])
        kd = np.array([2.0 * math.pi * (l.thickness / self.wavelength) for l in self.layers])
        return rho, c11, c44, kd, (1.0, sub.c11 / stiff_ref, 1.0)


def boundary_determinant(stack, vp):
    """Characteristic function of ``stack`` at phase velocity ``vp`` (m/s).

    Real valued, with unit-normalized partial-wave vectors, so values are
    O(1) and guided modes sit at its zeros.
    """
    vt = stack.substrate.vT
    if not 0.0 < vp < vt:
        raise ValueError(f"vp = {vp} m/s outside the guided regime (0, {vt})")
    rho, c11, c44, kd, sub = stack.kernel_args()
    return float(kernels.characteristic(rho, c11, c44, kd, sub, np.array([vp / vt]))[0])


def find_roots(stack, n_samples=N_SAMPLES, rtol=ROOT_RTOL):
    """All sign-change roots in the scan window, ascending, in m/s."""
    lo, hi = stack.scan_bounds()
    vt = stack.substrate.vT
    rho, c11, c44, kd, sub = stack.kernel_args()
    roots = kernels.find_roots(rho, c11, c44, kd, sub, lo / vt, hi / vt, n_samples, rtol)
    return np.asarray(roots) * vt


def rayleigh_velocity(material):
    """Half-space Rayleigh velocity from the same determinant (no layers)."""
    stack = LayerStack((), material, 1.0)
    roots = find_roots(stack)
    if roots.size != 1:
        raise NoGuidedModesError(f"expected one Rayleigh root, found {roots.size}")
    return float(roots[0])


@dataclass(frozen=True)
class StackTemplate:
    """Recipe for the electrode / piezo film / substrate stack at given h and tm.

    With ``seed`` set, the bottom ``seed_thickness`` of the film is modeled
    as a separate non-piezoelectric layer of that material.
    """

    piezo: Material
    substrate: Material
    wavelength: float = 400e-9
    electrode: Material | None = None
    coverage: float = 0.5
    seed: Material | None = None
    seed_thickness: float = 0.0

    def build(self, h_over_lambda, tm_over_lambda=0.0):
        lam = self.wavelength
        layers = []
        if tm_over_lambda > 0:
            if self.electrode is None:
                raise ValueError("template has no electrode material")
            layers.append(Layer(self.electrode.homogenized(self.coverage), tm_over_lambda * lam))
        h = h_over_lambda * lam
        if self.seed is not None and self.seed_thickness > 0:
            if not h > self.seed_thickness:
                raise ValueError("film must be thicker than its seed layer")
            layers.append(Layer(self.piezo, h - self.seed_thickness))
            layers.append(Layer(replace(self.seed, K2=0.0), self.seed_thickness))
        else:
            layers.append(Layer(self.piezo, h))
        with warnings.catch_warnings():
            # a slow electrode over the film is expected
            warnings.simplefilter("ignore", SlowOnFastWarning)
            stack = LayerStack(tuple(layers), self.substrate, lam)
        if not self.substrate.vT > self.piezo.vT:
            warnings.warn("piezo film is not slower than the substrate", SlowOnFastWarning, stacklevel=2)
        return stack


@dataclass(frozen=True)
class DispersionBranch:
    """One guided-mode branch: ``points`` are (h/lambda, vp, kt2) sorted by h."""

    branch_index: int
    points: tuple

    @property
    def h_over_lambda(self):
        return np.array([p[0] for p in self.points])

    @property
    def vp(self):
        return np.array([p[1] for p in self.points])

    @property
    def kt2(self):
        return np.array([p[2] for p in self.points])

    def at(self, h_over_lambda):
        for p in self.points:
            if p[0] == h_over_lambda:
                return p
        return None


@dataclass(frozen=True)
class DesignPoint:
    h_over_lambda: float
    tm_over_lambda: float
    kt2: float
    vp: float
    fs_for_lambda: float

    def __post_init__(self):
        if not 0.0 <= self.kt2 < 1.0:
            raise ValueError("kt2 must lie in [0, 1)")

    def to_dict(self):
        return {
            "h_over_lambda": self.h_over_lambda,
            "tm_over_lambda": self.tm_over_lambda,
            "vp": self.vp,
            "kt2": self.kt2,
            "fs_for_lambda": self.fs_for_lambda,
        }


def _coupling(v_free, v_met):
    return min(max(2.0 * (v_free - v_met) / v_free, 0.0), math.nextafter(1.0, 0.0))


def _continue_branches(roots_per_h):
    """Assign branch ids by nearest-neighbor continuation along the h grid.

    Returns one dict {branch_id: root_index} per grid point.  Modes that
    appear (above cutoff) get the next free id, so ids follow the velocity
    ordering in which branches are born.
    """
    assignments = []
    prev = {}  # branch id -> velocity at the previous point
    next_id = 0
    for roots in roots_per_h:
        current = {}
        free = list(range(len(roots)))
        # existing branches, slowest first, each takes its nearest free root
        for bid, v in sorted(prev.items(), key=lambda kv: kv[1]):
            if not free:
                break
            j = min(free, key=lambda k: (abs(roots[k] - v), k))
            current[bid] = j
            free.remove(j)
        for j in free:
            current[next_id] = j
            next_id += 1
        # keep ids ordered like velocities within this point
        ids = sorted(current)
        idx = sorted(current.values())
        current = dict(zip(ids, idx))
        assignments.append(current)
        prev = {bid: roots[j] for bid, j in current.items()}
    return assignments


def find_branches(template, h_grid, tm_over_lambda=0.0, n_samples=N_SAMPLES, with_kt2=True):
    """Trace guided-mode branches of ``template`` over an ascending h/lambda grid.

    Each point reports the metallized-surface velocity and, with
    ``with_kt2``, the coupling 2 (v_free - v_met) / v_free of the same branch
    (NaN when the stiffened stack lacks it).
    """
    h_grid = [float(h) for h in h_grid]
    if not h_grid or any(b <= a for a, b in zip(h_grid, h_grid[1:])):
        raise ValueError("h/lambda grid must be non-empty and strictly ascending")
    if h_grid[0] <= 0 or h_grid[-1] > 2.0:
        raise ValueError("h/lambda grid must lie in (0, 2]")
    met, free = [], []
    for h in h_grid:
        stack = template.build(h, tm_over_lambda)
        met.append(find_roots(stack, n_samples))
        free.append(find_roots(stack.stiffened(), n_samples) if with_kt2 else None)
    if all(r.size == 0 for r in met):
        raise NoGuidedModesError("no guided modes (check slow-on-fast ordering)")
    points = {}
    for h, roots, froots, assign in zip(h_grid, met, free, _continue_branches(met)):
        for bid, j in assign.items():
            kt2 = math.nan
            if froots is not None and j < froots.size:
                kt2 = _coupling(froots[j], roots[j])
            points.setdefault(bid, []).append((h, float(roots[j]), kt2))
    return [DispersionBranch(bid, tuple(points[bid])) for bid in sorted(points)]


def kt2_delta_v(stack, branch=SEZAWA, n_samples=N_SAMPLES):
    """Coupling of branch ``branch`` (0 fundamental, 1 Sezawa) of ``stack``."""
    met = find_roots(stack, n_samples)
    free = find_roots(stack.stiffened(), n_samples)
    if branch >= met.size or branch >= free.size:
        raise BranchMissingError(
            f"branch {branch} not found (metallized: {met.size} modes, free: {free.size})"
        )
    return _coupling(free[branch], met[branch])


def design_frequency(point, wavelength):
    """Synchronous frequency vp / lambda in Hz."""
    vp = point.vp if isinstance(point, DesignPoint) else float(point)
    return vp / wavelength


@dataclass(frozen=True)
class SweepResult:
    """kt2 / vp over a (tm, h) grid; missing Sezawa points are NaN."""

    h_grid: tuple
    tm_grid: tuple
    kt2: np.ndarray  # shape (len(tm_grid), len(h_grid))
    vp: np.ndarray
    wavelength: float
    best: DesignPoint | None

    def points(self):
        for i, tm in enumerate(self.tm_grid):
            for j, h in enumerate(self.h_grid):
                yield h, tm, self.vp[i, j], self.kt2[i, j], self.vp[i, j] / self.wavelength

    def is_interior(self, point=None):
        p = point or self.best
        if p is None:
            return False
        return (
            self.h_grid[0] < p.h_over_lambda < self.h_grid[-1]
            and self.tm_grid[0] < p.tm_over_lambda < self.tm_grid[-1]
        )


def _sweep_column(args):
    template, h_grid, tm, n_samples, branch = args
    out_kt2 = np.full(len(h_grid), np.nan)
    out_vp = np.full(len(h_grid), np.nan)
    try:
        branches = find_branches(template, h_grid, tm, n_samples)
    except NoGuidedModesError:
        return out_kt2, out_vp
    for br in branches:
        if br.branch_index != branch:
            continue
        for h, vp, kt2 in br.points:
            j = h_grid.index(h)
            out_vp[j] = vp
            out_kt2[j] = kt2
    return out_kt2, out_vp


def sweep_design(template, h_grid, tm_grid, n_samples=N_SAMPLES, workers=None, branch=SEZAWA):
    """Coupling of the Sezawa branch over h/lambda x tm/lambda and its argmax.

    Columns (one per tm) are independent and may run in ``workers``
    processes; results are merged in grid order, so output is identical for
    any worker count.  Ties in kt2 go to the smaller h, then the smaller tm.
    """
    h_grid = tuple(float(h) for h in h_grid)
    tm_grid = tuple(float(t) for t in tm_grid)
    if not h_grid or not tm_grid:
        raise ValueError("grids must be non-empty")
    if any(t < 0 for t in tm_grid):
        raise ValueError("tm/lambda must be non-negative")
    jobs = [(template, list(h_grid), tm, n_samples, branch) for tm in tm_grid]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(_sweep_column, jobs))
    else:
        columns = [_sweep_column(job) for job in jobs]
    kt2 = np.array([c[0] for c in columns])
    vp = np.array([c[1] for c in columns])

    best = None
    for j, h in enumerate(h_grid):
        for i, tm in enumerate(tm_grid):
            k = kt2[i, j]
            if np.isnan(k):
                continue
            if best is None or k > best.kt2:
                best = DesignPoint(h, tm, float(k), float(vp[i, j]), float(vp[i, j]) / template.wavelength)
    return SweepResult(h_grid, tm_grid, kt2, vp, template.wavelength, best)
