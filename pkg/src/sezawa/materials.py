"""Isotropic-equivalent acoustic materials and ScAlN doping interpolation.

Each material is reduced to density, bulk longitudinal and shear velocities
and an intrinsic coupling K2 = e**2 / (eps * c).  Piezoelectric stiffening
acts on the longitudinal constant only: vL' = vL * sqrt(1 + K2).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from importlib import resources

__all__ = [
    "Material",
    "MaterialDb",
    "MaterialError",
    "MATERIALS_ENV",
    "load_materials",
    "default_materials",
    "interpolate_scaln",
]

MATERIALS_ENV = "SEZAWA_MATERIALS"


class MaterialError(ValueError):
    """Invalid material data; the message starts with the JSON path."""


@dataclass(frozen=True)
class Material:
    name: str
    density: float
    vL: float
    vT: float
    K2: float = 0.0

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError(f"{self.name}: density must be positive")
        if not 0 < self.vT < self.vL:
            raise ValueError(f"{self.name}: need 0 < vT < vL")
        if not 0 <= self.K2 < 1:
            raise ValueError(f"{self.name}: K2 must lie in [0, 1)")

    @property
    def c11(self):
        return self.density * self.vL**2

    @property
    def c44(self):
        return self.density * self.vT**2

    def stiffened(self):
        """Same material with the piezoelectrically stiffened longitudinal velocity."""
        if self.K2 == 0:
            return self
        return replace(self, vL=self.vL * math.sqrt(1.0 + self.K2))

    def homogenized(self, coverage):
        """Rule of mixtures with vacuum: density and stiffness scale by coverage."""
        if not 0 < coverage <= 1:
            raise ValueError("coverage must lie in (0, 1]")
        return replace(self, name=f"{self.name}@{coverage:g}", density=self.density * coverage)


@dataclass(frozen=True)
class MaterialDb:
    materials: dict
    scaln_nodes: tuple = field(default=())

    def __post_init__(self):
        scs = [sc for sc, _ in self.scaln_nodes]
        if any(b <= a for a, b in zip(scs, scs[1:])):
            raise MaterialError("scaln_nodes: dopings must be strictly increasing")

    def __getitem__(self, name):
        try:
            return self.materials[name]
        except KeyError:
            raise KeyError(f"unknown material {name!r}") from None

    def __contains__(self, name):
        return name in self.materials


_FIELDS = {"name": str, "density": (int, float), "vL": (int, float), "vT": (int, float), "K2": (int, float)}


def _parse_db(doc):
    if not isinstance(doc, dict):
        raise MaterialError("$: expected an object")
    for key in ("materials", "scaln_nodes"):
        if not isinstance(doc.get(key), list):
            raise MaterialError(f"$.{key}: expected a list")
    materials = {}
    for i, entry in enumerate(doc["materials"]):
        path = f"$.materials[{i}]"
        if not isinstance(entry, dict):
            raise MaterialError(f"{path}: expected an object")
        for key, typ in _FIELDS.items():
            val = entry.get(key)
            if val is None or isinstance(val, bool) or not isinstance(val, typ):
                raise MaterialError(f"{path}.{key}: missing or wrong type")
        extra = set(entry) - set(_FIELDS) - {"notes"}
        if extra:
            raise MaterialError(f"{path}: unexpected keys {sorted(extra)}")
        name = entry["name"]
        if name in materials:
            raise MaterialError(f"{path}.name: duplicate material {name!r}")
        try:
            materials[name] = Material(name, float(entry["density"]), float(entry["vL"]),
                                       float(entry["vT"]), float(entry["K2"]))
        except ValueError as exc:
            raise MaterialError(f"{path} ({name}): {exc}") from None
    nodes = []
    for i, entry in enumerate(doc["scaln_nodes"]):
        path = f"$.scaln_nodes[{i}]"
        if not isinstance(entry, dict):
            raise MaterialError(f"{path}: expected an object")
        sc, ref = entry.get("sc"), entry.get("material")
        if isinstance(sc, bool) or not isinstance(sc, (int, float)) or not 0 <= sc <= 1:
            raise MaterialError(f"{path}.sc: expected a number in [0, 1]")
        if ref not in materials:
            raise MaterialError(f"{path}.material: unknown material {ref!r}")
        nodes.append((float(sc), materials[ref]))
    if len(nodes) < 2:
        raise MaterialError("$.scaln_nodes: at least 2 nodes are required")
    return MaterialDb(materials, tuple(nodes))


def load_materials(source):
    """Load a material database from a path, a JSON string or a parsed dict."""
    if isinstance(source, dict):
        return _parse_db(source)
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = str(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MaterialError(f"$: invalid JSON ({exc})") from None
    return _parse_db(doc)


def default_materials():
    """The database named by $SEZAWA_MATERIALS, else the packaged one."""
    path = os.environ.get(MATERIALS_ENV)
    if path:
        return load_materials(path)
    text = resources.files("sezawa").joinpath("data/materials.json").read_text(encoding="utf-8")
    return load_materials(text)


def interpolate_scaln(db, sc):
    """Piecewise-linear ScAlN properties at Sc fraction ``sc`` (no extrapolation)."""
    nodes = db.scaln_nodes
    lo, hi = nodes[0][0], nodes[-1][0]
    if not lo <= sc <= hi:
        raise ValueError(f"Sc fraction {sc} outside node range [{lo}, {hi}]")
    for s, mat in nodes:
        if sc == s:
            return mat
    for (s0, m0), (s1, m1) in zip(nodes, nodes[1:]):
        if s0 < sc < s1:
            t = (sc - s0) / (s1 - s0)

            def lerp(a, b):
                return a + t * (b - a)

            return Material(
                f"ScAlN@{sc:g}",
                lerp(m0.density, m1.density),
                lerp(m0.vL, m1.vL),
                lerp(m0.vT, m1.vT),
                lerp(m0.K2, m1.K2),
            )
    raise AssertionError("unreachable")
