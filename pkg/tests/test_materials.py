import json
import math

import pytest

from sezawa.materials import (
    MATERIALS_ENV,
    Material,
    MaterialError,
    default_materials,
    interpolate_scaln,
    load_materials,
)


def _doc():
    return {
        "materials": [
            {"name": "A", "density": 3000, "vL": 10000, "vT": 6000, "K2": 0.1},
            {"name": "B", "density": 4000, "vL": 8000, "vT": 5000, "K2": 0.3, "notes": "x"},
        ],
        "scaln_nodes": [{"sc": 0.0, "material": "A"}, {"sc": 0.4, "material": "B"}],
    }


def test_packaged_database_loads():
    db = default_materials()
    for name in ("AlN", "ScAlN30", "6H-SiC", "AlSiCu", "Au"):
        assert name in db
    assert db["6H-SiC"].vT > db["ScAlN30"].vT  # slow-on-fast
    k2 = [m.K2 for _, m in db.scaln_nodes]
    assert k2 == sorted(k2)  # coupling grows with Sc


def test_env_var_overrides(tmp_path, monkeypatch):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(_doc()))
    monkeypatch.setenv(MATERIALS_ENV, str(p))
    assert set(default_materials().materials) == {"A", "B"}


def test_interpolation_nodes_exact_and_midpoint_linear():
    db = load_materials(_doc())
    assert interpolate_scaln(db, 0.0) is db["A"]
    m = interpolate_scaln(db, 0.1)
    assert m.density == pytest.approx(3250)
    assert m.vL == pytest.approx(9500)
    assert m.K2 == pytest.approx(0.15)


@pytest.mark.parametrize("sc", [-0.1, 0.5])
def test_interpolation_no_extrapolation(sc):
    with pytest.raises(ValueError, match="outside"):
        interpolate_scaln(load_materials(_doc()), sc)


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d["materials"][1].pop("vT"), "$.materials[1].vT"),
        (lambda d: d["materials"][0].update(density="x"), "$.materials[0].density"),
        (lambda d: d["materials"][0].update(extra=1), "$.materials[0]"),
        (lambda d: d["materials"][0].update(vT=20000), "$.materials[0]"),
        (lambda d: d["scaln_nodes"][1].update(material="Z"), "$.scaln_nodes[1].material"),
        (lambda d: d.pop("scaln_nodes"), "$.scaln_nodes"),
        (lambda d: d["scaln_nodes"].reverse(), "scaln_nodes"),
    ],
)
def test_schema_errors_name_json_path(mutate, path):
    doc = _doc()
    mutate(doc)
    with pytest.raises(MaterialError) as info:
        load_materials(doc)
    assert path in str(info.value)


def test_invalid_json_text():
    with pytest.raises(MaterialError, match="invalid JSON"):
        load_materials("{not json")


def test_load_from_path(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(_doc()))
    assert "B" in load_materials(str(p))


def test_stiffening_and_homogenization():
    m = Material("P", 3000, 10000, 6000, 0.21)
    s = m.stiffened()
    assert s.vL == pytest.approx(10000 * math.sqrt(1.21))
    assert s.c11 == pytest.approx(m.c11 * 1.21)
    assert s.vT == m.vT
    e = Material("E", 2700, 6420, 3040)
    assert e.stiffened() is e
    h = e.homogenized(0.5)
    assert h.density == 1350 and h.vL == e.vL
    assert h.c11 == pytest.approx(0.5 * e.c11)
    with pytest.raises(ValueError):
        e.homogenized(0)


def test_material_validation():
    with pytest.raises(ValueError):
        Material("x", 1000, 5000, 6000)
    with pytest.raises(ValueError):
        Material("x", -1, 6000, 5000)
    with pytest.raises(ValueError):
        Material("x", 1000, 6000, 5000, K2=1.2)
