"""Deterministic JSON/CSV rendering with 12 significant digits."""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

SIG_DIGITS = 12


def fmt(x):
    """Text for one CSV cell; NaN / None become empty."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "" if math.isnan(x) else f"{x:.{SIG_DIGITS}g}"
    return str(x)


def jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return jsonable(obj.to_dict())
        return jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{SIG_DIGITS}g}")
    return obj


def dumps(obj):
    return json.dumps(jsonable(obj), indent=2) + "\n"


def flatten(obj, prefix=""):
    """Nested dicts to dotted ``(key, value)`` pairs, lists indexed."""
    out = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.extend(flatten(v, f"{prefix}{k}."))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            out.extend(flatten(v, f"{prefix}{i}."))
    else:
        out.append((prefix[:-1], obj))
    return out


def key_value_csv(obj):
    lines = ["key,value"]
    lines.extend(f"{k},{fmt(v)}" for k, v in flatten(jsonable(obj)))
    return "\n".join(lines) + "\n"


def table_csv(header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"
