"""Deterministic serialization for results and set functions.

Every number is written with 17 significant digits, enough to round-trip
any float64 exactly, and dictionary keys are emitted sorted, so a run with
the same configuration and seed produces byte-identical output. Set
functions serialize as a flat value array in mask order together with
their ground configuration; CSV export carries (mask, cardinality, value)
rows.
"""

from __future__ import annotations

import json
from dataclasses import fields, is_dataclass
from math import isinf, isnan

import numpy as np

from .model import GroundConfiguration, SetFunction, popcounts


def format_float(x: float) -> str:
    """Shortest fixed-precision form that still round-trips a float64."""
    if isnan(x):
        return '"nan"'
    if isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(float(x), ".17g")


def to_plain(obj):
    """Reduce arrays, numpy scalars, dataclasses and kernels to JSON shapes."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, SetFunction):
        return setfunction_to_json(obj)
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in fields(obj)}
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Render to JSON text with sorted keys and 17-digit floats."""
    out: list[str] = []

    def write(o, depth: int):
        if o is None:
            out.append("null")
        elif o is True:
            out.append("true")
        elif o is False:
            out.append("false")
        elif isinstance(o, str):
            out.append(json.dumps(o))
        elif isinstance(o, int):
            out.append(str(o))
        elif isinstance(o, float):
            out.append(format_float(o))
        elif isinstance(o, dict):
            if not o:
                out.append("{}")
                return
            pad, inner = " " * (indent * depth), " " * (indent * (depth + 1))
            out.append("{\n")
            for i, k in enumerate(sorted(o)):
                out.append(f"{inner}{json.dumps(str(k))}: ")
                write(o[k], depth + 1)
                out.append(",\n" if i < len(o) - 1 else "\n")
            out.append(pad + "}")
        elif isinstance(o, (list, tuple)):
            if not o:
                out.append("[]")
                return
            flat = all(not isinstance(v, (dict, list, tuple)) for v in o)
            if flat:
                out.append("[")
                for i, v in enumerate(o):
                    write(v, depth)
                    if i < len(o) - 1:
                        out.append(", ")
                out.append("]")
            else:
                pad, inner = " " * (indent * depth), " " * (indent * (depth + 1))
                out.append("[\n")
                for i, v in enumerate(o):
                    out.append(inner)
                    write(v, depth + 1)
                    out.append(",\n" if i < len(o) - 1 else "\n")
                out.append(pad + "]")
        else:
            raise TypeError(f"cannot serialize {type(o).__name__}")

    write(to_plain(obj), 0)
    out.append("\n")
    return "".join(out)


def setfunction_to_json(k: SetFunction) -> dict:
    """Ground points plus the flat value array in mask order."""
    return {
        "ground": [list(map(float, p.coords)) for p in k.ground.points],
        "values": [float(v) for v in k.values],
    }


def setfunction_from_json(obj) -> SetFunction:
    ground = GroundConfiguration([tuple(p) for p in obj["ground"]])
    return SetFunction(ground, obj["values"])


def setfunction_to_csv(k: SetFunction) -> str:
    pc = popcounts(k.n)
    rows = ["mask,cardinality,value"]
    for mask, v in enumerate(k.values):
        rows.append(f"{mask},{pc[mask]},{format(float(v), '.17g')}")
    return "\n".join(rows) + "\n"


def setfunction_from_csv(text: str, ground: GroundConfiguration) -> SetFunction:
    values = np.zeros(1 << ground.size)
    lines = [ln for ln in text.strip().splitlines() if ln]
    for ln in lines[1:]:
        mask, _, value = ln.split(",")
        values[int(mask)] = float(value)
    return SetFunction(ground, values)
