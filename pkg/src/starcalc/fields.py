"""Scalar fields on phase space and the small expression language that
makes them serializable.

A field maps a batch of points, shape (m, d), to values of shape (m,).
Fields built from JSON expressions round-trip through their ``spec``;
fields wrapped from arbitrary callables do not.
"""

from __future__ import annotations

import numpy as np

from .errors import IndexOutOfRange


class Field:
    """Vectorized scalar function on phase space.

    Args:
        fn: callable taking an (m, d) float array, returning shape (m,).
        spec: JSON-serializable expression dict, or None for opaque fields.
    """

    def __init__(self, fn, spec=None):
        self._fn = fn
        self.spec = spec

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        out = np.asarray(self._fn(pts), dtype=float)
        return np.broadcast_to(out, (pts.shape[0],)).copy() if out.ndim == 0 else out

    def at(self, point) -> float:
        """Evaluate at a single point given as a coordinate sequence."""
        return float(self(np.asarray(point, dtype=float)[None, :])[0])


def as_field(obj) -> Field:
    if isinstance(obj, Field):
        return obj
    if isinstance(obj, dict):
        return parse_field(obj)
    if callable(obj):
        return Field(lambda pts, f=obj: np.asarray(f(pts), dtype=float))
    if np.isscalar(obj):
        return const_field(float(obj))
    raise TypeError(f"cannot interpret {obj!r} as a field")


def const_field(c: float) -> Field:
    c = float(c)
    return Field(lambda pts: np.full(pts.shape[0], c), {"expr": "const", "value": c})


def coord_field(axis: int) -> Field:
    axis = int(axis)
    return Field(lambda pts: pts[:, axis].copy(), {"expr": "coord", "axis": axis})


def indicator_box(box) -> Field:
    """Indicator of the closed sub-box [lo_1, hi_1] x ... x [lo_d, hi_d]."""
    b = np.asarray(box, dtype=float)

    def fn(pts):
        inside = np.all((pts >= b[:, 0]) & (pts <= b[:, 1]), axis=1)
        return inside.astype(float)

    return Field(fn, {"expr": "indicator", "box": [[float(lo), float(hi)] for lo, hi in b]})


def from_scalar(g) -> Field:
    """Wrap a plain scalar function of one point (coordinate array)."""
    return Field(lambda pts: np.array([float(g(p)) for p in pts]))


def fsum(*fields) -> Field:
    fields = [as_field(f) for f in fields]
    spec = None
    if all(f.spec is not None for f in fields):
        spec = {"expr": "sum", "terms": [f.spec for f in fields]}
    return Field(lambda pts: sum(f(pts) for f in fields), spec)


def fprod(*fields) -> Field:
    fields = [as_field(f) for f in fields]
    spec = None
    if all(f.spec is not None for f in fields):
        spec = {"expr": "prod", "factors": [f.spec for f in fields]}

    def fn(pts):
        out = np.ones(pts.shape[0])
        for f in fields:
            out *= f(pts)
        return out

    return Field(fn, spec)


def fscale(c: float, field) -> Field:
    field = as_field(field)
    c = float(c)
    spec = None
    if field.spec is not None:
        spec = {"expr": "scale", "coeff": c, "arg": field.spec}
    return Field(lambda pts: c * field(pts), spec)


def fabs(field) -> Field:
    field = as_field(field)
    spec = {"expr": "abs", "arg": field.spec} if field.spec is not None else None
    return Field(lambda pts: np.abs(field(pts)), spec)


def fexp(field) -> Field:
    field = as_field(field)
    spec = {"expr": "exp", "arg": field.spec} if field.spec is not None else None
    return Field(lambda pts: np.exp(field(pts)), spec)


def fpow(field, exponent: int) -> Field:
    field = as_field(field)
    exponent = int(exponent)
    if exponent < 0:
        raise ValueError("only nonnegative integer powers are supported")
    spec = None
    if field.spec is not None:
        spec = {"expr": "pow", "base": field.spec, "exponent": exponent}
    return Field(lambda pts: field(pts) ** exponent, spec)


def parse_field(obj, dim: int | None = None) -> Field:
    """Compile a JSON expression dict into a Field.

    Grammar: const, coord, sum, prod, scale, pow (nonnegative integer
    exponent), exp, abs, indicator (sub-box). When ``dim`` is given,
    coordinate axes are range-checked at parse time.
    """
    if not isinstance(obj, dict) or "expr" not in obj:
        raise ValueError(f"malformed field expression: {obj!r}")
    kind = obj["expr"]
    if kind == "const":
        return const_field(obj["value"])
    if kind == "coord":
        axis = int(obj["axis"])
        if axis < 0 or (dim is not None and axis >= dim):
            raise IndexOutOfRange(f"coordinate axis {axis} out of range for dim {dim}")
        return coord_field(axis)
    if kind == "sum":
        return fsum(*[parse_field(t, dim) for t in obj["terms"]])
    if kind == "prod":
        return fprod(*[parse_field(t, dim) for t in obj["factors"]])
    if kind == "scale":
        return fscale(obj["coeff"], parse_field(obj["arg"], dim))
    if kind == "pow":
        return fpow(parse_field(obj["base"], dim), obj["exponent"])
    if kind == "exp":
        return fexp(parse_field(obj["arg"], dim))
    if kind == "abs":
        return fabs(parse_field(obj["arg"], dim))
    if kind == "indicator":
        box = obj["box"]
        if dim is not None and len(box) != dim:
            raise ValueError(f"indicator box has {len(box)} axes, expected {dim}")
        return indicator_box(box)
    raise ValueError(f"unknown field expression kind {kind!r}")
