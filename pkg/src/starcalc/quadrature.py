"""Deterministic box quadrature: per-axis adaptive Simpson, nested over
dimensions. Intended for the smooth low-dimensional fields used by the
closed-form integration paths (d <= 3)."""

from __future__ import annotations

import numpy as np

from .errors import QuadratureFailure
from .fields import Field, as_field


def _adaptive(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureFailure(f"adaptive Simpson did not converge on [{a}, {b}]")
    # children keep the panel tolerance: jump discontinuities then resolve
    # in O(log(1/tol)) levels instead of racing a halving tolerance
    return _adaptive(f, a, m, fa, flm, fm, left, tol, depth - 1) + _adaptive(
        f, m, b, fm, frm, fb, right, tol, depth - 1
    )


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10, max_depth: int = 60) -> float:
    """Integrate a scalar function on [a, b] to roughly abs tolerance tol."""
    if b <= a:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _adaptive(f, a, b, fa, fm, fb, whole, tol, max_depth)


def box_integral(field, box, tol: float = 1e-10) -> float:
    """Integral of a field over a product box, nesting 1D adaptive Simpson.

    Axes of zero width make the box a null set, giving 0. Constant fields
    shortcut to value * volume.
    """
    field = as_field(field)
    box = np.asarray(box, dtype=float)
    if box.ndim != 2 or box.shape[1] != 2:
        raise ValueError("box must have shape (d, 2)")
    widths = box[:, 1] - box[:, 0]
    if np.any(widths <= 0):
        return 0.0
    if isinstance(field, Field) and isinstance(field.spec, dict):
        if field.spec.get("expr") == "const":
            return float(field.spec["value"]) * float(np.prod(widths))

    d = box.shape[0]
    coords = np.zeros(d)

    def integrate_axis(axis: int) -> float:
        lo, hi = box[axis]
        if axis == d - 1:
            def f(x):
                coords[axis] = x
                return field(coords[None, :])[0]
        else:
            def f(x):
                coords[axis] = x
                return integrate_axis(axis + 1)
        return adaptive_simpson(f, lo, hi, tol=tol)

    return integrate_axis(0)
