"""Analytic calculus in the subset-convolution algebra: powers, series,
exponential, logarithm, inverse, and derivation operators.

On a ground of size n, any argument vanishing at the empty set has
vanishing convolution powers beyond n, so every series here is an exact
finite sum truncated at n. No convergence machinery is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, NotInIdeal, NotNormalized
from .model import SetFunction, popcounts
from .transforms import conv_fast


def conv_power(u: SetFunction, m: int) -> SetFunction:
    """m-fold subset-convolution power; m = 0 gives the unit."""
    if m < 0:
        raise ValueError("power must be nonnegative")
    out = SetFunction.unit(u.ground)
    if m and u.values[0] == 0.0 and m > u.n:
        return u.with_values(np.zeros_like(u.values))
    for _ in range(m):
        out = conv_fast(out, u)
    return out


def conv_series(coeffs, u: SetFunction) -> SetFunction:
    """sum_j coeffs[j] * u^{*j} for u vanishing at the empty set.

    Powers beyond the ground size vanish identically, so only the first
    min(len(coeffs), n + 1) coefficients matter.
    """
    if u.values[0] != 0.0:
        raise NotInIdeal(f"series argument has value {u.values[0]} at the empty set")
    coeffs = [float(c) for c in coeffs]
    acc = coeffs[0] * SetFunction.unit(u.ground) if coeffs else SetFunction.unit(u.ground) * 0.0
    power = SetFunction.unit(u.ground)
    for j in range(1, min(len(coeffs), u.n + 1)):
        power = conv_fast(power, u)
        if coeffs[j] != 0.0:
            acc = acc + coeffs[j] * power
    return acc


def conv_exp(u: SetFunction) -> SetFunction:
    """Combinatorial exponential: sum_j u^{*j} / j!, value 1 at the empty set."""
    if u.values[0] != 0.0:
        raise NotInIdeal(f"exponential argument has value {u.values[0]} at the empty set")
    acc = SetFunction.unit(u.ground)
    term = SetFunction.unit(u.ground)
    for j in range(1, u.n + 1):
        term = conv_fast(term, u) * (1.0 / j)
        acc = acc + term
    return acc


def conv_log(k: SetFunction) -> SetFunction:
    """Inverse of conv_exp: alternating series in kbar = k - unit."""
    if k.values[0] != 1.0:
        raise NotNormalized(f"logarithm argument has value {k.values[0]} at the empty set")
    kbar = k - SetFunction.unit(k.ground)
    acc = kbar.copy()
    power = kbar
    for j in range(2, k.n + 1):
        power = conv_fast(power, kbar)
        acc = acc + ((-1.0) ** (j - 1) / j) * power
    return acc


def conv_inverse(k: SetFunction) -> SetFunction:
    """Convolution inverse: k * conv_inverse(k) equals the unit."""
    if k.values[0] != 1.0:
        raise NotNormalized(f"inverse argument has value {k.values[0]} at the empty set")
    kbar = k - SetFunction.unit(k.ground)
    acc = SetFunction.unit(k.ground)
    power = SetFunction.unit(k.ground)
    for j in range(1, k.n + 1):
        power = conv_fast(power, kbar)
        acc = acc + ((-1.0) ** j) * power
    return acc


def point_derivative(G: SetFunction, i: int) -> SetFunction:
    """out(eta) = G(eta + point i); the result lives on the ground without i."""
    if not 0 <= i < G.n:
        raise IndexOutOfRange(f"point index {i} out of range for ground size {G.n}")
    vals = G.values.reshape(-1, 2, 1 << i)[:, 1, :].ravel()
    return SetFunction(G.ground.drop(i), vals)


def drop_point(G: SetFunction, i: int) -> SetFunction:
    """Restriction to subsets avoiding point i, on the reduced ground."""
    if not 0 <= i < G.n:
        raise IndexOutOfRange(f"point index {i} out of range for ground size {G.n}")
    vals = G.values.reshape(-1, 2, 1 << i)[:, 0, :].ravel()
    return SetFunction(G.ground.drop(i), vals)


def number_op(k: SetFunction) -> SetFunction:
    """Cardinality multiplication: out(eta) = |eta| * k(eta)."""
    return k.with_values(k.values * popcounts(k.n).astype(float))


class Derivation:
    """Operator handle for the product-rule check.

    apply() maps a set function to its image; co_restrict() maps the
    convolution partner onto the image's ground (identity unless the
    operator shrinks the ground, as the point derivative does).
    """

    name = "derivation"

    def apply(self, k: SetFunction) -> SetFunction:
        raise NotImplementedError

    def co_restrict(self, k: SetFunction) -> SetFunction:
        return k


class PointDerivation(Derivation):
    def __init__(self, i: int):
        self.i = int(i)
        self.name = f"d_point[{self.i}]"

    def apply(self, k):
        return point_derivative(k, self.i)

    def co_restrict(self, k):
        return drop_point(k, self.i)


class NumberDerivation(Derivation):
    name = "number_op"

    def apply(self, k):
        return number_op(k)


class CustomOperator(Derivation):
    """Wrap an arbitrary SetFunction -> SetFunction map (same ground)."""

    def __init__(self, fn, name="custom"):
        self.fn = fn
        self.name = name

    def apply(self, k):
        return self.fn(k)


@dataclass
class DerivationReport:
    operator: str
    max_residual: float
    unit_image_norm: float
    tol: float

    @property
    def is_derivation(self) -> bool:
        return self.max_residual <= self.tol and self.unit_image_norm <= self.tol


def check_derivation(B: Derivation, k1: SetFunction, k2: SetFunction,
                     tol: float = 1e-10) -> DerivationReport:
    """Product-rule residual |B(k1*k2) - (Bk1)*k2 - k1*(Bk2)| and |B unit|."""
    lhs = B.apply(conv_fast(k1, k2))
    rhs = conv_fast(B.apply(k1), B.co_restrict(k2)) + conv_fast(B.co_restrict(k1), B.apply(k2))
    residual = float(np.max(np.abs(lhs.values - rhs.values)))
    unit_image = B.apply(SetFunction.unit(k1.ground))
    return DerivationReport(
        operator=B.name,
        max_residual=residual,
        unit_image_norm=float(np.max(np.abs(unit_image.values))),
        tol=tol,
    )
