"""Subset-lattice transforms on tabulated set functions.

Two bilinear products are provided, each with a definitional reference
implementation and a fast transform-based one:

- conv: (k1 * k2)(S) = sum over disjoint splits A + (S without A),
  i.e. the subset convolution. Fast path: ranked zeta / Moebius sweep,
  O(2**n * n**2).
- cover: (g1 . g2)(S) = sum over all pairs (U, V) with U | V = S.
  Fast path: Moebius(zeta(g1) * zeta(g2)), O(2**n * n).

The naive loops are kept deliberately literal (decrementing-AND submask
walk; full pair enumeration) so they can serve as oracles for the fast
paths. Iteration order is fixed, so results are bitwise reproducible.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import GroundMismatch, OverlappingGrounds
from .fields import fsum
from .kernels import (
    EmptyIndicator,
    config_array,
    Kernel,
    PointProduct,
    kernel_from_json,
    register_kernel_type,
    tabulate,
)
from .model import GroundConfiguration, SetFunction, check_same_ground, popcounts

FAST_CUTOFF = 8  # below this size the ranked machinery loses to the naive loop


@njit(cache=True)
def _conv_naive_loop(a, b, out):
    for s in range(a.shape[0]):
        acc = 0.0
        sub = s
        while True:
            acc += a[sub] * b[s ^ sub]
            if sub == 0:
                break
            sub = (sub - 1) & s
        out[s] = acc


@njit(cache=True)
def _cover_naive_loop(a, b, out):
    full = a.shape[0]
    for u in range(full):
        x = a[u]
        for v in range(full):
            out[u | v] += x * b[v]


@njit(cache=True)
def _conv_ranked_loop(a, b, pc, n):
    full = a.shape[0]
    fhat = np.zeros((n + 1, full))
    ghat = np.zeros((n + 1, full))
    for m in range(full):
        fhat[pc[m], m] = a[m]
        ghat[pc[m], m] = b[m]
    for r in range(n + 1):
        fr = fhat[r]
        gr = ghat[r]
        for i in range(n):
            bit = 1 << i
            step = bit << 1
            for base in range(0, full, step):
                for off in range(base + bit, base + step):
                    fr[off] += fr[off - bit]
                    gr[off] += gr[off - bit]
    out = np.empty(full)
    buf = np.empty(full)
    for r in range(n + 1):
        g0 = ghat[r]
        f0 = fhat[0]
        for m in range(full):
            buf[m] = f0[m] * g0[m]
        for i in range(1, r + 1):
            fi = fhat[i]
            gi = ghat[r - i]
            for m in range(full):
                buf[m] += fi[m] * gi[m]
        for i in range(n):
            bit = 1 << i
            step = bit << 1
            for base in range(0, full, step):
                for off in range(base + bit, base + step):
                    buf[off] -= buf[off - bit]
        for m in range(full):
            if pc[m] == r:
                out[m] = buf[m]
    return out


@njit(cache=True)
def _two_type_cover_loop(a, b, out):
    P, M = a.shape
    for up in range(P):
        for um in range(M):
            x = a[up, um]
            for vp in range(P):
                for vm in range(M):
                    out[up | vp, um | vm] += x * b[vp, vm]


def zeta_values(vals: np.ndarray, n: int) -> np.ndarray:
    """Sum over subsets: out(S) = sum_{A subset of S} vals(A)."""
    out = vals.copy()
    for i in range(n):
        v = out.reshape(-1, 2, 1 << i)
        v[:, 1, :] += v[:, 0, :]
    return out


def mobius_values(vals: np.ndarray, n: int) -> np.ndarray:
    """Inverse of zeta: out(S) = sum_{A subset of S} (-1)**|S - A| vals(A)."""
    out = vals.copy()
    for i in range(n):
        v = out.reshape(-1, 2, 1 << i)
        v[:, 1, :] -= v[:, 0, :]
    return out


def conv_naive_values(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    out = np.empty(1 << n)
    _conv_naive_loop(np.ascontiguousarray(a), np.ascontiguousarray(b), out)
    return out


def conv_fast_values(a: np.ndarray, b: np.ndarray, n: int, cutoff: int | None = None) -> np.ndarray:
    if n < (FAST_CUTOFF if cutoff is None else cutoff):
        return conv_naive_values(a, b, n)
    pc = popcounts(n).astype(np.int64)
    return _conv_ranked_loop(np.ascontiguousarray(a, dtype=np.float64),
                             np.ascontiguousarray(b, dtype=np.float64), pc, n)


def cover_naive_values(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(1 << n)
    _cover_naive_loop(np.ascontiguousarray(a), np.ascontiguousarray(b), out)
    return out


def cover_fast_values(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    return mobius_values(zeta_values(a, n) * zeta_values(b, n), n)


def _binary_op(k1: SetFunction, k2: SetFunction, fn) -> SetFunction:
    check_same_ground(k1, k2)
    return SetFunction(k1.ground, fn(k1.values, k2.values, k1.n))


def conv_naive(k1: SetFunction, k2: SetFunction) -> SetFunction:
    """Subset convolution by direct submask enumeration, O(3**n)."""
    return _binary_op(k1, k2, conv_naive_values)


def conv_fast(k1: SetFunction, k2: SetFunction, cutoff: int | None = None) -> SetFunction:
    """Subset convolution via ranked transforms, O(2**n n**2).

    Dispatches to the naive loop below the crossover size. Pass cutoff=0
    to force the ranked path.
    """
    check_same_ground(k1, k2)
    return SetFunction(k1.ground, conv_fast_values(k1.values, k2.values, k1.n, cutoff))


def cover_naive(g1: SetFunction, g2: SetFunction) -> SetFunction:
    """Cover product by enumerating all pairs with a prescribed union."""
    return _binary_op(g1, g2, cover_naive_values)


def cover_fast(g1: SetFunction, g2: SetFunction) -> SetFunction:
    """Cover product via zeta / Moebius, O(2**n n)."""
    return _binary_op(g1, g2, cover_fast_values)


def zeta(k: SetFunction) -> SetFunction:
    return SetFunction(k.ground, zeta_values(k.values, k.n))


def mobius(k: SetFunction) -> SetFunction:
    return SetFunction(k.ground, mobius_values(k.values, k.n))


class TwoTypeSetFunction:
    """Set function of a pair of configurations over disjoint grounds.

    values[sp, sm] is the value at (plus-subset sp, minus-subset sm);
    rows are indexed by the plus mask.
    """

    def __init__(self, plus: GroundConfiguration, minus: GroundConfiguration, values):
        if {p.coords for p in plus.points} & {p.coords for p in minus.points}:
            raise OverlappingGrounds("plus and minus grounds share a point")
        values = np.asarray(values, dtype=float)
        if values.shape != (1 << plus.size, 1 << minus.size):
            raise ValueError(f"values shape {values.shape} does not match grounds")
        self.plus = plus
        self.minus = minus
        self.values = values.copy()

    def value(self, mask_plus: int, mask_minus: int) -> float:
        self.plus._check_mask(mask_plus)
        self.minus._check_mask(mask_minus)
        return float(self.values[mask_plus, mask_minus])

    def _check_compatible(self, other: "TwoTypeSetFunction"):
        if self.plus != other.plus or self.minus != other.minus:
            raise GroundMismatch("two-type set functions live on different grounds")

    def __repr__(self):
        return f"TwoTypeSetFunction(n_plus={self.plus.size}, n_minus={self.minus.size})"


def two_type_cover_naive(g1: TwoTypeSetFunction, g2: TwoTypeSetFunction) -> TwoTypeSetFunction:
    """Cover product acting independently in each type coordinate."""
    g1._check_compatible(g2)
    out = np.zeros_like(g1.values)
    _two_type_cover_loop(
        np.ascontiguousarray(g1.values), np.ascontiguousarray(g2.values), out
    )
    return TwoTypeSetFunction(g1.plus, g1.minus, out)


def _axis_pass(vals: np.ndarray, n_bits: int, axis: int, sign: int):
    for i in range(n_bits):
        if axis == 0:
            v = vals.reshape(-1, 2, 1 << i, vals.shape[1])
            if sign > 0:
                v[:, 1, :, :] += v[:, 0, :, :]
            else:
                v[:, 1, :, :] -= v[:, 0, :, :]
        else:
            v = vals.reshape(vals.shape[0], -1, 2, 1 << i)
            if sign > 0:
                v[:, :, 1, :] += v[:, :, 0, :]
            else:
                v[:, :, 1, :] -= v[:, :, 0, :]


def two_type_cover(g1: TwoTypeSetFunction, g2: TwoTypeSetFunction) -> TwoTypeSetFunction:
    g1._check_compatible(g2)
    za = g1.values.copy()
    zb = g2.values.copy()
    for vals in (za, zb):
        _axis_pass(vals, g1.plus.size, 0, +1)
        _axis_pass(vals, g1.minus.size, 1, +1)
    prod = za * zb
    _axis_pass(prod, g1.plus.size, 0, -1)
    _axis_pass(prod, g1.minus.size, 1, -1)
    return TwoTypeSetFunction(g1.plus, g1.minus, prod)


def _embed_masks(indices, n_sub: int) -> np.ndarray:
    """Map each submask over `indices` to the corresponding parent mask."""
    bits = (np.arange(1 << n_sub)[:, None] >> np.arange(n_sub)[None, :]) & 1
    weights = np.array([1 << i for i in indices], dtype=np.int64)
    return bits @ weights


def lift_two_type(G: SetFunction, plus_indices, minus_indices=None) -> TwoTypeSetFunction:
    """Lift a one-type set function: out(sp, sm) = G(sp union sm).

    plus_indices selects which ground points carry the plus type; the rest
    (or an explicit minus_indices partition) carry the minus type.
    """
    n = G.n
    plus_indices = sorted(int(i) for i in plus_indices)
    if minus_indices is None:
        minus_indices = [i for i in range(n) if i not in plus_indices]
    else:
        minus_indices = sorted(int(i) for i in minus_indices)
        if sorted(plus_indices + minus_indices) != list(range(n)):
            raise ValueError("plus and minus indices must partition the ground")
    plus = GroundConfiguration([G.ground[i] for i in plus_indices])
    minus = GroundConfiguration([G.ground[i] for i in minus_indices])
    ep = _embed_masks(plus_indices, plus.size)
    em = _embed_masks(minus_indices, minus.size)
    vals = G.values[ep[:, None] | em[None, :]]
    return TwoTypeSetFunction(plus, minus, vals)


# -- product kernels -------------------------------------------------------

class ConvKernel(Kernel):
    """Subset convolution of two kernels, itself usable as a kernel.

    value(eta) tabulates both factors over eta and contracts against the
    complement: sum_{xi} t1[xi] * t2[eta minus xi] = dot(t1, reversed(t2)).
    """

    def __init__(self, k1: Kernel, k2: Kernel):
        self.k1 = k1
        self.k2 = k2

    def value(self, pts) -> float:
        sub = GroundConfiguration(config_array(pts))
        t1 = tabulate(self.k1, sub)
        t2 = tabulate(self.k2, sub)
        return float(t1.values @ t2.values[::-1])

    def to_json(self):
        return {"type": "conv", "factors": [self.k1.to_json(), self.k2.to_json()]}


class CoverKernel(Kernel):
    """Cover product of two kernels: sum over pairs of subsets whose union
    is the whole argument configuration."""

    def __init__(self, k1: Kernel, k2: Kernel):
        self.k1 = k1
        self.k2 = k2

    def value(self, pts) -> float:
        sub = GroundConfiguration(config_array(pts))
        t1 = tabulate(self.k1, sub)
        t2 = tabulate(self.k2, sub)
        return float(cover_fast_values(t1.values, t2.values, sub.size)[-1])

    def to_json(self):
        return {"type": "cover", "factors": [self.k1.to_json(), self.k2.to_json()]}


def conv_kernels(k1: Kernel, k2: Kernel) -> Kernel:
    """Convolution at the kernel level, simplified where a closed form exists.

    Exponents multiply into one exponent of the summed field; the empty-set
    indicator is the convolution unit.
    """
    if isinstance(k1, EmptyIndicator):
        return k2
    if isinstance(k2, EmptyIndicator):
        return k1
    if isinstance(k1, PointProduct) and isinstance(k2, PointProduct):
        return PointProduct(fsum(k1.field, k2.field))
    return ConvKernel(k1, k2)


def _parse_pair(cls):
    def parse(obj, dim):
        a, b = obj["factors"]
        return cls(kernel_from_json(a, dim), kernel_from_json(b, dim))

    return parse


register_kernel_type("conv", _parse_pair(ConvKernel))
register_kernel_type("cover", _parse_pair(CoverKernel))
