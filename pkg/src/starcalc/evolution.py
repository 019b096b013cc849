"""Multiplication operators, their pre-duals, resolvents, and the
convolution evolution equation dk/dt = a * k.

The evolution and resolvent are convolution-power series. When the
multiplier vanishes at the empty set the series terminate at the ground
size and results are exact; otherwise summation stops once terms fall
below roundoff and the first omitted magnitude is reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp

import numpy as np

from .errors import DivergentSeries, NotInIdeal, OverlappingConfigurations
from .fields import as_field, fprod, fscale
from .kernels import (
    CustomKernel,
    EmptyIndicator,
    Kernel,
    PointProduct,
    config_array,
    exponent_form,
    tabulate,
)
from .model import GroundConfiguration, SetFunction, check_same_ground, popcounts
from .poisson import IntegralEstimate, LPIntegrator
from .quadrature import box_integral
from .transforms import conv_fast, mobius, zeta


def mult_operator(a: SetFunction, k: SetFunction) -> SetFunction:
    """Apply the multiplication operator of a: (Ak) = a * k.

    The constant-one multiplier is the zeta transform and the alternating
    multiplier (-1)**|eta| its inverse; both are recognized and dispatched
    to the bit-pass transforms, so those images agree with zeta / mobius
    bit for bit.
    """
    check_same_ground(a, k)
    if np.array_equal(a.values, np.ones_like(a.values)):
        return zeta(k)
    if np.array_equal(a.values, (-1.0) ** popcounts(a.n)):
        return mobius(k)
    return conv_fast(a, k)


def operator_norm_bound(a: SetFunction, C: float = 2.0, margin: float = 0.1) -> float:
    """Lower threshold on |z| for the resolvent series of a bounded multiplier.

    The convolution bound gives an operator norm at most C/(C-1) times the
    sup of the multiplier; the margin widens it since that constant is not
    claimed sharp.
    """
    if C <= 1.0:
        raise ValueError("the ratio bound needs C > 1")
    return (1.0 + margin) * (C / (C - 1.0)) * float(np.max(np.abs(a.values)))


def resolvent(a: SetFunction, k: SetFunction, z: float, max_terms: int = 200,
              tol: float = 1e-14) -> SetFunction:
    """Sum of z**-(n+1) a**(*n) * k, the inverse of (z - A) applied to k."""
    check_same_ground(a, k)
    z = float(z)
    if z == 0.0:
        raise ValueError("the resolvent is undefined at z = 0")
    term = k * (1.0 / z)
    acc = term
    if a.values[0] == 0.0:
        for _ in range(a.n):
            term = conv_fast(a, term) * (1.0 / z)
            acc = acc + term
        return acc
    scale = max(float(np.max(np.abs(k.values))), 1e-300)
    for _ in range(max_terms):
        term = conv_fast(a, term) * (1.0 / z)
        acc = acc + term
        if float(np.max(np.abs(term.values))) <= tol * scale:
            return acc
    raise DivergentSeries(
        f"resolvent series still above tolerance after {max_terms} terms at z={z}")


@dataclass(frozen=True)
class EvolutionResult:
    """Solution snapshot of the convolution evolution at one time."""

    time: float
    solution: SetFunction
    truncation_terms: int
    tail_bound: float


def evolve(a: SetFunction, k0: SetFunction, t: float, max_terms: int = 200) -> EvolutionResult:
    """Evolve k0 for time t under dk/dt = a * k: k_t = exp*(t a) * k0.

    Exact (tail 0) when a vanishes at the empty set; otherwise the series
    is cut once terms reach roundoff, reporting the first omitted size.
    """
    check_same_ground(a, k0)
    t = float(t)
    if t < 0:
        raise ValueError("evolution time must be nonnegative")
    term = k0
    acc = k0
    if a.values[0] == 0.0:
        for n in range(1, a.n + 1):
            term = conv_fast(a, term) * (t / n)
            acc = acc + term
        return EvolutionResult(t, acc, a.n + 1, 0.0)
    for n in range(1, max_terms + 1):
        term = conv_fast(a, term) * (t / n)
        acc = acc + term
        size = float(np.max(np.abs(term.values)))
        if size <= 1e-18 * max(float(np.max(np.abs(acc.values))), 1e-300):
            return EvolutionResult(t, acc, n + 1, size)
    raise DivergentSeries(f"evolution series still above roundoff after {max_terms} terms")


def evolve_singleton(sigma, k0: Kernel, t: float, g: GroundConfiguration) -> SetFunction:
    """Closed-form singleton-multiplier evolution: the exponent of t*sigma
    convolved with the tabulated initial kernel."""
    if t < 0:
        raise ValueError("evolution time must be nonnegative")
    e_t = tabulate(PointProduct(fscale(float(t), as_field(sigma))), g)
    return conv_fast(e_t, tabulate(k0, g))


def predual_apply(a: Kernel, G: Kernel, eta, integrator: LPIntegrator) -> IntegralEstimate:
    """Pre-dual image (A'G)(eta): integral of G(eta union xi) a(xi) over
    configurations xi of the integrator's window.

    The empty-set indicator multiplier acts as the identity; exponent pairs
    get the closed product formula; anything else is Monte Carlo.
    """
    eta_arr = eta.as_array() if isinstance(eta, GroundConfiguration) else config_array(eta)
    if isinstance(a, EmptyIndicator):
        return IntegralEstimate(G.value(eta_arr), 0.0, 0, exact=True)
    fa = exponent_form(a)
    fG = exponent_form(G)
    if fa is not None and fG is not None:
        space = integrator.space
        cross = box_integral(fprod(fG[1], fa[1], space.density), integrator.window)
        val = G.value(eta_arr) * fa[0] * exp(space.z * cross)
        return IntegralEstimate(val, 0.0, 0, exact=True)

    def shifted(pts):
        cfg = config_array(pts)
        merged = np.concatenate([eta_arr, cfg], axis=0) if len(cfg) else eta_arr
        return G.value(merged) * a.value(cfg)

    return integrator.integrate(CustomKernel(shifted))


# -- cumulant evolution -------------------------------------------------------

@dataclass(frozen=True)
class CumulantReport:
    """Gap between the series logarithm of the evolved state and the
    directly evolved logarithm, both under one midpoint scheme."""

    time: float
    steps: int
    deviation: float
    u_sup: float


def _midpoint_flow(apply_op, state: SetFunction, t: float, steps: int) -> SetFunction:
    h = t / steps
    for _ in range(steps):
        mid = state + apply_op(state) * (h / 2.0)
        state = state + apply_op(mid) * h
    return state


def cumulant_evolution_check(B, u0: SetFunction, t: float, steps: int = 1000) -> CumulantReport:
    """Integrate dk/dt = Bk from exp*(u0) and du/dt = Bu from u0 with the
    same explicit midpoint scheme, and compare ln* of the former with the
    latter."""
    from .calculus import conv_exp, conv_log

    if u0.values[0] != 0.0:
        raise NotInIdeal("cumulant evolution starts from a vanishing empty-set value")
    if steps < 1:
        raise ValueError("need at least one step")
    apply_op = B.apply if hasattr(B, "apply") else B
    k_t = _midpoint_flow(apply_op, conv_exp(u0), float(t), steps)
    u_t = _midpoint_flow(apply_op, u0, float(t), steps)
    gap = conv_log(k_t) - u_t
    return CumulantReport(float(t), steps, float(np.max(np.abs(gap.values))),
                          float(np.max(np.abs(u_t.values))))


# -- dual additivity ----------------------------------------------------------

def shift_kernel(G: Kernel, base) -> Kernel:
    """G(base union . ): freeze a configuration into a kernel's argument."""
    base_arr = config_array(base)

    def fn(pts):
        cfg = config_array(pts)
        merged = np.concatenate([base_arr, cfg], axis=0) if len(cfg) else base_arr
        return G.value(merged)

    return CustomKernel(fn)


def number_dual(G: Kernel) -> Kernel:
    """Cardinality multiplication on kernels, self-dual under the pairing."""
    return CustomKernel(lambda pts: len(config_array(pts)) * G.value(pts))


def squaring_map(G: Kernel) -> Kernel:
    """Pointwise squaring; not additive over disjoint unions (control case)."""
    return CustomKernel(lambda pts: G.value(pts) ** 2)


@dataclass(frozen=True)
class DualSumReport:
    """Per-pair residuals of the disjoint-union additivity identity."""

    residuals: tuple
    max_residual: float


def dual_sum_check(Bprime, G: Kernel, pairs) -> DualSumReport:
    """Check (B'G)(eta u xi) = (B'G(. u xi))(eta) + (B'G(. u eta))(xi)
    over disjoint configuration pairs."""
    residuals = []
    image = Bprime(G)
    for eta, xi in pairs:
        ea = config_array(eta.as_array() if isinstance(eta, GroundConfiguration) else eta)
        xa = config_array(xi.as_array() if isinstance(xi, GroundConfiguration) else xi)
        if {tuple(r) for r in ea} & {tuple(r) for r in xa}:
            raise OverlappingConfigurations("sampled pair shares a point")
        union = np.concatenate([ea, xa], axis=0)
        lhs = image.value(union)
        rhs = Bprime(shift_kernel(G, xa)).value(ea) + Bprime(shift_kernel(G, ea)).value(xa)
        residuals.append(abs(lhs - rhs))
    return DualSumReport(tuple(residuals), max(residuals) if residuals else 0.0)


# -- norm growth --------------------------------------------------------------

@dataclass(frozen=True)
class NormGrowthReport:
    """First time the estimated sup-ratio norm of the singleton evolution
    exceeds a bound (None if it never does on the scanned interval)."""

    t_star: float | None
    norm_at_t_star: float
    bound: float
    C_prime: float
    levels: int


def norm_growth_report(sigma, C0: float, C_prime: float, box, bound: float = 10.0,
                       t_max: float = 10.0, dt: float = 0.01, levels: int = 40) -> NormGrowthReport:
    """Scan t in [0, t_max] for the first time the evolved exponent of
    C0 + t*sigma leaves the C_prime ball of the given radius.

    The norm is estimated as the max over configuration sizes up to
    `levels` of (sup|C0 + t sigma| / C_prime)**n, the extremal level ratio.
    """
    if C_prime <= 0:
        raise ValueError("C_prime must be positive")
    sig = as_field(sigma)
    b = np.asarray(box, dtype=float)
    d = b.shape[0]
    per = max(2, int(round(4096 ** (1.0 / d))))
    axes = [np.linspace(b[i, 0], b[i, 1], per) for i in range(d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    svals = sig(grid)
    t = 0.0
    est = 0.0
    while t <= t_max + 1e-12:
        m = float(np.max(np.abs(C0 + t * svals)))
        ratio = m / C_prime
        est = max(ratio ** n for n in range(levels + 1))
        if est > bound:
            return NormGrowthReport(t, est, bound, C_prime, levels)
        t += dt
    return NormGrowthReport(None, est, bound, C_prime, levels)
