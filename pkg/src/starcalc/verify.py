"""Named self-checks covering every documented invariant of the package.

Each check is registered with a stable name and an area tag, draws its
randomness from a Philox stream derived from (seed, check name), and
returns a pass flag plus a one-line detail. run_all() executes the whole
registry; the CLI's verify-all subcommand is a thin wrapper around it.

The helpers at the top (random grounds, set functions, spaces) are shared
with the test suite so both exercise identical input distributions.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from math import exp, factorial, isclose
from zlib import crc32

import numpy as np

from .calculus import (
    CustomOperator,
    NumberDerivation,
    PointDerivation,
    check_derivation,
    conv_exp,
    conv_inverse,
    conv_log,
    conv_series,
)
from .errors import GrowthViolation
from .evolution import (
    dual_sum_check,
    evolve,
    evolve_singleton,
    mult_operator,
    number_dual,
    operator_norm_bound,
    predual_apply,
    resolvent,
    squaring_map,
)
from .fields import as_field, const_field, coord_field, fprod, fscale, fsum
from .kernels import (
    ConstantLevel,
    EmptyIndicator,
    Kernel,
    KernelProduct,
    KernelSum,
    LevelWeights,
    NormWitness,
    PointProduct,
    ScaledKernel,
    SingletonKernel,
    eval_kernel,
    tabulate,
)
from .model import GroundConfiguration, PhaseSpace, SetFunction, popcounts
from .norms import NormParams, k_norm_estimate, l_norm, power_norm_check, young_check
from .poisson import (
    LPIntegrator,
    bogolyubov,
    bogolyubov_positivity_check,
    integrate_exponent,
    integrate_mc,
    measure_convolution_check,
    minlos_check,
)
from .posdef import (
    LiftedKernel,
    ProductTwoType,
    critposdef_check,
    default_basis,
    gram_star,
    gram_two_type,
)
from .rng import philox_stream
from .transforms import (
    conv_fast,
    conv_kernels,
    conv_naive,
    cover_fast,
    cover_naive,
    lift_two_type,
    mobius,
    two_type_cover,
    zeta,
)

WORDING_PASS = "no violation found"
WORDING_FAIL = "violation found"


# -- shared random generators -------------------------------------------------

def random_ground(rng, n: int, dim: int = 1) -> GroundConfiguration:
    return GroundConfiguration(rng.random((n, dim)))


def random_setfunction(rng, ground: GroundConfiguration,
                       integer: bool = False) -> SetFunction:
    size = 1 << ground.size
    if integer:
        return SetFunction(ground, rng.integers(-8, 9, size=size).astype(float))
    return SetFunction(ground, rng.standard_normal(size))


def random_ideal(rng, ground: GroundConfiguration, scale: float = 1.0) -> SetFunction:
    u = random_setfunction(rng, ground) * scale
    u.values[0] = 0.0
    return u


def random_normalized(rng, ground: GroundConfiguration,
                      scale: float = 1.0) -> SetFunction:
    k = random_setfunction(rng, ground) * scale
    k.values[0] = 1.0
    return k


def random_poly_field(rng, nonneg: bool = False):
    """Degree-2 polynomial of the first coordinate with bounded coefficients."""
    a, b, c = rng.uniform(-1.0, 1.0, size=3)
    if nonneg:
        a, b, c = abs(a) + 0.1, 0.0, abs(c)
    x = coord_field(0)
    return fsum(const_field(a), fscale(b, x), fscale(c, fprod(x, x)))


def unit_space(z: float = 1.5) -> PhaseSpace:
    return PhaseSpace(1, [[0.0, 1.0]], z=z, density=const_field(1.0))


def rel_gap(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(1.0, float(np.max(np.abs(b))) if b.size else 0.0)
    diff = float(np.max(np.abs(a - b))) if a.size else 0.0
    return diff / scale


# -- registry -----------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    area: str
    passed: bool
    detail: str


CHECKS: list = []


def register(name: str, area: str):
    def deco(fn):
        CHECKS.append((name, area, fn))
        return fn

    return deco


class VerifyContext:
    """Knobs for one verification run; every check derives its own stream."""

    def __init__(self, seed: int = 0, n: int = 10, trials: int = 20,
                 samples: int = 20000):
        self.seed = int(seed)
        self.n = int(n)
        self.trials = int(trials)
        self.samples = int(samples)

    def rng(self, tag: str):
        return philox_stream(self.seed, stream=crc32(tag.encode()))


def run_all(ctx: VerifyContext | None = None, areas=None) -> list:
    ctx = ctx or VerifyContext()
    results = []
    for name, area, fn in CHECKS:
        if areas and area not in areas:
            continue
        try:
            passed, detail = fn(ctx)
        except Exception as e:  # a crash is a failed check, not a crashed suite
            passed, detail = False, f"raised {type(e).__name__}: {e}"
        results.append(CheckResult(name, area, bool(passed), str(detail)))
    return results


# -- model --------------------------------------------------------------------

def _sample_kernels(rng) -> list:
    f = random_poly_field(rng)
    g = random_poly_field(rng)
    return [
        EmptyIndicator(),
        ConstantLevel(rng.uniform(0.5, 1.5)),
        PointProduct(f),
        SingletonKernel(g),
        LevelWeights(list(rng.uniform(-1, 1, size=4))),
        NormWitness(rng.uniform(1.1, 2.0), rng.uniform(0.0, 1.0)),
        ScaledKernel(rng.uniform(-2, 2), PointProduct(g)),
        KernelSum(PointProduct(f), SingletonKernel(g)),
        KernelProduct(ConstantLevel(1.2), PointProduct(f)),
    ]


@register("kernel-permutation-invariance", "model")
def _chk_perm(ctx):
    rng = ctx.rng("kernel-permutation-invariance")
    worst = 0.0
    for _ in range(ctx.trials):
        m = int(rng.integers(0, 7))
        pts = rng.random((m, 2))
        perm = rng.permutation(m)
        for k in _sample_kernels(rng):
            a, b = eval_kernel(k, pts), eval_kernel(k, pts[perm])
            if a != b:
                return False, f"{type(k).__name__} changed under permutation: {a} vs {b}"
            worst = max(worst, abs(a - b))
    return True, "all kernel families exactly permutation-invariant"


@register("unit-tabulation", "model")
def _chk_unit_tab(ctx):
    rng = ctx.rng("unit-tabulation")
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(0, 9)))
        t = tabulate(EmptyIndicator(), g)
        expect = np.zeros(1 << g.size)
        expect[0] = 1.0
        if not np.array_equal(t.values, expect):
            return False, f"unit tabulation wrong on ground of size {g.size}"
    return True, "unit tabulates to the empty-set indicator exactly"


@register("tabulate-combinators", "model")
def _chk_tab_comb(ctx):
    rng = ctx.rng("tabulate-combinators")
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(0, 7)))
        ks = _sample_kernels(rng)
        k1, k2 = ks[2], ks[4]
        c = float(rng.uniform(-2, 2))
        if not np.array_equal(tabulate(KernelSum(k1, k2), g).values,
                              (tabulate(k1, g) + tabulate(k2, g)).values):
            return False, "sum tabulation is not elementwise"
        if not np.array_equal(tabulate(ScaledKernel(c, k1), g).values,
                              (c * tabulate(k1, g)).values):
            return False, "scale tabulation is not elementwise"
    return True, "sum and scale tabulate elementwise exactly"


# -- transforms ---------------------------------------------------------------

@register("conv-fast-vs-naive", "transforms")
def _chk_conv_routes(ctx):
    rng = ctx.rng("conv-fast-vs-naive")
    worst = 0.0
    for n in range(0, 13):
        g = random_ground(rng, n)
        for _ in range(max(2, ctx.trials // 4)):
            k1, k2 = random_setfunction(rng, g), random_setfunction(rng, g)
            worst = max(worst, rel_gap(conv_fast(k1, k2, cutoff=0).values,
                                       conv_naive(k1, k2).values))
    return worst <= 1e-9, f"max relative gap {worst:.3e} over n in 0..12"


@register("cover-fast-vs-naive", "transforms")
def _chk_cover_routes(ctx):
    rng = ctx.rng("cover-fast-vs-naive")
    worst = 0.0
    for n in range(0, 13):
        g = random_ground(rng, n)
        for _ in range(max(2, ctx.trials // 4)):
            k1, k2 = random_setfunction(rng, g), random_setfunction(rng, g)
            worst = max(worst, rel_gap(cover_fast(k1, k2).values,
                                       cover_naive(k1, k2).values))
    return worst <= 1e-9, f"max relative gap {worst:.3e} over n in 0..12"


@register("conv-commutative-associative", "transforms")
def _chk_conv_alg(ctx):
    rng = ctx.rng("conv-commutative-associative")
    worst = 0.0
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(0, min(ctx.n, 10) + 1)))
        k1, k2, k3 = (random_setfunction(rng, g) for _ in range(3))
        worst = max(worst, rel_gap(conv_fast(k1, k2).values, conv_fast(k2, k1).values))
        worst = max(worst, rel_gap(conv_fast(conv_fast(k1, k2), k3).values,
                                   conv_fast(k1, conv_fast(k2, k3)).values))
    return worst <= 1e-10, f"max relative gap {worst:.3e}"


@register("empty-level-multiplicative", "transforms")
def _chk_empty_mult(ctx):
    rng = ctx.rng("empty-level-multiplicative")
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(0, 10)))
        k1, k2 = random_setfunction(rng, g), random_setfunction(rng, g)
        prod = conv_fast(k1, k2).values[0]
        if prod != k1.values[0] * k2.values[0]:
            return False, f"empty-set value {prod} is not the product of factors"
    return True, "value at the empty set is exactly multiplicative"


@register("zeta-mobius-inverse", "transforms")
def _chk_zeta_mob(ctx):
    rng = ctx.rng("zeta-mobius-inverse")
    for n in (0, 3, 8, 14):
        g = random_ground(rng, n)
        k = random_setfunction(rng, g, integer=True)
        if not np.array_equal(mobius(zeta(k)).values, k.values):
            return False, f"mobius(zeta) not exact on integer inputs at n={n}"
        if not np.array_equal(zeta(mobius(k)).values, k.values):
            return False, f"zeta(mobius) not exact on integer inputs at n={n}"
        kf = random_setfunction(rng, g)
        if rel_gap(mobius(zeta(kf)).values, kf.values) > 1e-12:
            return False, f"roundtrip beyond float rounding at n={n}"
    return True, "exact on integer inputs up to n=14; float roundtrip within 1e-12"


@register("cover-dominates-conv", "transforms")
def _chk_cover_dominates(ctx):
    rng = ctx.rng("cover-dominates-conv")
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(0, 10)))
        k1 = random_setfunction(rng, g)
        k2 = random_setfunction(rng, g)
        k1.values[:] = np.abs(k1.values)
        k2.values[:] = np.abs(k2.values)
        cov = cover_naive(k1, k2).values
        con = conv_naive(k1, k2).values
        slack = 1e-9 * np.maximum(1.0, np.abs(cov))
        if np.any(cov + slack < con):
            return False, "cover product fell below the convolution"
    return True, "cover sum dominates the disjoint sum for nonnegative inputs"


@register("lift-intertwines-products", "transforms")
def _chk_lift(ctx):
    rng = ctx.rng("lift-intertwines-products")
    worst = 0.0
    for _ in range(ctx.trials):
        n = int(rng.integers(1, 9))
        g = random_ground(rng, n)
        G1, G2 = random_setfunction(rng, g), random_setfunction(rng, g)
        plus = [i for i in range(n) if rng.random() < 0.5]
        lifted = two_type_cover(lift_two_type(G1, plus), lift_two_type(G2, plus))
        direct = lift_two_type(cover_fast(G1, G2), plus)
        worst = max(worst, rel_gap(lifted.values, direct.values))
    return worst <= 1e-10, f"max relative gap {worst:.3e}"


# -- calculus -----------------------------------------------------------------

@register("exponent-additivity", "calculus")
def _chk_exp_add(ctx):
    rng = ctx.rng("exponent-additivity")
    worst = 0.0
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(0, min(ctx.n, 10) + 1)))
        # sup-norm near one keeps level products from swamping the sums
        f1 = fscale(1 / 3, random_poly_field(rng))
        f2 = fscale(1 / 3, random_poly_field(rng))
        lhs = conv_fast(tabulate(PointProduct(f1), g), tabulate(PointProduct(f2), g))
        rhs = tabulate(PointProduct(fsum(f1, f2)), g)
        worst = max(worst, rel_gap(lhs.values, rhs.values))
    return worst <= 1e-12, f"max relative gap {worst:.3e}"


@register("exp-ln-roundtrip", "calculus")
def _chk_exp_ln(ctx):
    rng = ctx.rng("exp-ln-roundtrip")
    worst = 0.0
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(0, min(ctx.n, 12) + 1)))
        # the log series loses digits when intermediate powers dwarf the
        # result, so amplitudes stay in the well-conditioned regime
        u = random_ideal(rng, g, scale=0.3)
        worst = max(worst, rel_gap(conv_log(conv_exp(u)).values, u.values))
        k = random_normalized(rng, g, scale=0.3)
        worst = max(worst, rel_gap(conv_exp(conv_log(k)).values, k.values))
        unit = SetFunction.unit(g)
        worst = max(worst, rel_gap(conv_fast(k, conv_inverse(k)).values, unit.values))
    return worst <= 1e-10, f"max relative gap {worst:.3e}"


@register("ln-multiplicativity", "calculus")
def _chk_ln_mult(ctx):
    rng = ctx.rng("ln-multiplicativity")
    worst = 0.0
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(0, min(ctx.n, 10) + 1)))
        k1 = random_normalized(rng, g, scale=0.5)
        k2 = random_normalized(rng, g, scale=0.5)
        lhs = conv_log(conv_fast(k1, k2))
        rhs = conv_log(k1) + conv_log(k2)
        worst = max(worst, rel_gap(lhs.values, rhs.values))
        worst = max(worst, rel_gap(conv_log(conv_inverse(k1)).values,
                                   (-conv_log(k1)).values))
    return worst <= 1e-10, f"max relative gap {worst:.3e}"


@register("inverse-multiplicativity", "calculus")
def _chk_inv_mult(ctx):
    rng = ctx.rng("inverse-multiplicativity")
    worst = 0.0
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(0, min(ctx.n, 10) + 1)))
        k1 = random_normalized(rng, g, scale=0.5)
        k2 = random_normalized(rng, g, scale=0.5)
        lhs = conv_inverse(conv_fast(k1, k2))
        rhs = conv_fast(conv_inverse(k1), conv_inverse(k2))
        worst = max(worst, rel_gap(lhs.values, rhs.values))
    return worst <= 1e-10, f"max relative gap {worst:.3e}"


@register("derivation-chain-rules", "calculus")
def _chk_chain(ctx):
    rng = ctx.rng("derivation-chain-rules")
    worst = 0.0
    for _ in range(ctx.trials):
        n = int(rng.integers(1, min(ctx.n, 10) + 1))
        g = random_ground(rng, n)
        k1, k2 = random_setfunction(rng, g), random_setfunction(rng, g)
        for B in (PointDerivation(int(rng.integers(0, n))), NumberDerivation()):
            rep = check_derivation(B, k1, k2)
            if not rep.is_derivation:
                return False, f"{rep.operator} residual {rep.max_residual:.3e}"
            worst = max(worst, rep.max_residual)
        # exp chain rule: B exp*(u) = (B u) * exp*(u)
        u = random_ideal(rng, g)
        B = NumberDerivation()
        lhs = B.apply(conv_exp(u))
        rhs = conv_fast(B.apply(u), conv_exp(u))
        worst = max(worst, rel_gap(lhs.values, rhs.values))
    g = random_ground(ctx.rng("derivation-neg"), 4)
    k1 = random_setfunction(ctx.rng("derivation-neg-k1"), g)
    k2 = random_setfunction(ctx.rng("derivation-neg-k2"), g)
    sq = CustomOperator(lambda k: k.with_values(k.values ** 2), "squaring")
    neg = check_derivation(sq, k1, k2)
    if neg.max_residual <= 1e-3:
        return False, f"squaring control residual only {neg.max_residual:.3e}"
    return worst <= 1e-10, f"max residual {worst:.3e}; control residual {neg.max_residual:.2e}"


@register("series-exp-equivalence", "calculus")
def _chk_series_exp(ctx):
    rng = ctx.rng("series-exp-equivalence")
    worst = 0.0
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(0, min(ctx.n, 10) + 1)))
        u = random_ideal(rng, g)
        coeffs = [1.0 / factorial(j) for j in range(g.size + 1)]
        worst = max(worst, rel_gap(conv_series(coeffs, u).values, conv_exp(u).values))
    return worst <= 1e-13, f"max relative gap {worst:.3e} (float rounding only)"


# -- evolution ----------------------------------------------------------------

@register("evolution-ode-residual", "evolution")
def _chk_evolve_ode(ctx):
    rng = ctx.rng("evolution-ode-residual")
    worst = 0.0
    h = 1e-4
    for _ in range(max(3, ctx.trials // 3)):
        g = random_ground(rng, int(rng.integers(1, 7)))
        a = random_ideal(rng, g)
        k0 = random_setfunction(rng, g)
        t = float(rng.uniform(0.3, 1.0))
        mid = evolve(a, k0, t).solution
        fwd = evolve(a, k0, t + h).solution
        bwd = evolve(a, k0, t - h).solution
        deriv = (fwd - bwd) * (1.0 / (2 * h))
        worst = max(worst, float(np.max(np.abs((deriv - conv_fast(a, mid)).values))))
    return worst <= 1e-6, f"max finite-difference residual {worst:.3e} at h={h}"


@register("evolution-semigroup", "evolution")
def _chk_semigroup(ctx):
    rng = ctx.rng("evolution-semigroup")
    worst = 0.0
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(1, 7)))
        a = random_ideal(rng, g)
        k0 = random_setfunction(rng, g)
        s, t = rng.uniform(0.2, 0.8, size=2)
        two_step = evolve(a, evolve(a, k0, float(s)).solution, float(t)).solution
        one_step = evolve(a, k0, float(s + t)).solution
        worst = max(worst, rel_gap(two_step.values, one_step.values))
    return worst <= 1e-9, f"max relative gap {worst:.3e}"


@register("resolvent-identity", "evolution")
def _chk_resolvent(ctx):
    rng = ctx.rng("resolvent-identity")
    worst = 0.0
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(1, 7)))
        a = random_setfunction(rng, g)
        k = random_setfunction(rng, g)
        z = operator_norm_bound(a) + float(rng.uniform(0.5, 2.0))
        r = resolvent(a, k, z)
        residual = (r * z) - conv_fast(a, r) - k
        worst = max(worst, float(np.max(np.abs(residual.values))))
    return worst <= 1e-8, f"max identity residual {worst:.3e}"


@register("mult-operator-bitwise", "evolution")
def _chk_mult_bitwise(ctx):
    rng = ctx.rng("mult-operator-bitwise")
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(0, 11)))
        k = random_setfunction(rng, g)
        ones = SetFunction(g, np.ones(1 << g.size))
        alt = SetFunction(g, (-1.0) ** popcounts(g.size))
        if not np.array_equal(mult_operator(ones, k).values, zeta(k).values):
            return False, "constant-one multiplier differs from zeta"
        if not np.array_equal(mult_operator(alt, k).values, mobius(k).values):
            return False, "alternating multiplier differs from mobius"
    return True, "multiplier images match zeta / mobius bit for bit"


@register("singleton-evolution-closed-form", "evolution")
def _chk_singleton(ctx):
    rng = ctx.rng("singleton-evolution-closed-form")
    worst = 0.0
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(1, 7)))
        sigma = random_poly_field(rng)
        C0 = float(rng.uniform(0.5, 1.5))
        t = float(rng.uniform(0.0, 2.0))
        k0 = PointProduct(const_field(C0))
        got = evolve_singleton(sigma, k0, t, g)
        expect = tabulate(PointProduct(fsum(const_field(C0), fscale(t, sigma))), g)
        worst = max(worst, rel_gap(got.values, expect.values))
        a = tabulate(SingletonKernel(sigma), g)
        series = evolve(a, tabulate(k0, g), t).solution
        worst = max(worst, rel_gap(got.values, series.values))
    return worst <= 1e-12, f"max relative gap {worst:.3e}"


@register("cumulant-evolution-gap", "evolution")
def _chk_cumulant(ctx):
    from .evolution import cumulant_evolution_check

    rng = ctx.rng("cumulant-evolution-gap")
    worst = 0.0
    # linear order cancels identically; the residual is the second-order
    # interaction amplified by e^{nt} 2^n, so the seed amplitude sets it
    for size in (8, int(rng.integers(2, 8))):
        g = random_ground(rng, size)
        u0 = random_ideal(rng, g, scale=3e-4)
        rep = cumulant_evolution_check(NumberDerivation(), u0, t=1.0, steps=1000)
        worst = max(worst, rep.deviation)
    return worst <= 1e-6, f"max cumulant deviation {worst:.3e} at step 1e-3"


@register("dual-additivity", "evolution")
def _chk_dual_add(ctx):
    rng = ctx.rng("dual-additivity")
    G = PointProduct(random_poly_field(rng))
    pairs = [(rng.random((int(rng.integers(0, 3)), 1)), rng.random((int(rng.integers(1, 3)), 1)))
             for _ in range(8)]
    good = dual_sum_check(number_dual, G, pairs)
    if good.max_residual > 1e-10:
        return False, f"cardinality dual residual {good.max_residual:.3e}"
    bad = dual_sum_check(squaring_map, G, pairs)
    if bad.max_residual <= 1e-3:
        return False, f"squaring control residual only {bad.max_residual:.3e}"
    return True, (f"additive dual residual {good.max_residual:.2e}; "
                  f"control residual {bad.max_residual:.2e}")


@register("predual-closed-vs-mc", "evolution")
def _chk_predual(ctx):
    rng = ctx.rng("predual-closed-vs-mc")
    space = unit_space(z=1.2)
    a = PointProduct(random_poly_field(rng, nonneg=True))
    G = PointProduct(random_poly_field(rng, nonneg=True))
    eta = rng.random((2, 1))
    closed = predual_apply(a, G, eta, LPIntegrator(space, seed=ctx.seed))
    mc = predual_apply(a, KernelProduct(G, ConstantLevel(1.0)), eta,
                       LPIntegrator(space, n_samples=ctx.samples, seed=ctx.seed))
    gap = abs(closed.value - mc.value)
    ok = closed.exact and gap <= 3.0 * mc.stderr + 1e-12
    return ok, f"closed {closed.value:.6g} vs MC {mc.value:.6g} (3 sigma = {3 * mc.stderr:.2e})"


# -- poisson ------------------------------------------------------------------

@register("mc-vs-exponent", "poisson")
def _chk_mc_exponent(ctx):
    rng = ctx.rng("mc-vs-exponent")
    worst_sig = 0.0
    for i in range(5):
        z = float(rng.uniform(0.5, 3.5))
        space = unit_space(z=z)  # z * mass <= 4 on the unit window
        f = random_poly_field(rng, nonneg=True)
        exact = integrate_exponent(f, space)
        mc = integrate_mc(PointProduct(f), space, n_samples=ctx.samples,
                          seed=ctx.seed, stream=50 + i)
        sig = abs(mc.value - exact.value) / max(mc.stderr, 1e-300)
        worst_sig = max(worst_sig, sig)
        if sig > 3.0:
            return False, f"MC missed the closed form by {sig:.2f} sigma"
    return True, f"worst deviation {worst_sig:.2f} sigma over 5 exponent kernels"


@register("pair-disjointness", "poisson")
def _chk_disjoint(ctx):
    rng = ctx.rng("pair-disjointness")
    space = unit_space(z=1.5)
    k1 = PointProduct(random_poly_field(rng, nonneg=True))
    k2 = PointProduct(random_poly_field(rng, nonneg=True))
    G = ConstantLevel(0.8)
    rep = measure_convolution_check(k1, k2, G, space, n_samples=min(ctx.samples, 4000),
                                    seed=ctx.seed)
    ok = rep.disjoint_violations == 0
    return ok, f"{rep.disjoint_violations} shared points across sampled pairs"


@register("mc-reproducibility", "poisson")
def _chk_repro(ctx):
    space = unit_space(z=1.0)
    k = PointProduct(const_field(1.3))
    a = integrate_mc(k, space, n_samples=2000, seed=ctx.seed, stream=5)
    b = integrate_mc(k, space, n_samples=2000, seed=ctx.seed, stream=5)
    c = integrate_mc(k, space, n_samples=2000, seed=ctx.seed, stream=6)
    if not (a.value == b.value and a.stderr == b.stderr):
        return False, "same (seed, stream) produced different estimates"
    if a.value == c.value:
        return False, "different streams produced identical estimates"
    return True, "bit-identical on replay; distinct across streams"


@register("mc-thread-invariance", "poisson")
def _chk_threads(ctx):
    space = unit_space(z=1.0)
    k = PointProduct(const_field(1.2))
    basis = default_basis(space, cells=2)
    old = os.environ.get("STARCALC_THREADS")
    try:
        os.environ["STARCALC_THREADS"] = "1"
        one = gram_star(k, basis, space, method="mc", n_samples=1000, seed=ctx.seed)
        os.environ["STARCALC_THREADS"] = "4"
        four = gram_star(k, basis, space, method="mc", n_samples=1000, seed=ctx.seed)
    finally:
        if old is None:
            os.environ.pop("STARCALC_THREADS", None)
        else:
            os.environ["STARCALC_THREADS"] = old
    ok = np.array_equal(one.matrix, four.matrix)
    return ok, "per-entry streams make thread count irrelevant" if ok else \
        "thread count changed the matrix"


@register("bogolyubov-multiplicativity", "poisson")
def _chk_bog_mult(ctx):
    rng = ctx.rng("bogolyubov-multiplicativity")
    space = unit_space(z=1.4)
    worst = 0.0
    for _ in range(ctx.trials // 2):
        f = random_poly_field(rng)
        k1 = PointProduct(random_poly_field(rng))
        k2 = PointProduct(random_poly_field(rng))
        lhs = bogolyubov(conv_kernels(k1, k2), f, space).value
        rhs = bogolyubov(k1, f, space).value * bogolyubov(k2, f, space).value
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1.0))
    return worst <= 1e-10, f"max relative gap {worst:.3e} on exponent kernels"


@register("bogolyubov-exp-positivity", "poisson")
def _chk_bog_pos(ctx):
    rng = ctx.rng("bogolyubov-exp-positivity")
    space = unit_space(z=1.2)
    worst = 0.0
    for _ in range(3):
        w = [0.0] + list(rng.uniform(-0.6, 0.6, size=3))
        u = LevelWeights(w)
        f = random_poly_field(rng, nonneg=True)
        rep = bogolyubov_positivity_check(u, f, space, n_max=40)
        if not rep.positive:
            return False, "series exponential pairing came out nonpositive"
        worst = max(worst, rep.rel_deviation)
    return worst <= 1e-8, f"max relative deviation from exp(B_u) is {worst:.3e}"


@register("minlos-identity", "poisson")
def _chk_minlos(ctx):
    rng = ctx.rng("minlos-identity")
    space = unit_space(z=1.2)
    H = PointProduct(random_poly_field(rng, nonneg=True))
    G1 = PointProduct(random_poly_field(rng, nonneg=True))
    G2 = PointProduct(random_poly_field(rng, nonneg=True))
    rep = minlos_check(H, G1, G2, space, n_samples=min(ctx.samples, 20000), seed=ctx.seed)
    if rep.closed_lhs is None:
        return False, "closed form unavailable for exponent inputs"
    closed_gap = abs(rep.closed_lhs - rep.closed_rhs)
    if closed_gap > 1e-10 * max(1.0, abs(rep.closed_lhs)):
        return False, f"closed forms disagree by {closed_gap:.3e}"
    ok = rep.within_tol
    return ok, (f"MC residual {rep.residual:.3e} vs 3 sigma = {3 * rep.sigma:.3e}; "
                f"closed value {rep.closed_lhs:.6g}")


@register("measure-convolution-identity", "poisson")
def _chk_measure_conv(ctx):
    rng = ctx.rng("measure-convolution-identity")
    space = unit_space(z=1.3)
    k1 = PointProduct(random_poly_field(rng, nonneg=True))
    k2 = PointProduct(random_poly_field(rng, nonneg=True))
    G = PointProduct(random_poly_field(rng, nonneg=True))
    rep = measure_convolution_check(k1, k2, G, space,
                                    n_samples=min(ctx.samples, 20000), seed=ctx.seed)
    ok = rep.within_tol and rep.disjoint_violations == 0
    return ok, (f"residual {rep.residual:.3e} vs 3 sigma = {3 * rep.sigma:.3e}; "
                f"{rep.disjoint_violations} collisions")


# -- norms --------------------------------------------------------------------

@register("young-bounds", "norms")
def _chk_young(ctx):
    cases = [
        ("Y1", dict(C1=1.5, delta1=0.0, C2=2.0, delta2=0.7)),
        ("Y1", dict(C1=1.2, delta1=0.5, C2=1.7, delta2=0.5)),
        ("Y2", dict(C1=1.5, delta1=1.0, C2=2.5, delta2=0.4)),
        ("Y3", dict(C1=1.8, delta1=1.0, C2=1.8, delta2=0.6, C_prime=2.6)),
        ("Y4", dict(C1=1.6, delta1=1.0)),
        ("Y5", dict(C1=2.4, delta1=0.0)),
    ]
    worst = 0.0
    for variant, kw in cases:
        rep = young_check(variant, n_max=30, **kw)
        if not rep.satisfied:
            return False, f"variant {variant} ratio {rep.max_ratio:.6g} above {rep.rhs_bound:.6g}"
        worst = max(worst, rep.max_ratio / rep.rhs_bound)
    eq = young_check("Y1", C1=1.5, delta1=0.0, C2=2.0, delta2=0.0, n_max=30)
    ratios = np.asarray(eq.lhs_per_level) / eq.rhs_bound
    if not np.all(np.abs(ratios - 1.0) <= 1e-12):
        return False, "delta=0 witnesses do not attain equality at every level"
    for kw in (dict(C=1.5, delta=0.5, n_power=3),
               dict(C=1.5, delta=1.0, n_power=3, C_prime=2.5),
               dict(C=2.0, delta=0.0, n_power=2, bounded=True)):
        rep = power_norm_check(**kw)
        if not rep.satisfied:
            return False, f"power bound failed for {kw}"
    return True, f"all variants within bounds; worst normalized ratio {worst:.12f}"


@register("norm-monotonicity", "norms")
def _chk_norm_mono(ctx):
    rng = ctx.rng("norm-monotonicity")
    for _ in range(ctx.trials):
        g = random_ground(rng, int(rng.integers(0, 9)))
        k = random_setfunction(rng, g)
        C, dC = float(rng.uniform(1.1, 2.0)), float(rng.uniform(0.0, 1.0))
        C2, d2 = C + float(rng.uniform(0.0, 1.0)), dC + float(rng.uniform(0.0, 0.5))
        lo = k_norm_estimate(k, NormParams(C2, d2))
        hi = k_norm_estimate(k, NormParams(C, dC))
        if lo > hi * (1 + 1e-12):
            return False, f"norm grew from ({C},{dC}) to ({C2},{d2})"
    return True, "larger spaces never increase the sup ratio"


@register("k-norm-lower-bound", "norms")
def _chk_knorm_lb(ctx):
    rng = ctx.rng("k-norm-lower-bound")
    for _ in range(ctx.trials):
        g = random_ground(rng, 8)
        k = random_setfunction(rng, g)
        p = NormParams(1.5, 0.3)
        prev = 0.0
        for lvl in range(0, 9, 2):
            cur = k_norm_estimate(k, p, max_level=lvl)
            if cur + 1e-15 < prev:
                return False, f"estimate decreased when raising max_level to {lvl}"
            prev = cur
        kern = NormWitness(1.3, 0.2)
        probes = [rng.random((m, 1)) for m in (1, 2, 3)]
        e1 = k_norm_estimate(kern, p, probes=probes[:1])
        e3 = k_norm_estimate(kern, p, probes=probes)
        if e3 + 1e-15 < e1:
            return False, "estimate decreased with more probe configurations"
    return True, "estimates are monotone lower bounds under more probes"


@register("l-norm-divergence-criterion", "norms")
def _chk_lnorm_div(ctx):
    space = unit_space(z=1.0)
    integ = LPIntegrator(space, seed=ctx.seed)
    finite = l_norm(PointProduct(const_field(0.8)), NormParams(1.0, 1.0),
                    max_level=30, integrator=integ)
    geo = 1.0 / (1.0 - 0.8)
    if not isclose(finite.value + finite.tail, geo, rel_tol=1e-6):
        return False, f"convergent series value {finite.value:.6g} misses {geo:.6g}"
    try:
        l_norm(PointProduct(const_field(1.1)), NormParams(1.0, 1.0),
               max_level=30, integrator=integ)
        return False, "divergent series was not flagged"
    except GrowthViolation:
        pass
    near = l_norm(PointProduct(const_field(0.8)), NormParams(1.0, 0.999),
                  max_level=30, integrator=integ)
    if not np.isfinite(near.value):
        return False, "series just below delta=1 should stay finite"
    return True, "finiteness matches the geometric-series criterion exactly"


# -- posdef -------------------------------------------------------------------

@register("gram-symmetry", "posdef")
def _chk_gram_sym(ctx):
    rng = ctx.rng("gram-symmetry")
    space = unit_space(z=1.2)
    g = random_poly_field(rng, nonneg=True)
    basis = default_basis(space, cells=2)
    closed = gram_star(PointProduct(g), basis, space)
    if closed.asymmetry != 0.0:
        return False, f"closed-form asymmetry {closed.asymmetry:.3e}"
    mc = gram_star(PointProduct(g), basis, space, method="mc",
                   n_samples=max(1000, ctx.samples // 10), seed=ctx.seed)
    s = mc.integration_stderr
    bound = float((3.0 * np.sqrt(s ** 2 + s.T ** 2)).max()) + 1e-12
    if np.max(np.abs(mc.matrix - mc.matrix.T)) != 0.0:
        return False, "reported MC matrix is not exactly symmetric"
    ok = mc.asymmetry <= bound
    return ok, f"MC asymmetry {mc.asymmetry:.3e} within {bound:.3e}"


@register("gram-poisson-psd", "posdef")
def _chk_gram_psd(ctx):
    rng = ctx.rng("gram-poisson-psd")
    space = unit_space(z=1.3)
    for _ in range(3):
        g = random_poly_field(rng, nonneg=True)
        basis = default_basis(space)
        rep = gram_star(PointProduct(g), basis, space)
        if not rep.psd or rep.verdict != WORDING_PASS:
            return False, f"closed route min eigenvalue {rep.min_eig:.3e}"
        if rep.min_eig < -1e-8:
            return False, f"eigenvalue {rep.min_eig:.3e} below -1e-8"
    mc = gram_star(PointProduct(const_field(0.9)), default_basis(space, cells=2),
                   space, method="mc", n_samples=max(1000, ctx.samples // 10),
                   seed=ctx.seed)
    if not mc.psd:
        return False, f"MC route min eigenvalue {mc.min_eig:.3e} below -{mc.tol:.3e}"
    return True, "Poisson correlation kernels pass on closed and MC routes"


@register("transfer-entrywise", "posdef")
def _chk_transfer_entries(ctx):
    rng = ctx.rng("transfer-entrywise")
    space = unit_space(z=1.1)
    k1 = PointProduct(random_poly_field(rng, nonneg=True))
    k2 = PointProduct(random_poly_field(rng, nonneg=True))
    basis = default_basis(space, cells=3)
    rep = critposdef_check(k1, k2, basis, space)
    if not rep.entries_match:
        return False, f"closed-route entry gap {rep.max_entry_gap:.3e}"
    mc = critposdef_check(k1, k2, default_basis(space, cells=2), space,
                          method="mc", n_samples=max(1000, ctx.samples // 10),
                          seed=ctx.seed)
    ok = mc.entries_match
    return ok, (f"closed gap {rep.max_entry_gap:.2e}; "
                f"MC gap {mc.max_entry_gap:.2e} within {mc.gap_tol:.2e}")


@register("transfer-implication", "posdef")
def _chk_transfer_impl(ctx):
    rng = ctx.rng("transfer-implication")
    space = unit_space(z=1.2)
    for run in range(5):
        k1 = PointProduct(random_poly_field(rng, nonneg=True))
        k2 = PointProduct(random_poly_field(rng, nonneg=True))
        cells = 2 + run % 3
        rep = critposdef_check(k1, k2, default_basis(space, cells=cells), space)
        if not rep.implication_ok:
            return False, f"run {run}: two-type positive but one-type not"
        for gr in (rep.two_type, rep.one_type):
            if gr.verdict not in (WORDING_PASS, WORDING_FAIL):
                return False, f"unexpected verdict wording {gr.verdict!r}"
    return True, "no run shows two-type positive with one-type negative"


@register("posdef-negative-control", "posdef")
def _chk_neg_control(ctx):
    space = unit_space(z=1.0)
    basis = default_basis(space, cells=2)
    for w1 in (-0.5, -1.0, -2.0, -4.0):
        k = LevelWeights([1.0, w1, 0.0])
        rep = gram_star(k, basis, space)
        if rep.min_eig < -10 * rep.tol:
            ok = (not rep.psd) and rep.verdict == WORDING_FAIL
            return ok, f"flagged at level-1 weight {w1} with min eig {rep.min_eig:.3e}"
    return False, "search found no negativity witness"


# -- runner -------------------------------------------------------------------

def summarize(results) -> dict:
    failed = [r for r in results if not r.passed]
    return {
        "total": len(results),
        "passed": len(results) - len(failed),
        "failed": [r.name for r in failed],
    }
