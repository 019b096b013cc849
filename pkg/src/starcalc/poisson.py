"""Integration over finite point configurations of a Poisson reference.

Three routes produce one estimate type: closed exponent formulas (exact),
truncated level sums (exact up to a reported tail), and Monte Carlo over
sampled configurations. The reference measure is unnormalized: its total
mass over a window W is exp(z * m(W)), so sampling-based estimators carry
that factor explicitly instead of folding it into a probability law.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, exp, factorial, sqrt

import numpy as np

from .errors import (
    GrowthViolation,
    IntegrationBudgetExceeded,
    NegativeDensity,
    NotInIdeal,
    ZeroMassWindow,
)
from .fields import Field, as_field, const_field, fprod, fsum
from .kernels import (
    CustomKernel,
    EmptyIndicator,
    Kernel,
    KernelProduct,
    KernelSum,
    LevelWeights,
    PointProduct,
    exponent_form,
)
from .model import PhasePoint, PhaseSpace
from .quadrature import box_integral
from .rng import philox_stream, seed_trace
from .transforms import conv_kernels


@dataclass(frozen=True)
class IntegralEstimate:
    """Value of an integral together with its error accounting.

    stderr is the Monte Carlo standard error (0 for deterministic routes);
    tail bounds the truncation remainder of a level sum. exact=True asserts
    both are zero; the converse is not forced, since a degenerate sample or
    an unbounded-support truncation can legitimately report stderr 0.
    """

    value: float
    stderr: float = 0.0
    samples: int = 0
    exact: bool = False
    tail: float = 0.0
    trace: str = ""

    def __post_init__(self):
        if self.exact and (self.stderr != 0.0 or self.tail != 0.0):
            raise ValueError("an exact estimate cannot carry stderr or tail")


@dataclass(eq=False)
class LPSample:
    """One sampled configuration: finitely many points inside a window."""

    points: tuple
    window: np.ndarray
    trace: str = ""

    def __len__(self):
        return len(self.points)


# -- sampling ---------------------------------------------------------------

def _density_cap(space: PhaseSpace, win: np.ndarray) -> float:
    d = space.dim
    per = max(2, int(round(4096 ** (1.0 / d))))
    axes = [np.linspace(win[i, 0], win[i, 1], per) for i in range(d)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    vals = space.density(mesh)
    if np.any(vals < 0):
        raise NegativeDensity("reference density is negative inside the window")
    top = float(vals.max())
    if top <= 0:
        raise ZeroMassWindow("density probe found no positive mass in the window")
    return 1.5 * top


def _draw_points(space: PhaseSpace, win: np.ndarray, total: int, rng) -> np.ndarray:
    d = space.dim
    if total == 0:
        return np.zeros((0, d))
    lo = win[:, 0]
    width = win[:, 1] - win[:, 0]
    spec = space.density.spec
    if spec is not None and spec.get("expr") == "const":
        return lo + rng.random((total, d)) * width
    cap = _density_cap(space, win)
    out = np.empty((total, d))
    got = 0
    while got < total:
        m = max(total - got, 1024)
        cand = lo + rng.random((m, d)) * width
        dens = space.density(cand)
        if np.any(dens < 0):
            raise NegativeDensity("reference density is negative inside the window")
        high = float(dens.max())
        if high > cap:
            cap = 1.5 * high  # tighter envelope; restart so acceptance stays unbiased
            got = 0
            continue
        acc = cand[rng.random(m) * cap < dens]
        take = min(len(acc), total - got)
        out[got: got + take] = acc[:take]
        got += take
    return out


def sample_pool(space: PhaseSpace, window=None, n_samples: int = 1,
                seed: int = 0, stream: int = 0):
    """Draw n_samples configurations, packed into one flat point pool.

    Returns (pool, counts, mass): pool stacks all points row-wise, counts[i]
    is the size of configuration i, mass is the window's reference mass.
    """
    win = space.window(window)
    mass = space.mass(win)
    if mass <= 0.0:
        raise ZeroMassWindow(f"window has reference mass {mass}")
    rng = philox_stream(seed, stream)
    counts = rng.poisson(space.z * mass, size=int(n_samples))
    pool = _draw_points(space, win, int(counts.sum()), rng)
    return pool, counts, mass


def sample_lp(space: PhaseSpace, window=None, seed: int = 0, stream: int = 0) -> LPSample:
    """Draw one configuration from the normalized Poisson law of the window."""
    pool, _, _ = sample_pool(space, window, 1, seed, stream)
    pts = tuple(PhasePoint(tuple(row)) for row in pool)
    return LPSample(points=pts, window=space.window(window),
                    trace=seed_trace(seed, stream))


def merge_pools(poolA, lensA, poolB, lensB):
    """Pairwise-concatenate two packed pools: segment i becomes A_i then B_i."""
    lensA = np.asarray(lensA, dtype=np.int64)
    lensB = np.asarray(lensB, dtype=np.int64)
    lens = lensA + lensB
    d = poolA.shape[1] if poolA.size else poolB.shape[1]
    out = np.empty((int(lens.sum()), d))
    starts = np.zeros(lens.size, dtype=np.int64)
    np.cumsum(lens[:-1], out=starts[1:])
    for pool, seg, offs in ((poolA, lensA, starts), (poolB, lensB, starts + lensA)):
        if pool.size:
            src = np.zeros(seg.size, dtype=np.int64)
            np.cumsum(seg[:-1], out=src[1:])
            tgt = np.arange(int(seg.sum())) - np.repeat(src, seg) + np.repeat(offs, seg)
            out[tgt] = pool
    return out, lens


# -- direct integration routes ----------------------------------------------

def _as_kernel(F) -> Kernel:
    return F if isinstance(F, Kernel) else CustomKernel(F)


def _profile_integral(f, space: PhaseSpace, window=None, tol: float = 1e-10) -> float:
    """Integral of f against the reference density over a window."""
    return box_integral(fprod(as_field(f), space.density), space.window(window), tol=tol)


def integrate_exponent(f, space: PhaseSpace, window=None) -> IntegralEstimate:
    """Exact integral of the point-product exponent of f."""
    val = exp(space.z * _profile_integral(f, space, window))
    return IntegralEstimate(val, 0.0, 0, exact=True)


def integrate_mc(F, space: PhaseSpace, window=None, n_samples: int = 10000,
                 seed: int = 0, stream: int = 0) -> IntegralEstimate:
    """Monte Carlo integral of a configuration function.

    Samples the normalized Poisson law and rescales by exp(z * m(W)).
    """
    if n_samples < 2:
        raise ValueError("need at least two samples for an error estimate")
    kern = _as_kernel(F)
    pool, counts, mass = sample_pool(space, window, n_samples, seed, stream)
    vals = kern.eval_batch(pool, counts)
    scale = exp(space.z * mass)
    mean = float(vals.mean())
    sd = float(vals.std(ddof=1)) / sqrt(n_samples)
    return IntegralEstimate(scale * mean, scale * sd, int(n_samples),
                            exact=False, trace=seed_trace(seed, stream))


class LPIntegrator:
    """Reusable integrator bound to one space, window and sample budget.

    Each integrate() call uses a fresh substream, so repeated calls are
    independent yet the whole object is reproducible from its seed.
    """

    def __init__(self, space: PhaseSpace, window=None, n_samples: int = 100000,
                 seed: int = 0, target_stderr: float | None = None):
        self.space = space
        self.window = space.window(window)
        self.n_samples = int(n_samples)
        self.seed = int(seed)
        self.target_stderr = target_stderr
        self._stream = 0

    def integrate(self, F) -> IntegralEstimate:
        est = integrate_mc(F, self.space, self.window, self.n_samples,
                           self.seed, stream=self._stream)
        self._stream += 1
        if self.target_stderr is not None and est.stderr > self.target_stderr:
            raise IntegrationBudgetExceeded(
                f"stderr {est.stderr:.3e} exceeds target {self.target_stderr:.3e} "
                f"at {self.n_samples} samples")
        return est


def lp_integral_truncated(F, space: PhaseSpace, window=None, max_level: int = 4,
                          tol: float = 1e-7) -> IntegralEstimate:
    """Level-by-level quadrature: sum of z^n/n! times the n-point integral.

    Exact when the integrand's support level is within max_level; otherwise
    the magnitude of the last included term is reported as the tail.
    """
    kern = _as_kernel(F)
    win = space.window(window)
    d = space.dim
    dens = space.density

    def level_term(n: int) -> float:
        if n == 0:
            return kern.value(np.zeros((0, d)))
        def fn(pts):
            m = pts.shape[0]
            cfg = pts.reshape(m, n, d)
            out = np.empty(m)
            for i in range(m):
                out[i] = kern.value(cfg[i])
            for j in range(n):
                out *= dens(cfg[:, j, :])
            return out
        big = np.concatenate([win] * n, axis=0)
        value = box_integral(Field(fn), big, tol=tol)
        return space.z ** n / factorial(n) * value

    support = kern.support_level()
    top = max_level if support is None else min(max_level, support)
    terms = [level_term(n) for n in range(top + 1)]
    total = float(np.sum(terms))
    if support is not None and support <= max_level:
        return IntegralEstimate(total, 0.0, 0, exact=True)
    tail = abs(terms[-1]) if terms else 0.0
    return IntegralEstimate(total, 0.0, 0, exact=False, tail=tail)


# -- pairing and Bogolyubov functionals ---------------------------------------

def bogolyubov(k: Kernel, f, space: PhaseSpace, window=None, method: str = "auto",
               n_max: int = 12, growth: float | None = None,
               n_samples: int = 100000, seed: int = 0) -> IntegralEstimate:
    """Pair a kernel with the exponent of f: sum_n z^n/n! <f^n, k at level n>.

    Routes: "exponent" (closed form, exact), "levels" (truncated level sum,
    exact when the support is finite, tail-bounded via the declared growth
    constant otherwise), "mc" (Monte Carlo), "auto" (best available).
    """
    f = as_field(f)
    if method == "auto":
        if isinstance(k, EmptyIndicator):
            return IntegralEstimate(1.0, 0.0, 0, exact=True)
        if isinstance(k, KernelSum):
            parts = [bogolyubov(t, f, space, window, "auto", n_max, growth,
                                n_samples, seed) for t in k.terms]
            return IntegralEstimate(
                float(sum(p.value for p in parts)),
                float(np.sqrt(sum(p.stderr ** 2 for p in parts))),
                max(p.samples for p in parts),
                all(p.exact for p in parts),
                float(sum(p.tail for p in parts)))
        if exponent_form(k) is not None:
            method = "exponent"
        elif k.level_factorization() is not None and (
                k.support_level() is not None or growth is not None):
            method = "levels"
        else:
            method = "mc"
    if method == "exponent":
        form = exponent_form(k)
        if form is None:
            raise TypeError("kernel is not a scaled point-product exponent")
        coeff, g = form
        val = coeff * exp(space.z * _profile_integral(fprod(f, g), space, window))
        return IntegralEstimate(val, 0.0, 0, exact=True)
    if method == "levels":
        fact = k.level_factorization()
        if fact is None:
            raise TypeError("kernel has no level factorization")
        support = k.support_level()
        top = n_max if support is None else min(n_max, support)
        w = fact.weights(top)
        x = space.z * _profile_integral(fprod(f, fact.field), space, window)
        terms = [w[n] * x ** n / factorial(n) for n in range(top + 1)]
        total = float(np.sum(terms))
        if support is not None and support <= n_max:
            return IntegralEstimate(total, 0.0, 0, exact=True)
        if growth is None:
            raise ValueError("unbounded support needs a growth constant for the tail")
        for n in range(1, top + 1):
            if abs(w[n]) > growth ** n * (1 + 1e-9):
                raise GrowthViolation(
                    f"level weight {w[n]!r} at level {n} exceeds growth**n = {growth ** n!r}")
        y = growth * abs(x)
        tail, term, n = 0.0, y ** (top + 1) / factorial(top + 1), top + 1
        while term > 1e-300 and n < top + 500:
            tail += term
            n += 1
            term *= y / n
        return IntegralEstimate(total, 0.0, 0, exact=False, tail=tail)
    if method == "mc":
        return integrate_mc(KernelProduct(PointProduct(f), k), space, window,
                            n_samples, seed)
    raise ValueError(f"unknown method {method!r}")


def lp_pairing(G: Kernel, k: Kernel, space: PhaseSpace, window=None,
               method: str = "auto", **kw) -> IntegralEstimate:
    """Integral of G * k against the reference measure."""
    return bogolyubov(KernelProduct(G, k), const_field(1.0), space, window,
                      method, **kw)


def bell_weights(w: np.ndarray) -> np.ndarray:
    """Level weights of the series exponential of a level-weighted kernel.

    W_0 = 1, W_n = sum_j binom(n-1, j-1) w_j W_{n-j}; requires w_0 = 0.
    """
    w = np.asarray(w, dtype=float)
    if w.size and w[0] != 0.0:
        raise NotInIdeal("series exponential needs a vanishing empty-set weight")
    n_top = w.size - 1
    W = np.zeros(n_top + 1)
    W[0] = 1.0
    for n in range(1, n_top + 1):
        W[n] = sum(comb(n - 1, j - 1) * w[j] * W[n - j] for j in range(1, n + 1))
    return W


@dataclass(frozen=True)
class PositivityReport:
    """Pairing of a series exponential against an exponent, with the
    closed-form prediction it must match."""

    functional: IntegralEstimate
    exponent_value: float
    expected: float
    rel_deviation: float
    positive: bool


def bogolyubov_positivity_check(u: Kernel, f, space: PhaseSpace, window=None,
                                n_max: int = 40, method: str = "levels",
                                n_samples: int = 100000, seed: int = 0) -> PositivityReport:
    """Check that pairing the series exponential of u with an exponent gives
    exp of the pairing of u itself, hence a positive value."""
    fact = u.level_factorization()
    if fact is None:
        raise TypeError("positivity check needs a level-factorizable kernel")
    f = as_field(f)
    w = fact.weights(n_max + 1)
    W = bell_weights(w)
    x = space.z * _profile_integral(fprod(f, fact.field), space, window)
    b_u = float(sum(w[n] * x ** n / factorial(n) for n in range(1, n_max + 2)))
    expected = exp(b_u)
    if method == "levels":
        total = float(sum(W[n] * x ** n / factorial(n) for n in range(n_max + 1)))
        tail = abs(W[n_max + 1] * x ** (n_max + 1) / factorial(n_max + 1))
        functional = IntegralEstimate(total, 0.0, 0, exact=False, tail=tail)
    elif method == "mc":
        kern = KernelProduct(LevelWeights(list(W[: n_max + 1])), PointProduct(fact.field))
        functional = integrate_mc(KernelProduct(PointProduct(f), kern), space,
                                  window, n_samples, seed)
    else:
        raise ValueError(f"unknown method {method!r}")
    rel = abs(functional.value - expected) / max(abs(expected), 1e-300)
    return PositivityReport(functional, b_u, expected, rel, functional.value > 0.0)


# -- distributional identities -----------------------------------------------

def _pair_engine(H: Kernel, G1: Kernel, G2: Kernel, space: PhaseSpace, window,
                 n_samples: int, seed: int, streams, count_collisions: bool = False):
    """MC estimate of the double integral of H(union) * G1 * G2 over
    independent configuration pairs."""
    poolA, lensA, mass = sample_pool(space, window, n_samples, seed, streams[0])
    poolB, lensB, _ = sample_pool(space, window, n_samples, seed, streams[1])
    merged, lens = merge_pools(poolA, lensA, poolB, lensB)
    vals = (H.eval_batch(merged, lens)
            * G1.eval_batch(poolA, lensA)
            * G2.eval_batch(poolB, lensB))
    scale = exp(2.0 * space.z * mass)
    mean = float(vals.mean())
    sd = float(vals.std(ddof=1)) / sqrt(n_samples)
    est = IntegralEstimate(scale * mean, scale * sd, int(n_samples), exact=False,
                           trace=f"{seed_trace(seed, streams[0])}+{seed_trace(seed, streams[1])}")
    hits = 0
    if count_collisions:
        pa = np.concatenate([[0], np.cumsum(lensA)])
        pb = np.concatenate([[0], np.cumsum(lensB)])
        for i in range(int(n_samples)):
            a = poolA[pa[i]: pa[i + 1]]
            b = poolB[pb[i]: pb[i + 1]]
            if len(a) and len(b):
                rows = {tuple(r) for r in a}
                if any(tuple(r) in rows for r in b):
                    hits += 1
    return est, hits


def _closed_identity_forms(H, G1, G2, space, window):
    """Closed values of both identity routes when all three kernels are
    exponents: the single integral pairs H against the fused exponent of
    g1 + g2, the pair route multiplies the two separate pairings. Returns
    (None, None) when some kernel has no exponent form."""
    forms = [exponent_form(k) for k in (H, G1, G2)]
    if any(f is None for f in forms):
        return None, None
    (ch, h), (c1, g1), (c2, g2) = forms
    coeff = ch * c1 * c2
    lhs = coeff * exp(space.z * _profile_integral(fprod(h, fsum(g1, g2)), space, window))
    rhs = coeff * (exp(space.z * _profile_integral(fprod(h, g1), space, window))
                   * exp(space.z * _profile_integral(fprod(h, g2), space, window)))
    return lhs, rhs


@dataclass(frozen=True)
class PairingIdentityReport:
    """Two independent estimates of one pairing identity and their gap."""

    lhs: IntegralEstimate
    rhs: IntegralEstimate
    residual: float
    sigma: float
    within_tol: bool
    disjoint_violations: int = 0
    closed_lhs: float | None = None
    closed_rhs: float | None = None


def minlos_check(H: Kernel, G1: Kernel, G2: Kernel, space: PhaseSpace, window=None,
                 n_samples: int = 20000, seed: int = 0, sigmas: float = 3.0) -> PairingIdentityReport:
    """Single-configuration integral of H * (G1 conv G2) versus the double
    integral of H over merged independent pairs."""
    lhs = integrate_mc(KernelProduct(H, conv_kernels(G1, G2)), space, window,
                       n_samples, seed, stream=1)
    rhs, _ = _pair_engine(H, G1, G2, space, window, n_samples, seed, (2, 3))
    residual = abs(lhs.value - rhs.value)
    sigma = sqrt(lhs.stderr ** 2 + rhs.stderr ** 2)
    closed_l, closed_r = _closed_identity_forms(H, G1, G2, space, window)
    return PairingIdentityReport(lhs, rhs, residual, sigma,
                                 residual <= sigmas * sigma + 1e-12,
                                 0, closed_l, closed_r)


def measure_convolution_check(k1: Kernel, k2: Kernel, G: Kernel, space: PhaseSpace,
                              window=None, n_samples: int = 20000, seed: int = 0,
                              sigmas: float = 3.0) -> PairingIdentityReport:
    """Pairing of G with k1 conv k2 versus the pair integral of G(union).

    k1 and k2 play measure densities, so sampled values must be nonnegative;
    sampled pairs are checked for shared points (violations expected zero).
    """
    poolcheck, counts, _ = sample_pool(space, window, min(n_samples, 2048), seed, stream=7)
    for k in (k1, k2):
        if np.any(k.eval_batch(poolcheck, counts) < 0):
            raise NegativeDensity("convolution factor is negative on sampled configurations")
    lhs = integrate_mc(KernelProduct(G, conv_kernels(k1, k2)), space, window,
                       n_samples, seed, stream=1)
    rhs, hits = _pair_engine(G, k1, k2, space, window, n_samples, seed, (2, 3),
                             count_collisions=True)
    residual = abs(lhs.value - rhs.value)
    sigma = sqrt(lhs.stderr ** 2 + rhs.stderr ** 2)
    closed_l, closed_r = _closed_identity_forms(G, k1, k2, space, window)
    return PairingIdentityReport(lhs, rhs, residual, sigma,
                                 residual <= sigmas * sigma + 1e-12,
                                 hits, closed_l, closed_r)
