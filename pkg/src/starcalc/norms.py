"""Weighted sup norms over configuration levels, summable dual norms, and
closed-form verification of the convolution inequalities.

Sup norms of kind sup |k(eta)| / (C^|eta| (|eta|!)^delta) are uncomputable
in general, so certified statements are restricted to witness families
whose sup is attained at every level; everything else is reported as a
lower bound. Per-level sums are accumulated in the log domain, since the
factorial weights overflow long before the ratios do.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, exp, inf, lgamma, log

import numpy as np

from .errors import GrowthViolation, HypothesisViolated
from .fields import fabs, fprod
from .kernels import Kernel, config_array
from .model import SetFunction, popcounts
from .poisson import IntegralEstimate, LPIntegrator
from .quadrature import box_integral
from .rng import philox_stream


@dataclass(frozen=True)
class NormParams:
    """Weight parameters of one level-weighted sup norm."""

    C: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")

    def log_weight(self, n: int) -> float:
        return n * log(self.C) + self.delta * lgamma(n + 1.0)


def _lse(logs) -> float:
    logs = [x for x in logs if x != -inf]
    if not logs:
        return -inf
    top = max(logs)
    return top + log(sum(exp(x - top) for x in logs))


def k_norm_estimate(k, p: NormParams, max_level: int | None = None,
                    probes=None) -> float:
    """Largest normalized ratio |k(eta)| / weight(|eta|) over what can be
    inspected: the whole lattice for a tabulated function, the empty
    configuration plus explicit probes for a kernel. Always a lower bound
    of the sup norm, exact for witnesses whose ratio is level-constant.
    """
    if isinstance(k, SetFunction):
        pc = popcounts(k.n)
        keep = slice(None) if max_level is None else pc <= max_level
        vals = np.abs(k.values[keep])
        logw = np.array([p.log_weight(int(m)) for m in pc[keep]])
        return float(np.max(vals * np.exp(-logw))) if vals.size else 0.0
    best = abs(k.value(np.zeros((0, 1))))
    for cfg in probes or ():
        a = config_array(cfg)
        if max_level is not None and len(a) > max_level:
            continue
        best = max(best, abs(k.value(a)) * exp(-p.log_weight(len(a))))
    return float(best)


def l_norm(G: Kernel, p: NormParams, max_level: int = 20,
           integrator: LPIntegrator | None = None) -> IntegralEstimate:
    """Summable dual norm: sum over n of C^n/(n!)^(1-delta) times the
    n-point integral of |G|.

    Level-factorizable kernels get scalar closed terms (value truncated at
    max_level, remainder summed on as the tail); opaque kernels get a
    Monte Carlo estimate per level. Diverging level sums raise.
    """
    if integrator is None:
        raise ValueError("an integrator handle fixes the space and window")
    space = integrator.space
    win = integrator.window

    def log_term_factory():
        fact = G.level_factorization()
        support = G.support_level()
        if fact is not None:
            J = box_integral(fabs(fprod(fact.field, space.density)), win)
            w = fact.weights(8)

            def log_term(n: int) -> float:
                nonlocal w
                if support is not None and n > support:
                    return -inf
                if len(w) <= n:
                    w = fact.weights(2 * n)
                if w[n] == 0.0 or (J == 0.0 and n > 0):
                    return -inf
                return (n * log(p.C) - (1.0 - p.delta) * lgamma(n + 1.0)
                        + log(abs(w[n])) + n * log(J))

            return log_term, True
        rng_seed = integrator.seed

        def log_term(n: int) -> float:
            if support is not None and n > support:
                return -inf
            if n == 0:
                v = abs(G.value(np.zeros((0, space.dim))))
                return log(v) if v > 0 else -inf
            rng = philox_stream(rng_seed, 1000 + n)
            lo, wid = win[:, 0], win[:, 1] - win[:, 0]
            m = integrator.n_samples
            pts = lo + rng.random((m, n, space.dim)) * wid
            vals = np.empty(m)
            for i in range(m):
                vals[i] = abs(G.value(pts[i]))
            for j in range(n):
                vals *= space.density(pts[:, j, :])
            vol = float(np.prod(wid))
            mean = float(vals.mean()) * vol ** n
            if mean <= 0:
                return -inf
            return n * log(p.C) - (1.0 - p.delta) * lgamma(n + 1.0) + log(mean)

        return log_term, False

    log_term, scalar_route = log_term_factory()
    logs = [log_term(n) for n in range(max_level + 1)]
    value = float(exp(_lse(logs)))
    support = G.support_level()
    if support is not None and support <= max_level:
        return IntegralEstimate(value, 0.0, 0, exact=True)
    if not scalar_route:
        tail = float(exp(log_term(max_level + 1)))
        return IntegralEstimate(value, 0.0, integrator.n_samples, exact=False, tail=tail)
    tail_logs = []
    prev = logs[-1] if logs else -inf
    n = max_level + 1
    flat = 0
    while n < max_level + 2000:
        cur = log_term(n)
        if cur == -inf or (tail_logs and cur < log(1e-18) + max(_lse(logs), _lse(tail_logs))):
            break
        flat = flat + 1 if cur >= prev - 1e-12 else 0
        if flat >= 50 or cur > 700.0:
            raise GrowthViolation("level sums diverge before the truncation level")
        tail_logs.append(cur)
        prev = cur
        n += 1
    tail = float(exp(_lse(tail_logs))) if tail_logs else 0.0
    return IntegralEstimate(value, 0.0, 0, exact=False, tail=tail)


# -- Young-type inequalities ---------------------------------------------------

@dataclass(frozen=True)
class YoungReport:
    """Per-level normalized ratios of one convolution inequality against
    its closed-form bound."""

    variant: str
    lhs_per_level: tuple
    rhs_bound: float
    max_ratio: float

    @property
    def satisfied(self) -> bool:
        return self.max_ratio <= self.rhs_bound * (1.0 + 1e-12)


def _pair_ratio_levels(C1, d1, C2, d2, Ct, dt, n_max):
    """Exact per-level sup ratios of the convolution of the two extremal
    witnesses, normalized by the target weight. All terms positive, so the
    level value is a plain binomial sum, done in the log domain."""
    out = []
    lc1, lc2, lct = log(C1), log(C2), log(Ct)
    for n in range(n_max + 1):
        terms = [
            lgamma(n + 1.0) - lgamma(k + 1.0) - lgamma(n - k + 1.0)
            + k * lc1 + d1 * lgamma(k + 1.0)
            + (n - k) * lc2 + d2 * lgamma(n - k + 1.0)
            for k in range(n + 1)
        ]
        out.append(exp(_lse(terms) - n * lct - dt * lgamma(n + 1.0)))
    return tuple(out)


def young_check(variant: str, C1: float, delta1: float, C2: float | None = None,
                delta2: float | None = None, n_max: int = 30,
                C_prime: float | None = None) -> YoungReport:
    """Verify one convolution inequality on its extremal witnesses.

    Witnesses k_i(eta) = C_i^|eta| (|eta|!)^delta_i have unit norm, so the
    inequality reduces to max over levels of a closed ratio against the
    variant's constant. Bounded-function slots use the constant-one witness
    of unit sup norm.
    """
    v = variant.upper() if variant.lower().startswith("y") else variant
    if v == "Y1":
        if C2 is None or delta2 is None:
            raise HypothesisViolated("Y1 needs both factor spaces")
        dt = max(delta1, delta2)
        levels = _pair_ratio_levels(C1, delta1, C2, delta2, C1 + C2, dt, n_max)
        bound = 1.0
    elif v == "Y2":
        if C2 is None or delta2 is None:
            raise HypothesisViolated("Y2 needs both factor spaces")
        dt = max(delta1, delta2)
        if dt < 1.0:
            raise HypothesisViolated("Y2 requires the larger delta to be at least 1")
        if C1 == C2:
            raise HypothesisViolated("Y2 requires distinct level constants")
        cbar = max(C1, C2)
        levels = _pair_ratio_levels(C1, delta1, C2, delta2, cbar, dt, n_max)
        bound = cbar / abs(C1 - C2)
    elif v == "Y3":
        if C2 is None or delta2 is None:
            raise HypothesisViolated("Y3 needs both factor spaces")
        dt = max(delta1, delta2)
        if dt < 1.0:
            raise HypothesisViolated("Y3 requires the larger delta to be at least 1")
        if C1 != C2:
            raise HypothesisViolated("Y3 requires equal level constants")
        if C_prime is None or C_prime <= C1:
            raise HypothesisViolated("Y3 needs a target constant above C1")
        levels = _pair_ratio_levels(C1, delta1, C2, delta2, C_prime, dt, n_max)
        bound = C_prime / (np.e * C1 * log(C_prime / C1))
    elif v == "Y4":
        if C1 <= 1.0:
            raise HypothesisViolated("Y4 requires C1 > 1")
        if delta1 < 1.0:
            raise HypothesisViolated("Y4 requires delta1 >= 1")
        levels = _pair_ratio_levels(C1, delta1, 1.0, 0.0, C1, delta1, n_max)
        bound = C1 / (C1 - 1.0)
    elif v == "Y5":
        if C1 < 2.0:
            raise HypothesisViolated("Y5 holds in the delta=0 scale only for C >= 2")
        levels = _pair_ratio_levels(1.0, 0.0, 1.0, 0.0, C1, 0.0, n_max)
        bound = 1.0
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return YoungReport(v, levels, bound, max(levels))


def _binom_conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = len(a) - 1
    out = np.zeros(n + 1)
    for m in range(n + 1):
        out[m] = sum(comb(m, k) * a[k] * b[m - k] for k in range(m + 1))
    return out


def power_norm_check(C: float, delta: float, n_power: int,
                     C_prime: float | None = None, n_max: int = 30,
                     bounded: bool = False) -> YoungReport:
    """Check the convolution-power norm bound on the extremal witness.

    Three regimes: delta < 1 against the space with level constant
    n_power*C and bound 1; delta >= 1 against any C_prime > C with bound
    (C'/(C'-C))^(n-2) * C'/(e C ln(C'/C)); and the bounded-witness case
    (constant one) against (C, 0), C >= 2, with bound (C/(C-1))^(n-2).
    """
    if n_power < 1:
        raise HypothesisViolated("the power must be at least 1")
    ms = np.arange(n_max + 1, dtype=float)
    if bounded:
        if C < 2.0:
            raise HypothesisViolated("the bounded case lives in C >= 2 at delta = 0")
        w = np.ones(n_max + 1)
        target_log = ms * log(C)
        bound = (C / (C - 1.0)) ** (n_power - 2) if n_power >= 2 else 1.0
    else:
        w = np.exp(ms * log(C) + delta * np.array([lgamma(m + 1.0) for m in range(n_max + 1)]))
        if delta < 1.0:
            target_log = ms * log(n_power * C) + delta * np.array(
                [lgamma(m + 1.0) for m in range(n_max + 1)])
            bound = 1.0
        else:
            if C_prime is None or C_prime <= C:
                raise HypothesisViolated("delta >= 1 needs a target constant above C")
            target_log = ms * log(C_prime) + delta * np.array(
                [lgamma(m + 1.0) for m in range(n_max + 1)])
            bound = ((C_prime / (C_prime - C)) ** (n_power - 2)
                     * C_prime / (np.e * C * log(C_prime / C))) if n_power >= 2 else 1.0
    s = w.copy()
    for _ in range(n_power - 1):
        s = _binom_conv(s, w)
    levels = tuple(float(s[m] * exp(-target_log[m])) for m in range(n_max + 1))
    return YoungReport("cor1", levels, bound, max(levels))
