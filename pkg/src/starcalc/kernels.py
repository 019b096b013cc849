"""Kernel families: symmetric functions of finite point configurations.

Every kernel evaluates on a configuration given as an (m, d) coordinate
array (or a sequence of points) and is defined at the empty configuration.
Families that factor as  weight(|eta|) * prod_x field(x)  expose that
structure, which drives fast tabulation, batched Monte Carlo evaluation
and closed-form level sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, exp, log

import numpy as np

from .fields import Field, as_field, const_field, parse_field
from .model import GroundConfiguration, SetFunction, points_to_array, popcounts


def config_array(pts) -> np.ndarray:
    """Normalize a configuration to an (m, d) float array."""
    if isinstance(pts, np.ndarray):
        a = np.asarray(pts, dtype=float)
        return a[None, :] if a.ndim == 1 else a
    return points_to_array(pts)


def segmented_product(values: np.ndarray, seglens: np.ndarray) -> np.ndarray:
    """Per-segment products of a flat value array; empty segments give 1."""
    seglens = np.asarray(seglens, dtype=np.int64)
    if seglens.size == 0:
        return np.zeros(0)
    padded = np.append(np.asarray(values, dtype=float), 1.0)
    starts = np.zeros(seglens.size, dtype=np.int64)
    np.cumsum(seglens[:-1], out=starts[1:])
    out = np.multiply.reduceat(padded, starts)
    out[seglens == 0] = 1.0
    return out


def subset_products(pvals: np.ndarray) -> np.ndarray:
    """prod of pvals over the bits of each mask, for all 2**n masks."""
    n = len(pvals)
    out = np.empty(1 << n)
    out[0] = 1.0
    for i in range(n):
        out[1 << i: 2 << i] = out[: 1 << i] * pvals[i]
    return out


@dataclass
class LevelFactorization:
    """Representation k(eta) = weights[|eta|] * prod_{x in eta} field(x)."""

    weights: object  # callable n_max -> ndarray of length n_max + 1
    field: Field


class Kernel:
    """Base class. Subclasses implement value(); hooks below are optional."""

    def value(self, pts) -> float:
        raise NotImplementedError

    def __call__(self, pts) -> float:
        return self.value(pts)

    def level_factorization(self) -> LevelFactorization | None:
        return None

    def support_level(self) -> int | None:
        """Max cardinality carrying nonzero values, None if unbounded."""
        return None

    def to_json(self):
        raise TypeError(f"{type(self).__name__} is not JSON-serializable")

    def eval_batch(self, pool: np.ndarray, seglens: np.ndarray) -> np.ndarray:
        """Evaluate on many configurations packed into one point pool."""
        fact = self.level_factorization()
        if fact is not None:
            seglens = np.asarray(seglens, dtype=np.int64)
            w = fact.weights(int(seglens.max()) if seglens.size else 0)
            pv = fact.field(pool) if len(pool) else np.zeros(0)
            return segmented_product(pv, seglens) * w[seglens]
        out = np.empty(len(seglens))
        pos = 0
        for i, m in enumerate(np.asarray(seglens, dtype=np.int64)):
            out[i] = self.value(pool[pos: pos + m])
            pos += m
        return out


def _const_weights(fn):
    def weights(n_max: int) -> np.ndarray:
        return fn(n_max)

    return weights


class PointProduct(Kernel):
    """k(eta) = prod_{x in eta} f(x); the empty configuration gives 1."""

    def __init__(self, field):
        self.field = as_field(field)

    def value(self, pts) -> float:
        a = config_array(pts)
        if not len(a):
            return 1.0
        # sorted so the product is exactly permutation-invariant
        return float(np.prod(np.sort(self.field(a))))

    def level_factorization(self):
        return LevelFactorization(_const_weights(lambda n: np.ones(n + 1)), self.field)

    def to_json(self):
        if self.field.spec is None:
            raise TypeError("point-product kernel over an opaque field")
        return {"type": "point_product", "field": self.field.spec}


class ConstantLevel(Kernel):
    """k(eta) = c ** |eta|."""

    def __init__(self, c: float):
        self.c = float(c)

    def value(self, pts) -> float:
        return self.c ** len(config_array(pts))

    def level_factorization(self):
        c = self.c
        return LevelFactorization(
            _const_weights(lambda n: c ** np.arange(n + 1, dtype=float)), const_field(1.0)
        )

    def to_json(self):
        return {"type": "constant_level", "c": self.c}


class EmptyIndicator(Kernel):
    """Indicator of the empty configuration, the convolution unit."""

    def value(self, pts) -> float:
        return 1.0 if len(config_array(pts)) == 0 else 0.0

    def level_factorization(self):
        def w(n):
            out = np.zeros(n + 1)
            out[0] = 1.0
            return out

        return LevelFactorization(_const_weights(w), const_field(1.0))

    def support_level(self):
        return 0

    def to_json(self):
        return {"type": "empty"}


class SingletonKernel(Kernel):
    """sigma(x) on one-point configurations, 0 elsewhere (including empty)."""

    def __init__(self, field):
        self.field = as_field(field)

    def value(self, pts) -> float:
        a = config_array(pts)
        return float(self.field(a)[0]) if len(a) == 1 else 0.0

    def level_factorization(self):
        def w(n):
            out = np.zeros(n + 1)
            if n >= 1:
                out[1] = 1.0
            return out

        return LevelFactorization(_const_weights(w), self.field)

    def support_level(self):
        return 1

    def to_json(self):
        if self.field.spec is None:
            raise TypeError("singleton kernel over an opaque field")
        return {"type": "singleton", "field": self.field.spec}


class LevelWeights(Kernel):
    """k(eta) = weights[|eta|], 0 beyond the end of the list."""

    def __init__(self, weights):
        self.weights = [float(w) for w in weights]
        if not self.weights:
            raise ValueError("need at least the empty-level weight")

    def value(self, pts) -> float:
        m = len(config_array(pts))
        return self.weights[m] if m < len(self.weights) else 0.0

    def level_factorization(self):
        ws = self.weights

        def w(n):
            out = np.zeros(n + 1)
            k = min(n + 1, len(ws))
            out[:k] = ws[:k]
            return out

        return LevelFactorization(_const_weights(w), const_field(1.0))

    def support_level(self):
        nz = [i for i, w in enumerate(self.weights) if w != 0.0]
        return max(nz) if nz else 0

    def to_json(self):
        return {"type": "level_weights", "weights": list(self.weights)}


class NormWitness(Kernel):
    """k(eta) = C**|eta| * (|eta|!)**delta, the extremal norm witness."""

    def __init__(self, C: float, delta: float):
        self.C = float(C)
        self.delta = float(delta)
        if self.C <= 0:
            raise ValueError("C must be positive")

    def _w(self, n: int) -> np.ndarray:
        ns = np.arange(n + 1, dtype=float)
        logw = ns * log(self.C) + self.delta * np.array([lgamma(k + 1.0) for k in range(n + 1)])
        return np.exp(logw)

    def value(self, pts) -> float:
        m = len(config_array(pts))
        return exp(m * log(self.C) + self.delta * lgamma(m + 1.0))

    def level_factorization(self):
        return LevelFactorization(_const_weights(self._w), const_field(1.0))

    def to_json(self):
        return {"type": "norm_witness", "C": self.C, "delta": self.delta}


class KernelSum(Kernel):
    def __init__(self, *terms):
        self.terms = [t for t in terms]
        if not self.terms:
            raise ValueError("empty sum")

    def value(self, pts) -> float:
        a = config_array(pts)
        return sum(t.value(a) for t in self.terms)

    def support_level(self):
        levels = [t.support_level() for t in self.terms]
        return None if any(l is None for l in levels) else max(levels)

    def eval_batch(self, pool, seglens):
        return sum(t.eval_batch(pool, seglens) for t in self.terms)

    def to_json(self):
        return {"type": "sum", "terms": [t.to_json() for t in self.terms]}


class KernelProduct(Kernel):
    def __init__(self, *factors):
        self.factors = [f for f in factors]
        if not self.factors:
            raise ValueError("empty product")

    def value(self, pts) -> float:
        a = config_array(pts)
        out = 1.0
        for f in self.factors:
            out *= f.value(a)
        return out

    def level_factorization(self):
        facts = [f.level_factorization() for f in self.factors]
        if any(f is None for f in facts):
            return None
        from .fields import fprod

        def w(n):
            out = np.ones(n + 1)
            for f in facts:
                out *= f.weights(n)
            return out

        return LevelFactorization(_const_weights(w), fprod(*[f.field for f in facts]))

    def support_level(self):
        levels = [f.support_level() for f in self.factors]
        known = [l for l in levels if l is not None]
        return min(known) if known else None

    def eval_batch(self, pool, seglens):
        fact = self.level_factorization()
        if fact is not None:
            return Kernel.eval_batch(self, pool, seglens)
        out = np.ones(len(seglens))
        for f in self.factors:
            out *= f.eval_batch(pool, seglens)
        return out

    def to_json(self):
        return {"type": "product", "factors": [f.to_json() for f in self.factors]}


class ScaledKernel(Kernel):
    def __init__(self, coeff: float, kernel: Kernel):
        self.coeff = float(coeff)
        self.kernel = kernel

    def value(self, pts) -> float:
        return self.coeff * self.kernel.value(pts)

    def level_factorization(self):
        fact = self.kernel.level_factorization()
        if fact is None:
            return None
        c = self.coeff
        return LevelFactorization(lambda n: c * fact.weights(n), fact.field)

    def support_level(self):
        return self.kernel.support_level() if self.coeff != 0.0 else 0

    def eval_batch(self, pool, seglens):
        return self.coeff * self.kernel.eval_batch(pool, seglens)

    def to_json(self):
        return {"type": "scale", "coeff": self.coeff, "kernel": self.kernel.to_json()}


class CustomKernel(Kernel):
    """Arbitrary symmetric configuration function fn((m, d) array) -> float."""

    def __init__(self, fn, support_level: int | None = None):
        self.fn = fn
        self._support = support_level

    def value(self, pts) -> float:
        return float(self.fn(config_array(pts)))

    def support_level(self):
        return self._support


def eval_kernel(kernel: Kernel, pts) -> float:
    """Evaluate a kernel on one configuration (array or point sequence)."""
    return kernel.value(config_array(pts))


def exponent_form(k: Kernel):
    """(coeff, field) when k is a scaled point-product exponent, else None."""
    if isinstance(k, PointProduct):
        return 1.0, k.field
    if isinstance(k, ScaledKernel):
        inner = exponent_form(k.kernel)
        if inner is not None:
            return k.coeff * inner[0], inner[1]
    return None


def tabulate(kernel: Kernel, ground: GroundConfiguration) -> SetFunction:
    """Tabulate a kernel over the full subset lattice of a ground.

    Level-factorizable kernels use an O(2**n) product sweep; sums, products
    and scalings recurse; only opaque kernels fall back to a mask loop.
    """
    n = ground.size
    fact = kernel.level_factorization()
    if fact is not None:
        w = fact.weights(n)
        pv = fact.field(ground.as_array()) if n else np.zeros(0)
        return SetFunction(ground, subset_products(pv) * w[popcounts(n)])
    if isinstance(kernel, KernelSum):
        out = tabulate(kernel.terms[0], ground)
        for t in kernel.terms[1:]:
            out = out + tabulate(t, ground)
        return out
    if isinstance(kernel, KernelProduct):
        vals = tabulate(kernel.factors[0], ground).values
        for f in kernel.factors[1:]:
            vals = vals * tabulate(f, ground).values
        return SetFunction(ground, vals)
    if isinstance(kernel, ScaledKernel):
        return kernel.coeff * tabulate(kernel.kernel, ground)
    arr = ground.as_array()
    vals = np.empty(1 << n)
    for mask in range(1 << n):
        idx = [i for i in range(n) if mask >> i & 1]
        vals[mask] = kernel.value(arr[idx])
    return SetFunction(ground, vals)


_EXTRA_PARSERS: dict = {}


def register_kernel_type(name: str, parser) -> None:
    """Hook for kernel families defined in higher layers."""
    _EXTRA_PARSERS[name] = parser


def kernel_from_json(obj, dim: int | None = None) -> Kernel:
    """Build a kernel from its JSON description."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValueError(f"malformed kernel description: {obj!r}")
    t = obj["type"]
    if t == "point_product":
        return PointProduct(parse_field(obj["field"], dim))
    if t == "constant_level":
        return ConstantLevel(obj["c"])
    if t == "empty":
        return EmptyIndicator()
    if t == "singleton":
        return SingletonKernel(parse_field(obj["field"], dim))
    if t == "level_weights":
        return LevelWeights(obj["weights"])
    if t == "norm_witness":
        return NormWitness(obj["C"], obj["delta"])
    if t == "sum":
        return KernelSum(*[kernel_from_json(o, dim) for o in obj["terms"]])
    if t == "product":
        return KernelProduct(*[kernel_from_json(o, dim) for o in obj["factors"]])
    if t == "scale":
        return ScaledKernel(obj["coeff"], kernel_from_json(obj["kernel"], dim))
    if t in _EXTRA_PARSERS:
        return _EXTRA_PARSERS[t](obj, dim)
    raise ValueError(f"unknown kernel type {t!r}")
