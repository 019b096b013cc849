import numpy as np
import pytest

from starcalc.errors import DivergentSeries, NotInIdeal
from starcalc.evolution import (
    EvolutionResult,
    cumulant_evolution_check,
    dual_sum_check,
    evolve,
    evolve_singleton,
    mult_operator,
    norm_growth_report,
    number_dual,
    operator_norm_bound,
    resolvent,
    shift_kernel,
    squaring_map,
)
from starcalc.calculus import NumberDerivation
from starcalc.fields import const_field, coord_field, fscale, fsum
from starcalc.kernels import PointProduct, SingletonKernel, eval_kernel, tabulate
from starcalc.model import GroundConfiguration, SetFunction, popcounts
from starcalc.transforms import conv_fast, mobius, zeta


def _pair(rng, n):
    g = GroundConfiguration(rng.random((n, 1)))
    return (SetFunction(g, rng.standard_normal(1 << n)),
            SetFunction(g, rng.standard_normal(1 << n)))


def test_mult_operator_special_multipliers(rng):
    a, k = _pair(rng, 6)
    ones = k.with_values(np.ones(1 << 6))
    alt = k.with_values((-1.0) ** popcounts(6))
    assert np.array_equal(mult_operator(ones, k).values, zeta(k).values)
    assert np.array_equal(mult_operator(alt, k).values, mobius(k).values)
    generic = mult_operator(a, k)
    assert np.allclose(generic.values, conv_fast(a, k).values, rtol=1e-12)


def test_operator_norm_bound_scales(rng):
    a, _ = _pair(rng, 5)
    assert operator_norm_bound(a) > 0
    assert operator_norm_bound(a * 10.0) > operator_norm_bound(a)


def test_evolve_time_zero_is_identity(rng):
    a, k0 = _pair(rng, 5)
    res = evolve(a, k0, 0.0)
    assert isinstance(res, EvolutionResult)
    assert np.array_equal(res.solution.values, k0.values)
    assert res.tail_bound == 0.0


def test_evolve_nilpotent_terminates_exactly(rng):
    a, k0 = _pair(rng, 5)
    a.values[0] = 0.0
    res = evolve(a, k0, 1.0)
    # the generator is in the ideal, so the series has at most n+1 terms
    assert res.truncation_terms <= a.n + 1
    assert res.tail_bound == 0.0


def test_evolve_semigroup_property(rng):
    a, k0 = _pair(rng, 5)
    a.values[0] = 0.0
    one = evolve(a, k0, 0.9).solution
    two = evolve(a, evolve(a, k0, 0.4).solution, 0.5).solution
    assert np.allclose(one.values, two.values, rtol=1e-10, atol=1e-12)


def test_evolve_singleton_matches_series(rng):
    g = GroundConfiguration(rng.random((5, 1)))
    sigma = fsum(const_field(0.3), coord_field(0))
    k0 = PointProduct(const_field(1.1))
    t = 0.7
    closed = evolve_singleton(sigma, k0, t, g)
    expect = tabulate(PointProduct(fsum(const_field(1.1), fscale(t, sigma))), g)
    assert np.allclose(closed.values, expect.values, rtol=1e-13)
    series = evolve(tabulate(SingletonKernel(sigma), g), tabulate(k0, g), t)
    assert np.allclose(closed.values, series.solution.values, rtol=1e-12)


def test_resolvent_solves_identity(rng):
    a, k = _pair(rng, 5)
    z = operator_norm_bound(a) + 1.0
    r = resolvent(a, k, z)
    residual = (r * z) - conv_fast(a, r) - k
    assert np.max(np.abs(residual.values)) < 1e-9


def test_resolvent_flags_divergence(rng):
    a, k = _pair(rng, 4)
    a.values[0] = 5.0  # spectral radius at least 5, so z=1 cannot converge
    with pytest.raises(DivergentSeries):
        resolvent(a, k, 1.0)


def test_cumulant_check_needs_ideal_seed(rng):
    g = GroundConfiguration(rng.random((3, 1)))
    u0 = SetFunction(g, rng.standard_normal(8))
    u0.values[0] = 0.3
    with pytest.raises(NotInIdeal):
        cumulant_evolution_check(NumberDerivation(), u0, t=0.5, steps=10)


def test_cumulant_transport_small(rng):
    g = GroundConfiguration(rng.random((5, 1)))
    u0 = SetFunction(g, rng.standard_normal(32) * 3e-4)
    u0.values[0] = 0.0
    rep = cumulant_evolution_check(NumberDerivation(), u0, t=1.0, steps=400)
    assert rep.deviation < 1e-6
    assert rep.u_sup > 0


def test_shift_kernel_freezes_prefix(rng):
    G = PointProduct(fsum(const_field(0.5), coord_field(0)))
    base = rng.random((2, 1))
    shifted = shift_kernel(G, base)
    extra = rng.random((1, 1))
    merged = np.concatenate([base, extra])
    assert eval_kernel(shifted, extra) == pytest.approx(eval_kernel(G, merged))


def test_dual_sum_check_separates(rng):
    G = PointProduct(fsum(const_field(0.5), coord_field(0)))
    pairs = [(rng.random((1, 1)), rng.random((2, 1))) for _ in range(6)]
    assert dual_sum_check(number_dual, G, pairs).max_residual < 1e-10
    assert dual_sum_check(squaring_map, G, pairs).max_residual > 1e-3


def test_norm_growth_report_shape():
    sigma = const_field(0.5)
    rep = norm_growth_report(sigma, C0=1.0, C_prime=2.0, box=[[0.0, 1.0]],
                             bound=5.0, t_max=4.0, dt=0.05, levels=25)
    # t_star is the first grid time at which the norm crosses the bound
    assert 0 < rep.t_star <= 4.0
    assert rep.norm_at_t_star >= rep.bound
    assert rep.C_prime == 2.0
