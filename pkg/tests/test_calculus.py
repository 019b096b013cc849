import numpy as np
import pytest

from starcalc.calculus import (
    CustomOperator,
    NumberDerivation,
    PointDerivation,
    check_derivation,
    conv_exp,
    conv_inverse,
    conv_log,
    conv_power,
    conv_series,
    drop_point,
    number_op,
    point_derivative,
)
from starcalc.errors import NotInIdeal, NotNormalized
from starcalc.model import GroundConfiguration, SetFunction, popcounts
from starcalc.transforms import conv_fast


def _random(rng, n, ideal=False, normalized=False, scale=1.0, ground=None):
    g = ground if ground is not None else GroundConfiguration(rng.random((n, 1)))
    k = SetFunction(g, rng.standard_normal(1 << g.size) * scale)
    if ideal:
        k.values[0] = 0.0
    if normalized:
        k.values[0] = 1.0
    return k


def test_conv_power_small_cases(rng):
    k = _random(rng, 4)
    unit = SetFunction.unit(k.ground)
    assert np.array_equal(conv_power(k, 0).values, unit.values)
    assert np.array_equal(conv_power(k, 1).values, k.values)
    two = conv_fast(k, k)
    assert np.allclose(conv_power(k, 2).values, two.values, rtol=1e-12)
    assert np.allclose(conv_power(k, 3).values, conv_fast(two, k).values, rtol=1e-10)


def test_conv_series_geometric_inverts(rng):
    u = _random(rng, 5, ideal=True, scale=0.4)
    k = SetFunction.unit(u.ground) - u
    geometric = conv_series([1.0] * (u.n + 1), u)
    assert np.allclose(geometric.values, conv_inverse(k).values, rtol=1e-10)


def test_conv_series_requires_ideal(rng):
    k = _random(rng, 3)
    k.values[0] = 0.5
    with pytest.raises(NotInIdeal):
        conv_series([1.0, 1.0], k)


# frozen: a single singleton seed exponentiates to 1 + itself
def test_exp_of_singleton_support():
    g = GroundConfiguration([[0.2], [0.8]])
    u = SetFunction(g, np.array([0.0, 0.7, 0.0, 0.0]))
    e = conv_exp(u)
    assert list(e.values) == [1.0, 0.7, 0.0, 0.0]


def test_exp_log_inverse_consistency(rng):
    for n in (0, 1, 4, 6):
        u = _random(rng, n, ideal=True, scale=0.4)
        assert np.allclose(conv_log(conv_exp(u)).values, u.values,
                           rtol=1e-11, atol=1e-11)
        k = _random(rng, n, normalized=True, scale=0.4)
        assert np.allclose(conv_exp(conv_log(k)).values, k.values,
                           rtol=1e-11, atol=1e-11)
        unit = SetFunction.unit(k.ground)
        assert np.allclose(conv_fast(k, conv_inverse(k)).values, unit.values,
                           atol=1e-11)


def test_log_requires_normalization(rng):
    k = _random(rng, 3)
    k.values[0] = 0.0
    with pytest.raises(NotNormalized):
        conv_log(k)
    with pytest.raises(NotNormalized):
        conv_inverse(k)


def test_point_derivative_reindexes(rng):
    g = GroundConfiguration(rng.random((3, 1)))
    G = SetFunction(g, rng.standard_normal(8))
    d1 = point_derivative(G, 1)
    assert d1.ground == g.drop(1)
    # the derivative at eta (within the reduced ground) reads G(eta + point 1)
    assert d1.value(0b00) == G.value(0b010)
    assert d1.value(0b01) == G.value(0b011)
    assert d1.value(0b10) == G.value(0b110)
    assert d1.value(0b11) == G.value(0b111)


def test_drop_point_restricts(rng):
    g = GroundConfiguration(rng.random((3, 1)))
    G = SetFunction(g, rng.standard_normal(8))
    r = drop_point(G, 1)
    assert r.value(0b00) == G.value(0b000)
    assert r.value(0b01) == G.value(0b001)
    assert r.value(0b10) == G.value(0b100)
    assert r.value(0b11) == G.value(0b101)


def test_number_op_multiplies_by_level(rng):
    G = _random(rng, 4)
    got = number_op(G)
    assert np.array_equal(got.values, G.values * popcounts(4))


def test_derivation_chain_rule_holds(rng):
    k1 = _random(rng, 5)
    k2 = _random(rng, 5, ground=k1.ground)
    for B in (PointDerivation(2), NumberDerivation()):
        rep = check_derivation(B, k1, k2)
        assert rep.is_derivation
        assert rep.max_residual < 1e-10
        assert rep.unit_image_norm < 1e-14


def test_squaring_is_not_a_derivation(rng):
    k1 = _random(rng, 4)
    k2 = _random(rng, 4, ground=k1.ground)
    sq = CustomOperator(lambda k: k.with_values(k.values ** 2), "squaring")
    rep = check_derivation(sq, k1, k2)
    assert not rep.is_derivation
    assert rep.max_residual > 1e-3


def test_exp_chain_rule(rng):
    u = _random(rng, 5, ideal=True, scale=0.5)
    B = NumberDerivation()
    lhs = B.apply(conv_exp(u))
    rhs = conv_fast(B.apply(u), conv_exp(u))
    assert np.allclose(lhs.values, rhs.values, rtol=1e-11, atol=1e-11)
