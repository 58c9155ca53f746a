import math

import numpy as np
import pytest

from hypquad.testbed import Factor1D, lookup, tensor
from hypquad.weight_core import (
    CanonicalMap,
    Domain,
    UnboundedEstimateError,
    WeightParams,
    eval_weight,
    moment0,
    sobolev_norm_estimate,
)

import oracles


def _zero(k, x):
    return np.zeros_like(np.asarray(x, dtype=float))


class TestWeightParams:
    @pytest.mark.parametrize("kw", [
        {"alpha": -1.0}, {"alpha": -2.5}, {"a": 0.0}, {"a": -1.0},
        {"r": -1}, {"r": 1.5}, {"d": 0},
    ])
    def test_rejects_invalid(self, kw):
        with pytest.raises(ValueError):
            WeightParams(**kw)

    def test_domain_coerced_from_string(self):
        assert WeightParams(domain="full").domain is Domain.FULL_LINE

    def test_canonical_flag(self):
        assert WeightParams().canonical
        assert not WeightParams(a=2.0).canonical
        assert not WeightParams(b=0.1).canonical


class TestEvalWeight:
    def test_origin_is_one(self):
        assert eval_weight(WeightParams(), 0.0) == 1.0

    def test_with_smoothness_exponent(self):
        p = WeightParams(r=2)
        assert eval_weight(p, 1.0, use_r=True) == pytest.approx(math.exp(-1), rel=1e-15)

    def test_general_product_weight(self):
        p = WeightParams(alpha=0.5, a=2.0, b=1.0, d=2)
        assert eval_weight(p, [1.0, 1.0]) == pytest.approx(oracles.E_MINUS_2, rel=1e-14)

    def test_batch_shape(self):
        p = WeightParams(d=2)
        out = eval_weight(p, np.ones((5, 2)))
        assert out.shape == (5,)

    def test_negative_point_on_half_line(self):
        with pytest.raises(ValueError):
            eval_weight(WeightParams(), -0.5)

    def test_full_line_is_even(self):
        p = WeightParams(alpha=0.7, domain=Domain.FULL_LINE)
        assert eval_weight(p, -1.3) == eval_weight(p, 1.3)

    def test_pole_at_origin(self):
        with pytest.raises(ZeroDivisionError):
            eval_weight(WeightParams(alpha=-0.5), 0.0)

    def test_wrong_point_length(self):
        with pytest.raises(ValueError):
            eval_weight(WeightParams(d=3), [1.0, 2.0])

    @pytest.mark.parametrize("x", [[0.3, 2.0], [5.0, 0.01], [1.0, 1.0]])
    def test_use_r_structure(self, x):
        p = WeightParams(alpha=0.4, a=1.5, b=-0.2, r=3, d=2)
        plain = eval_weight(p, x)
        with_r = eval_weight(p, x, use_r=True)
        assert plain == pytest.approx(with_r / np.prod(np.abs(x)) ** 1.5, rel=1e-13)


class TestMoment0:
    @pytest.mark.parametrize("alpha,expected", [
        (0.0, 1.0), (1.0, 1.0), (0.5, oracles.GAMMA_3_2),
    ])
    def test_half_line(self, alpha, expected):
        assert moment0(WeightParams(alpha=alpha)) == pytest.approx(expected, rel=1e-14)

    def test_full_line_doubles(self):
        assert moment0(WeightParams(alpha=0.5, domain="full")) == pytest.approx(2 * oracles.GAMMA_3_2)

    @pytest.mark.parametrize("alpha,a,b", [(0.0, 2.0, 0.5), (1.5, 0.3, -1.0), (-0.4, 5.0, 2.0)])
    def test_canonical_round_trip(self, alpha, a, b):
        p = WeightParams(alpha=alpha, a=a, b=b)
        cmap = p.canonical_map()
        assert isinstance(cmap, CanonicalMap)
        canon = moment0(WeightParams(alpha=alpha))
        assert canon * cmap.integral_factor == pytest.approx(moment0(p), rel=1e-12)

    def test_canonical_map_inverts(self):
        cmap = WeightParams(a=3.0).canonical_map()
        x = np.array([0.1, 2.0, 7.5])
        np.testing.assert_allclose(cmap.from_canonical(cmap.to_canonical(x)), x, rtol=1e-15)


class TestSobolevNorm:
    def test_zero_function(self):
        f = tensor("zero", [Factor1D("zero", _zero, 0.0)], 8, "zero")
        assert sobolev_norm_estimate(f, WeightParams(r=2)) == 0.0

    def test_constant_equals_mass(self):
        f = lookup("monomial0")
        assert sobolev_norm_estimate(f, WeightParams()) == pytest.approx(1.0, rel=1e-10)

    def test_identity_with_first_derivative(self):
        f = lookup("monomial1")
        got = sobolev_norm_estimate(f, WeightParams(r=1))
        assert got == pytest.approx(oracles.GAMMA_5_2_PLUS_3_2, rel=1e-9)

    def test_monotone_in_r(self):
        f = lookup("exponential")
        vals = [sobolev_norm_estimate(f, WeightParams(r=r)) for r in range(4)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("r", [0, 1, 2])
    def test_separable_factorizes(self, r):
        f2 = lookup("rational", d=2)
        f1 = lookup("rational", d=1)
        one = sobolev_norm_estimate(f1, WeightParams(r=r))
        two = sobolev_norm_estimate(f2, WeightParams(r=r, d=2))
        assert two == pytest.approx(one**2, rel=1e-8)

    def test_dense_path_matches_separable(self):
        f = lookup("exponential", d=2)
        dense = type(f)(name=f.name, arity=2, factors=None, smoothness_class=f.smoothness_class,
                        _evaluate=f.evaluate, _derivative=f.derivative)
        p = WeightParams(r=1, d=2)
        assert sobolev_norm_estimate(dense, p, resolution=4) == pytest.approx(
            sobolev_norm_estimate(f, p, resolution=4), rel=1e-8)

    def test_growing_function_is_flagged(self):
        def grow(k, x):
            return np.exp(0.99 * np.asarray(x, dtype=float))

        f = tensor("grow", [Factor1D("grow", grow, None)], 8, "test")
        with pytest.raises(UnboundedEstimateError):
            sobolev_norm_estimate(f, WeightParams(r=1), resolution=2)

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            sobolev_norm_estimate(lookup("monomial0", d=2), WeightParams(d=1))
