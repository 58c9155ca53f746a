import numpy as np
import pytest

from hypquad.orthopoly import RuleKind, gauss_rule
from hypquad.quad1d import (
    DEFAULT_THETA,
    EmptyRuleError,
    LevelFamily,
    TruncationPolicy,
    level_rule,
    symmetrize,
    symmetrized_rule,
    truncated_rule,
    truncation_index,
)
from hypquad.rates import fit_rate
from hypquad.testbed import registry
from hypquad.weight_core import Domain

import oracles


class TestTruncationIndex:
    def test_single_zero(self):
        assert truncation_index(1, 0.5) == 1

    def test_order_four(self):
        assert truncation_index(4, 0.25) == 2

    def test_fraction_at_64(self):
        assert 0.2 <= truncation_index(64, 0.25) / 64 <= 0.9

    @pytest.mark.parametrize("m", [3, 20, 97, 500])
    @pytest.mark.parametrize("theta", [0.1, 0.25, 0.6])
    def test_matches_node_count(self, m, theta):
        nodes = gauss_rule(m, 0.0).nodes
        assert truncation_index(m, theta) == int(np.sum(nodes <= 4 * theta * m))

    def test_tie_counts_inside(self):
        # m=1: the single zero sits exactly at alpha+1 = 1 = 4 theta m
        assert truncation_index(1, 0.25) == 1

    def test_empty_rule(self):
        with pytest.raises(EmptyRuleError):
            truncated_rule(1, 0.0, 0.2)

    def test_policy_range(self):
        with pytest.raises(ValueError):
            TruncationPolicy(0.01)
        with pytest.raises(ValueError):
            TruncationPolicy(0.99)
        assert TruncationPolicy().theta == DEFAULT_THETA


class TestTruncatedRule:
    def test_order_four(self):
        r = truncated_rule(4, 0.0, 0.25)
        assert r.kind is RuleKind.TRUNCATED
        np.testing.assert_allclose(r.nodes, [0.32254768961939217, 1.7457611011583463], rtol=1e-14)

    def test_no_truncation_at_wide_theta(self):
        full = gauss_rule(2, 0.0)
        r = truncated_rule(2, 0.0, 0.99)
        np.testing.assert_array_equal(r.nodes, full.nodes)
        np.testing.assert_array_equal(r.weights, full.weights)

    def test_rational_integrand(self):
        r = truncated_rule(64, 0.0, 0.25)
        assert abs(r.apply(lambda x: 1 / (1 + x)) - oracles.E_E1_ONE) <= 1e-3

    def test_mass_deficit_decreases(self):
        deficits = [1.0 - truncated_rule(m, 0.0, 0.25).mass() for m in (16, 32, 64, 128)]
        assert all(d > 0 for d in deficits[:2])
        assert all(b < a for a, b in zip(deficits, deficits[1:]) if a > 1e-15)
        assert deficits[2] < 1e-8


class TestSymmetrizedRule:
    def test_even_function_doubles(self):
        half = truncated_rule(32, 0.0, 0.25)
        sym = symmetrized_rule(32, 0.0, 0.25)
        f = lambda x: np.exp(-0.3 * np.abs(x))  # noqa: E731
        assert sym.apply(f) == half.apply(f) * 2

    @pytest.mark.parametrize("f", [np.sin, lambda x: x**3, lambda x: x * np.exp(-np.abs(x))])
    def test_odd_function_is_zero(self, f):
        assert symmetrized_rule(32, 0.0, 0.25).apply(f) == 0.0

    def test_second_moment(self):
        assert symmetrized_rule(32, 0.0, 0.25).apply(np.square) == pytest.approx(4.0, abs=1e-6)

    def test_layout(self):
        sym = symmetrize(truncated_rule(16, 0.5, 0.25))
        assert sym.domain is Domain.FULL_LINE
        np.testing.assert_array_equal(sym.nodes, -sym.nodes[::-1])
        assert np.all(np.diff(sym.nodes) > 0)

    @pytest.mark.parametrize("m", [8, 16, 32])
    def test_identity_for_registry(self, m):
        half = truncated_rule(m, 0.0, 0.25)
        sym = symmetrized_rule(m, 0.0, 0.25)
        for f in registry(0.0, Domain.FULL_LINE, dims=(1,)):
            g = lambda x, f=f: f(np.asarray(x).reshape(-1, 1))  # noqa: E731
            assert sym.apply(g) == half.apply(g) + half.apply(lambda x, g=g: g(-x)), f.name


@pytest.fixture(scope="module")
def family():
    return LevelFamily()


class TestLevelFamily:
    def test_level_zero_wide_theta(self):
        fam = LevelFamily(TruncationPolicy(0.5))
        assert fam.order(0) >= 1
        assert len(fam.rule(0)) == 1

    @pytest.mark.parametrize("k", range(11))
    def test_budget_maximality(self, family, k):
        m = family.order(k)
        assert family.j(m) <= 2**k < family.j(m + 1)

    def test_sizes_near_budget(self, family):
        for k in range(11):
            assert 0.4 * 2**k <= family.size(k) <= 2**k

    def test_levels_disjoint(self, family):
        for k in range(1, 8):
            a, b = family.rule(k - 1).nodes, family.rule(k).nodes
            assert not set(a.tolist()) & set(b.tolist())

    def test_full_line_level(self):
        fam = LevelFamily(domain=Domain.FULL_LINE)
        r = level_rule(fam, 3)
        assert r.kind is RuleKind.SYMMETRIZED
        assert len(r) == fam.size(3) <= fam.budget(3)

    def test_negative_level(self, family):
        with pytest.raises(ValueError):
            family.order(-1)

    def test_rule_cached(self, family):
        assert family.rule(5) is family.rule(5)

    @pytest.mark.parametrize("r", [1, 2])
    def test_convergence_slope(self, family, r):
        exact = oracles.SHIFTED[r]
        samples = []
        for k in range(4, 11):
            rule = family.rule(k)
            err = abs(rule.apply(lambda x: np.maximum(x - 1.0, 0.0) ** r) - exact)
            samples.append((len(rule), err))
        assert fit_rate(samples, skip=0).slope <= -r / 2 + 0.25
