import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wte.cvar import (
    closed_form_normal_wte,
    cvar_dual_objective,
    empirical_cvar,
    empirical_quantile,
)
from wte.errors import AlphaOutOfRange, EmptyInput

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
vectors = st.lists(finite_floats, min_size=1, max_size=12)
alphas = st.sampled_from([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])


def quantile_oracle(values, p):
    """inf{t : F_hat(t) >= p} by enumerating thresholds."""
    v = sorted(values)
    m = len(v)
    for t in v:
        if sum(x <= t for x in v) / m >= p:
            return t
    return v[-1]


def brute_force_cvar(values, alpha):
    """Minimize the dual objective over data points and midpoints.

    The empirical objective is piecewise linear in eta, so the minimum
    is attained at a data point; midpoints guard the implementation.
    """
    v = sorted(values)
    grid = list(v) + [0.5 * (a + b) for a, b in zip(v, v[1:])]
    return min(cvar_dual_objective(values, alpha, eta) for eta in grid)


class TestEmpiricalQuantile:
    def test_derived_example(self):
        assert quantile_oracle([1, 2, 3, 4], 0.7) == 3
        assert empirical_quantile([1, 2, 3, 4], 0.7) == 3

    def test_maximum(self):
        assert empirical_quantile([1, 2, 3, 4], 1.0) == 4

    def test_constant(self):
        assert empirical_quantile([5, 5, 5], 0.3) == 5

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            empirical_quantile([], 0.5)

    @given(vectors, st.floats(min_value=0.01, max_value=1.0))
    def test_matches_oracle(self, v, p):
        assert empirical_quantile(v, p) == quantile_oracle(v, p)


class TestDualObjective:
    def test_hand_example(self):
        assert cvar_dual_objective([1, 2, 3, 4], 0.5, 3) == pytest.approx(3.5)

    def test_alpha_one_at_zero(self):
        assert cvar_dual_objective([1, 2, 3, 4], 1.0, 0) == pytest.approx(2.5)

    def test_constant_at_own_value(self):
        assert cvar_dual_objective([7.0, 7.0], 0.4, 7.0) == pytest.approx(7.0)

    def test_alpha_range(self):
        with pytest.raises(AlphaOutOfRange):
            cvar_dual_objective([1.0], 1.5, 0.0)

    @given(vectors, alphas)
    def test_convex_in_eta(self, v, alpha):
        lo, hi = min(v) - 1.0, max(v) + 1.0
        mid = 0.5 * (lo + hi)
        f = lambda eta: cvar_dual_objective(v, alpha, eta)
        assert f(mid) <= 0.5 * (f(lo) + f(hi)) + 1e-12 * max(1.0, abs(f(mid)))


class TestEmpiricalCvar:
    def test_derived_examples(self):
        r = empirical_cvar([1, 2, 3, 4], 0.5)
        assert r.value == pytest.approx(brute_force_cvar([1, 2, 3, 4], 0.5), abs=1e-12)
        assert r.value == pytest.approx(3.5)
        r = empirical_cvar([1, 2, 3, 4], 0.3)
        assert r.value == pytest.approx(brute_force_cvar([1, 2, 3, 4], 0.3), abs=1e-12)
        assert r.value == pytest.approx(3 + 1 / 1.2)

    def test_alpha_one_is_mean(self):
        assert empirical_cvar([1, 2, 3, 4], 1.0).value == pytest.approx(2.5)

    def test_eta_star_in_argmin(self):
        # the argmin can be an interval; eta_star must attain the minimum
        # and satisfy the left-continuous quantile definition
        r = empirical_cvar([1, 2, 3, 4], 0.5)
        assert cvar_dual_objective([1, 2, 3, 4], 0.5, r.eta_star) == pytest.approx(r.value)
        assert r.eta_star == empirical_quantile([1, 2, 3, 4], 0.5)

    def test_tiny_tail_is_max(self):
        v = [1.0, 2.0, 9.0]
        r = empirical_cvar(v, 0.1)
        assert r.value == pytest.approx(9.0)

    def test_errors(self):
        with pytest.raises(AlphaOutOfRange):
            empirical_cvar([1.0], 0.0)
        with pytest.raises(EmptyInput):
            empirical_cvar([], 0.5)

    @given(vectors, alphas)
    @settings(max_examples=200)
    def test_oracle_equivalence(self, v, alpha):
        got = empirical_cvar(v, alpha).value
        want = brute_force_cvar(v, alpha)
        assert got == pytest.approx(want, abs=1e-10 * max(1.0, abs(want)))

    @given(vectors, alphas, st.floats(min_value=-100, max_value=100))
    def test_translation_equivariance(self, v, alpha, c):
        shifted = empirical_cvar([x + c for x in v], alpha).value
        assert shifted == pytest.approx(empirical_cvar(v, alpha).value + c, abs=1e-8)

    @given(vectors, alphas, st.floats(min_value=0.0, max_value=50.0))
    def test_positive_homogeneity(self, v, alpha, lam):
        scaled = empirical_cvar([lam * x for x in v], alpha).value
        assert scaled == pytest.approx(lam * empirical_cvar(v, alpha).value, abs=1e-6)

    @given(vectors)
    def test_monotone_nonincreasing_in_alpha(self, v):
        grid = [0.1, 0.3, 0.5, 0.7, 0.9, 1.0]
        vals = [empirical_cvar(v, a).value for a in grid]
        for a, b in zip(vals, vals[1:]):
            assert a >= b - 1e-9 * max(1.0, abs(a))

    @given(vectors, alphas)
    def test_dominates_mean(self, v, alpha):
        mean = sum(v) / len(v)
        assert empirical_cvar(v, alpha).value >= mean - 1e-9 * max(1.0, abs(mean))

    @given(vectors)
    def test_input_not_mutated(self, v):
        arr = np.array(v, dtype=float)
        before = arr.copy()
        empirical_cvar(arr, 0.4)
        assert np.array_equal(arr, before)

    def test_quantile_definition_of_eta_star(self, rng):
        for _ in range(50):
            v = rng.normal(size=rng.integers(1, 30))
            alpha = float(rng.uniform(0.05, 0.95))
            eta = empirical_cvar(v, alpha).eta_star
            fhat = lambda t: np.mean(v <= t)
            assert fhat(eta) >= 1 - alpha
            assert fhat(eta - 1e-9) < 1 - alpha or np.min(v) == eta


class TestClosedFormNormal:
    def test_paper_values(self):
        assert closed_form_normal_wte(-0.1, 1, 0.9) == pytest.approx(0.095, abs=5e-4)
        assert closed_form_normal_wte(-0.1, 1, 0.5) == pytest.approx(0.698, abs=5e-4)

    def test_alpha_one_is_mean(self):
        assert closed_form_normal_wte(3.7, 2.0, 1.0) == 3.7

    def test_matches_monte_carlo(self, rng):
        draws = rng.normal(-0.1, 1.0, size=2_000_000)
        assert closed_form_normal_wte(-0.1, 1.0, 0.25) == pytest.approx(
            empirical_cvar(draws, 0.25).value, abs=5e-3
        )
