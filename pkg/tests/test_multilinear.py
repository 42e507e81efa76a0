import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drgt.multilinear import MultilinearExpr, MultilinearSystem, dot
from drgt.solver import penalty, penalty_gradient

X = [MultilinearExpr.var(k) for k in range(4)]


def one_block(n, eqs, ineqs):
    return MultilinearSystem(n, {"y": (0, n)}, list(eqs), list(ineqs))


def random_system(rng):
    n = int(rng.integers(2, 9))
    exprs = []
    for _ in range(int(rng.integers(1, 8))):
        terms = {}
        for _ in range(int(rng.integers(1, 5))):
            deg = int(rng.integers(1, 4))
            # repeats are allowed: y_k * y_k still differentiates correctly
            key = tuple(rng.integers(0, n, size=deg))
            terms[key] = float(rng.normal())
        exprs.append(MultilinearExpr(terms, float(rng.normal())))
    split = int(rng.integers(0, len(exprs) + 1))
    return one_block(n, exprs[:split], exprs[split:])


class TestExpr:
    def test_merges_identical_monomials(self):
        e = X[0] * X[1] + X[1] * X[0] * 2.0
        assert e.terms == ((3.0, (0, 1)),)

    def test_constants_fold(self):
        e = X[0] + 2.0 - X[0] - 5.0
        assert e == MultilinearExpr.const(-3.0)
        assert e.terms == ()

    def test_product_distributes(self):
        e = (X[0] + 1.0) * (X[1] - 2.0)
        y = np.array([3.0, 5.0, 0, 0])
        assert e.evaluate(y) == pytest.approx(4.0 * 3.0)
        assert e.degree == 2
        assert e.variables() == {0, 1}

    def test_dot_skips_zeros(self):
        e = dot([0.0, 2.0, 0.0], X[:3])
        assert e.variables() == {1}

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31))
    def test_algebra_matches_evaluation(self, seed):
        rng = np.random.default_rng(seed)
        y = rng.normal(size=4)
        a = MultilinearExpr({(0,): rng.normal(), (1, 2): rng.normal()}, rng.normal())
        b = MultilinearExpr({(3,): rng.normal(), (0, 3): rng.normal()}, rng.normal())
        s = float(rng.normal())
        assert (a + b).evaluate(y) == pytest.approx(a.evaluate(y) + b.evaluate(y))
        assert (a - b).evaluate(y) == pytest.approx(a.evaluate(y) - b.evaluate(y))
        assert (a * b).evaluate(y) == pytest.approx(a.evaluate(y) * b.evaluate(y))
        assert (s * a).evaluate(y) == pytest.approx(s * a.evaluate(y))
        assert (s - a).evaluate(y) == pytest.approx(s - a.evaluate(y))


class TestSystem:
    def test_layout_must_tile(self):
        with pytest.raises(ValueError):
            MultilinearSystem(3, {"a": (0, 1), "b": (2, 3)}, [], [])
        with pytest.raises(ValueError):
            MultilinearSystem(3, {"a": (0, 2)}, [], [])

    def test_variable_range_checked(self):
        with pytest.raises(ValueError):
            one_block(2, [MultilinearExpr.var(2)], [])

    def test_compiled_residuals_match_expressions(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            sys_ = random_system(rng)
            y = rng.normal(size=sys_.num_vars)
            want = [e.evaluate(y) for e in sys_.equalities + sys_.inequalities]
            np.testing.assert_allclose(sys_.compile().residuals(y), want, atol=1e-12)


class TestPenalty:
    def test_feasible_point(self):
        sys_ = one_block(2, [X[0] - 1.0], [X[1] - 3.0])
        assert penalty(sys_, [1.0, 0.0]) == 0.0
        np.testing.assert_array_equal(penalty_gradient(sys_, [1.0, 0.0]), 0.0)

    def test_violated_equality(self):
        sys_ = one_block(1, [X[0] - 3.0], [])
        assert penalty(sys_, [5.0]) == 2.0

    def test_inactive_inequality(self):
        sys_ = one_block(1, [], [X[0] - 3.0])
        assert penalty(sys_, [1.0]) == 0.0
        assert penalty(sys_, [4.0]) == 0.5

    def test_square_term_gradient(self):
        sys_ = one_block(1, [X[0] * X[0]], [])
        assert penalty_gradient(sys_, [1.0])[0] == pytest.approx(2.0)

    def test_wrong_length(self):
        sys_ = one_block(2, [X[0]], [])
        with pytest.raises(ValueError):
            penalty(sys_, [1.0])

    def test_matches_formula(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            sys_ = random_system(rng)
            y = rng.normal(size=sys_.num_vars)
            g_e = np.array([e.evaluate(y) for e in sys_.equalities])
            g_i = np.array([e.evaluate(y) for e in sys_.inequalities])
            want = 0.5 * (g_e ** 2).sum() + 0.5 * (np.maximum(g_i, 0) ** 2).sum()
            assert penalty(sys_, y) == pytest.approx(want, rel=1e-12, abs=1e-14)

    def test_gradient_central_differences(self):
        rng = np.random.default_rng(2024)
        h = 1e-6
        for _ in range(100):
            sys_ = random_system(rng)
            y = rng.normal(size=sys_.num_vars)
            grad = penalty_gradient(sys_, y)
            fd = np.empty_like(y)
            for k in range(y.size):
                e = np.zeros_like(y)
                e[k] = h
                fd[k] = (penalty(sys_, y + e) - penalty(sys_, y - e)) / (2 * h)
            scale = max(1.0, np.abs(grad).max())
            assert np.abs(grad - fd).max() <= 1e-5 * scale
