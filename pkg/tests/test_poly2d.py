from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from c1serendipity.poly2d import (
    CENTERED_FRAME,
    MAX_DEGREE,
    BasisList,
    Poly2D,
    evaluate,
    linear_combination,
    monomial_basis,
    pk_exponents,
    qk_exponents,
    stack_coeffs,
    tabulate,
)


def monomial(i, j):
    c = np.zeros((i + 1, j + 1))
    c[i, j] = 1.0
    return Poly2D(c)


class TestEval:
    def test_value(self):
        assert evaluate(monomial(2, 1), 1.0, 1.0, 0, 0) == 1.0

    def test_first_derivative(self):
        assert evaluate(monomial(2, 1), 2.0, 3.0, 1, 0) == pytest.approx(12.0)

    def test_mixed_derivative(self):
        assert evaluate(monomial(2, 2), 0.5, 0.5, 1, 1) == pytest.approx(1.0)

    def test_derivative_beyond_degree_is_zero(self):
        assert monomial(2, 1)(0.3, 0.7, 3, 0) == 0.0

    def test_vectorised(self):
        x = np.linspace(0, 1, 7)
        np.testing.assert_allclose(monomial(3, 0)(x, 0.0), x**3)

    def test_order_cap(self):
        with pytest.raises(ValueError):
            monomial(2, 2)(0.1, 0.1, 5, 0)

    def test_degree_cap(self):
        with pytest.raises(ValueError):
            Poly2D(np.zeros((MAX_DEGREE + 2, 1)))

    def test_coefficients_read_only(self):
        p = monomial(1, 1)
        with pytest.raises(ValueError):
            p.coeffs[0, 0] = 3.0


class TestBasis:
    def test_q1(self):
        b = monomial_basis("Qk", 1)
        assert len(b) == 4
        pts = np.random.default_rng(0).random((5, 2))
        expected = [np.ones(5), pts[:, 1], pts[:, 0], pts[:, 0] * pts[:, 1]]
        for p, e in zip(b, expected):
            np.testing.assert_allclose(p(pts[:, 0], pts[:, 1]), e)

    def test_p4_dimension(self):
        assert len(monomial_basis("Pk", 4)) == 15

    def test_q4_dimension(self):
        assert len(monomial_basis("Qk", 4)) == 25

    @pytest.mark.parametrize("k", range(0, 9))
    def test_exponent_counts(self, k):
        assert len(pk_exponents(k)) == (k + 1) * (k + 2) // 2
        assert len(qk_exponents(k)) == (k + 1) ** 2
        assert set(pk_exponents(k)) <= set(qk_exponents(k))

    def test_unknown_space(self):
        with pytest.raises(ValueError):
            monomial_basis("Rk", 2)

    def test_membership(self):
        assert monomial(4, 4).in_qk(4)
        assert not monomial(4, 4).in_pk(7)
        assert monomial(4, 4).in_pk(8)


class TestLinearCombination:
    def test_unit_vector(self):
        b = monomial_basis("Qk", 1)
        p = linear_combination([1, 0, 0, 0], b)
        assert p(0.3, 0.9) == pytest.approx(1.0)

    def test_all_zero(self):
        p = linear_combination(np.zeros(4), monomial_basis("Qk", 1))
        assert p(0.2, 0.4) == 0.0
        assert not np.any(p.coeffs)

    def test_x_plus_y(self):
        p = linear_combination([1, 1], BasisList((monomial(1, 0), monomial(0, 1)), "custom", 1))
        assert p(1.0, 2.0) == pytest.approx(3.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            linear_combination([1, 2, 3], monomial_basis("Qk", 1))


def test_frames_do_not_mix():
    a = Poly2D(np.ones((1, 1)))
    b = Poly2D(np.ones((1, 1)), *CENTERED_FRAME)
    with pytest.raises(ValueError):
        a + b


coeff_grids = st.integers(0, 5).flatmap(
    lambda n: st.lists(st.floats(-2, 2), min_size=(n + 1) ** 2, max_size=(n + 1) ** 2).map(
        lambda v: np.array(v).reshape(n + 1, n + 1)
    )
)
points = st.tuples(st.floats(0, 1), st.floats(0, 1))


@settings(max_examples=60, deadline=None)
@given(coeff_grids, coeff_grids, points, st.floats(-3, 3))
def test_eval_is_linear(c1, c2, pt, a):
    p, q = Poly2D(c1), Poly2D(c2)
    lhs = (p + a * q)(*pt)
    rhs = p(*pt) + a * q(*pt)
    assert lhs == pytest.approx(rhs, abs=1e-12 * (1 + abs(p(*pt)) + abs(a * q(*pt))) + 1e-12)


@settings(max_examples=60, deadline=None)
@given(coeff_grids, points, st.integers(0, 2), st.integers(0, 2))
def test_frame_change_preserves_values(c, pt, dx, dy):
    """The same polynomial written in the centered frame has equal derivatives."""
    p = Poly2D(c)
    n = c.shape[0] - 1
    # expand x = 0.5 + 0.5 xi and y likewise with binomial sums
    T = np.array([[comb(i, a) * 0.5**i if a <= i else 0.0 for i in range(n + 1)] for a in range(n + 1)])
    q = Poly2D(T @ c @ T.T, *CENTERED_FRAME)
    x, y = pt
    assert q(x, y, dx, dy) == pytest.approx(p(x, y, dx, dy), rel=1e-10, abs=1e-10)


qk_grids = st.integers(0, 8).flatmap(
    lambda n: st.lists(st.floats(-1, 1), min_size=(n + 1) ** 2, max_size=(n + 1) ** 2).map(
        lambda v: np.array(v).reshape(n + 1, n + 1)
    )
)


@settings(max_examples=40, deadline=None)
@given(qk_grids, points)
def test_derivative_matches_finite_difference(c, pt):
    p = Poly2D(c)
    x, y = pt
    h = 1e-5
    fd = (p(x + h, y) - p(x - h, y)) / (2 * h)
    scale = 1 + np.abs(c).sum() * c.shape[0]
    assert abs(p(x, y, 1, 0) - fd) <= 1e-6 * scale


def test_tabulate_matches_eval():
    rng = np.random.default_rng(1)
    polys = [Poly2D(rng.uniform(-1, 1, (4, 4)), *CENTERED_FRAME) for _ in range(3)]
    stack = stack_coeffs(polys, 3)
    x, y = rng.random(9), rng.random(9)
    for dx, dy in [(0, 0), (1, 0), (0, 2), (1, 1)]:
        tab = tabulate(stack, CENTERED_FRAME, x, y, dx, dy)
        for m, p in enumerate(polys):
            np.testing.assert_allclose(tab[m], p(x, y, dx, dy), rtol=1e-13, atol=1e-13)
