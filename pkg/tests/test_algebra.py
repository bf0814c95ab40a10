import random

import pytest

from app.services.algebra import (
    NEG_INF,
    DensePoly,
    LaurentMatrix,
    LaurentPoly,
    PrimeField,
    char_poly,
    deg_val,
    format_laurent,
    laurent_det,
    matrix_power,
    polynomial_in_matrix,
)
from tests.conftest import rule_of


def lp(p, terms):
    return LaurentPoly.from_terms(p, terms)


def random_laurent(rng, p, density=0.4):
    """Coefficients on exponents -3..3, each present with the given probability."""
    return lp(p, {e: rng.randrange(1, p) for e in range(-3, 4) if rng.random() < density})


def random_laurent_matrix(rng, p, r):
    return LaurentMatrix.from_rows(p, [[random_laurent(rng, p) for _ in range(r)] for _ in range(r)])


def test_prime_field_arithmetic():
    F = PrimeField(5)
    assert int(F(3) + F(4)) == 2
    assert int(F(2) * F(3)) == 1
    assert int(F(2).inverse()) == 3
    assert int(F(2) ** -1) == 3
    with pytest.raises(ZeroDivisionError):
        F(0).inverse()


def test_prime_field_rejects_composite():
    with pytest.raises(ValueError):
        PrimeField(4)


def test_dense_poly_basics():
    f = DensePoly(2, (1, 0, 1))
    assert f.degree == 2
    assert DensePoly.zero(2).degree == NEG_INF
    assert f.factor() == [(DensePoly(2, (1, 1)), 2)]
    assert not f.is_irreducible()
    assert DensePoly(2, (1, 1, 1)).is_irreducible()
    q, rem = divmod(f, DensePoly(2, (1, 1)))
    assert q == DensePoly(2, (1, 1)) and rem.is_zero
    with pytest.raises(ValueError):
        f.exact_quo(DensePoly(2, (1, 1, 1)))


def test_dense_poly_gcd_is_monic():
    a = DensePoly(3, (2, 2))  # 2(1 + x)
    b = DensePoly(3, (2, 0, 1))  # x^2 + 2 = (x + 1)(x + 2)
    assert a.gcd(b) == DensePoly(3, (1, 1))


def test_laurent_normalization_and_valuation():
    x = LaurentPoly.from_coeffs(3, [0, 0, 1, 2], offset=-3)
    assert x.val == -1 and x.deg == 0
    assert x.terms() == {-1: 1, 0: 2}
    assert deg_val(x) == (0, -1)
    with pytest.raises(ValueError):
        deg_val(LaurentPoly.zero(3))


def test_laurent_arithmetic():
    p = 3
    a = lp(p, {-1: 1, 3: 2})
    b = lp(p, {0: 1, 1: 1})
    assert a + b == lp(p, {-1: 1, 0: 1, 1: 1, 3: 2})
    assert a - a == LaurentPoly.zero(p)
    assert (a * b).terms() == {-1: 1, 0: 1, 3: 2, 4: 2}
    assert LaurentPoly.monomial(p, 2, 2) ** -1 == LaurentPoly.monomial(p, -2, 2)
    with pytest.raises(ValueError):
        b ** -1


def test_laurent_coefficients_reduce_mod_p():
    assert lp(2, {0: 3, 1: 2}) == LaurentPoly.one(2)


def test_invert_variable():
    x = lp(2, {-1: 1, 2: 1})
    assert x.invert_variable() == lp(2, {1: 1, -2: 1})


def test_format_laurent():
    assert format_laurent(lp(3, {-1: 1, 3: 2})) == "Z^-1 + 2*Z^3"
    assert format_laurent(lp(2, {0: 1, 1: 1})) == "1 + Z"
    assert format_laurent(LaurentPoly.zero(5)) == "0"


def test_matrix_product_and_power():
    g = rule_of(2, [["Z", "1"], ["1", "0"]]).matrix
    g2 = g * g
    assert g2.to_strings() == [["1 + Z^2", "Z"], ["Z", "1"]]
    assert matrix_power(g, 2) == g2
    assert matrix_power(g, 0) == LaurentMatrix.identity(2, 2)
    with pytest.raises(ValueError):
        matrix_power(g, -1)


def test_matrix_shape_checks():
    with pytest.raises(ValueError):
        LaurentMatrix.from_rows(2, [[1, 0]])
    with pytest.raises(ValueError):
        LaurentMatrix.identity(2, 2) + LaurentMatrix.identity(3, 2)


def test_coefficient_matrices_roundtrip():
    g = rule_of(3, [["Z^-1 + 2", "Z"], ["0", "1 + Z^2"]]).matrix
    blocks = g.coefficient_matrices()
    assert sorted(blocks) == [-1, 0, 1, 2]
    assert blocks[-1] == ((1, 0), (0, 0))
    assert LaurentMatrix.from_coefficients(3, 2, blocks) == g


def test_cleared_window():
    g = rule_of(3, [["Z^-1 + 2", "Z"], ["0", "1 + Z^2"]]).matrix
    assert g.window() == (-1, 2)
    e_min, cleared = g.cleared()
    assert e_min == -1
    assert cleared.window() == (0, 3)


def test_laurent_det():
    g = rule_of(2, [["Z", "1"], ["1", "0"]]).matrix
    assert laurent_det(g) == LaurentPoly.one(2)  # -1 = 1 mod 2
    g3 = matrix_power(g, 3) - LaurentMatrix.identity(2, 2)
    assert laurent_det(g3) == lp(2, {1: 1, 3: 1})


def test_laurent_det_with_negative_powers():
    m = rule_of(3, [["Z^-1", "1"], ["2", "Z^2"]]).matrix
    # Z^-1 * Z^2 - 1 * 2 = Z - 2
    assert laurent_det(m) == lp(3, {0: 1, 1: 1})


def test_laurent_det_singular():
    m = rule_of(5, [["1 + Z", "2 + 2*Z"], ["Z", "2*Z"]]).matrix
    assert laurent_det(m).is_zero


def test_char_poly_and_cayley_hamilton():
    g = rule_of(2, [["Z", "1"], ["1", "0"]]).matrix
    chi = char_poly(g)
    assert chi == [LaurentPoly.one(2), lp(2, {1: 1}), LaurentPoly.one(2)]
    assert polynomial_in_matrix(chi, g).is_zero


def test_char_poly_three_by_three():
    g = rule_of(3, [["Z", "1", "0"], ["0", "Z^-1", "1"], ["1", "0", "2"]]).matrix
    chi = char_poly(g)
    assert len(chi) == 4 and chi[3] == LaurentPoly.one(3)
    assert polynomial_in_matrix(chi, g).is_zero
    assert chi[0] == -laurent_det(g)


def test_dense_poly_coefficients_are_field_elements():
    f = DensePoly(5, (3, 0, 2))
    F = f.field
    assert F.p == 5
    assert f.coeff(0) == F(3) and f.coeff(7) == F(0)
    assert f.leading_coeff() == F(2)
    assert f.leading_coeff().inverse() == F(3)
    assert LaurentPoly.monomial(5, 2, 2) ** -1 == LaurentPoly.monomial(5, -2, 3)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_determinant_is_multiplicative_on_random_matrices(p):
    rng = random.Random(40 + p)
    for _ in range(20):
        r = rng.randint(1, 3)
        a, b = random_laurent_matrix(rng, p, r), random_laurent_matrix(rng, p, r)
        assert laurent_det(a * b) == laurent_det(a) * laurent_det(b)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_cayley_hamilton_on_random_matrices(p):
    rng = random.Random(50 + p)
    for _ in range(15):
        m = random_laurent_matrix(rng, p, rng.randint(1, 3))
        chi = char_poly(m)
        assert chi[-1] == LaurentPoly.one(p)
        assert polynomial_in_matrix(chi, m).is_zero


def test_deg_val_additive_under_products():
    rng = random.Random(3)
    checked = 0
    for p in (2, 3, 5):
        for _ in range(30):
            x, y = random_laurent(rng, p, 0.6), random_laurent(rng, p, 0.6)
            if x.is_zero or y.is_zero:
                continue
            (dx, vx), (dy, vy) = deg_val(x), deg_val(y)
            assert deg_val(x * y) == (dx + dy, vx + vy)
            checked += 1
    assert checked > 50
