import random

import pytest

from app.services.algebra import DensePoly
from app.services.finitefield import (
    ExtField,
    absolute_trace,
    conjugates,
    degree_over_prime_field,
    find_normal_generator,
    frobenius_matrix,
    frobenius_power,
    in_subfield,
    is_normal_generator,
    is_normal_in_subfield,
    multiplication_matrix,
    multiplicative_order,
    polynomial_period,
    random_irreducible,
    rel_trace,
    root_order,
    trace_pairing_matrix,
)
from app.services import fp_linalg


def test_random_irreducible_is_seeded():
    f = random_irreducible(3, 4, seed=7)
    assert f.degree == 4 and f.is_monic() and f.is_irreducible()
    assert random_irreducible(3, 4, seed=7) == f


def test_ext_field_rejects_reducible_modulus():
    with pytest.raises(ValueError):
        ExtField(2, 2, modulus=DensePoly(2, (1, 0, 1)))


def test_field_arithmetic_in_f4():
    F = ExtField(2, 2, modulus=DensePoly(2, (1, 1, 1)))
    x = F.gen
    assert x * x == x + F.one
    assert x ** 3 == F.one
    assert x ** -1 == x + F.one
    assert multiplicative_order(x) == 3


def test_frobenius_has_order_n():
    F = ExtField(3, 4, seed=1)
    x = F.random_element(random.Random(0))
    assert frobenius_power(x, 4) == x
    assert frobenius_power(x, 1) == x ** 3
    assert frobenius_power(x, -1) == frobenius_power(x, 3)


def test_traces_land_in_subfields():
    F = ExtField(2, 6, seed=3)
    rng = random.Random(5)
    for _ in range(10):
        x = F.random_element(rng)
        assert in_subfield(rel_trace(x, 2), 2)
        assert in_subfield(rel_trace(x, 3), 3)
        # transitivity tr_{6,1} = tr_{2,1} o tr_{6,2}
        assert rel_trace(rel_trace(x, 2), 1, level=2) == rel_trace(x, 1)
        assert rel_trace(x, 1).coeffs[0] == absolute_trace(x)
    assert absolute_trace(F.one) == 0  # 6 mod 2
    with pytest.raises(ValueError):
        rel_trace(F.gen, 4)


def test_rel_trace_rejects_element_outside_level():
    F = ExtField(2, 4, seed=0)
    x = F.gen
    assert degree_over_prime_field(x) == 4
    with pytest.raises(ValueError):
        rel_trace(x, 1, level=2)


def test_normal_generators():
    F = ExtField(3, 3, seed=2)
    alpha = find_normal_generator(F, seed=4)
    assert is_normal_generator(alpha)
    basis = conjugates(alpha)
    assert len(basis) == 3
    assert not is_normal_generator(F.one)
    assert is_normal_in_subfield(F.one, 1)


def test_trace_form_is_nondegenerate():
    F = ExtField(2, 5, seed=0)
    assert fp_linalg.rank(trace_pairing_matrix(F), 2) == 5


def test_multiplication_matrix():
    F = ExtField(5, 2, seed=0)
    beta = F.gen + F.one
    y = F.element((2, 3))
    m = multiplication_matrix(beta)
    assert tuple(int(v) for v in (m @ y.vector()) % 5) == (beta * y).coeffs


def test_polynomial_period():
    assert polynomial_period(DensePoly(2, (1, 1))) == 1
    assert polynomial_period(DensePoly(2, (1, 1, 1))) == 3
    assert polynomial_period(DensePoly(2, (1, 0, 1))) == 2
    assert polynomial_period(DensePoly(2, (1, 1, 0, 1))) == 7
    assert polynomial_period(DensePoly(3, (1,))) == 1
    with pytest.raises(ValueError):
        polynomial_period(DensePoly(2, (0, 1)))


def test_root_order():
    assert root_order(DensePoly(2, (1, 1, 1))) == 3
    assert root_order(DensePoly(3, (1, 1))) == 2  # root -1


def test_frobenius_matrix():
    F = ExtField(2, 2, modulus=DensePoly(2, (1, 1, 1)))
    assert frobenius_matrix(F).tolist() == [[1, 1], [0, 1]]

    K = ExtField(3, 4, seed=1)
    x = K.random_element(random.Random(2))
    image = frobenius_matrix(K) @ list(x.coeffs) % 3
    assert tuple(image.tolist()) == frobenius_power(x, 1).coeffs


SMALL_FIELDS = [(p, N) for p in (2, 3, 5, 7) for N in range(1, 10) if p ** N <= 512]


def divisors_of(N):
    return [M for M in range(1, N + 1) if N % M == 0]


@pytest.mark.parametrize("p,N", SMALL_FIELDS)
def test_traces_exhaustively(p, N):
    F = ExtField(p, N, seed=p + N)
    elements = list(F.elements())
    for M in divisors_of(N):
        images = {rel_trace(x, M) for x in elements}
        assert len(images) == p ** M
        for x in elements:
            assert rel_trace(frobenius_power(x, 1), M) == frobenius_power(rel_trace(x, M), 1)
            for L in divisors_of(M):
                assert rel_trace(rel_trace(x, M), L, level=M) == rel_trace(x, L)


@pytest.mark.parametrize("p,N", SMALL_FIELDS)
def test_traces_of_normal_generator_stay_normal(p, N):
    F = ExtField(p, N, seed=p * N)
    alpha = find_normal_generator(F, seed=1)
    for M in divisors_of(N):
        assert is_normal_in_subfield(rel_trace(alpha, M), M)


@pytest.mark.parametrize(
    "p,N", [(p, N) for p in (2, 3, 5, 7, 11, 13) for N in range(1, 13) if p ** N <= 4096]
)
def test_trace_form_nondegenerate_up_to_4096(p, N):
    F = ExtField(p, N, seed=0)
    assert fp_linalg.rank(trace_pairing_matrix(F), p) == N
