import pytest

from app.services.automaton import PeriodicConfig, Rule, apply, shift_by
from app.services.dynamics import log_fix_count
from app.services.errors import NotConfinedError
from app.services.oracle import (
    Provenance,
    certified_period,
    exhaustive_config_search,
    field_operator,
    field_side_count,
    ladder,
    sequence_operator,
    sequence_side_count,
    stabilized_count,
)
from tests.conftest import rule_of


def test_ladder():
    assert ladder(5) == [1, 2, 6, 12, 60]
    assert ladder(1) == [1]


def test_operator_provenance():
    g = rule_of(2, [["1 + Z"]])
    op = field_operator(g, 2, 0, 3)
    assert op.provenance is Provenance.FIELD_SIDE and op.dimension == 3
    assert sequence_operator(g, 2, 0, 3).provenance is Provenance.SEQUENCE_SIDE


def test_field_side_trivial_cases():
    assert field_side_count(Rule.shift(2), 1, 0, 1) == 1
    for N in (1, 2, 3):
        assert field_side_count(Rule.zero(3), 1, 0, N) == 0


def test_sequence_side_shift_coincides_everywhere():
    assert sequence_side_count(Rule.shift(2, 2), 1, 1, 5) == 10


@pytest.mark.parametrize("grid,p", [
    ([["1 + Z"]], 2),
    ([["Z", "1"], ["1", "0"]], 2),
    ([["Z^-1 + 2*Z"]], 3),
])
def test_field_and_sequence_sides_agree(grid, p):
    g = rule_of(p, grid)
    for n in (1, 2, 3):
        for k in (0, 1):
            for N in (1, 2, 3, 4, 6):
                assert field_side_count(g, n, k, N) == sequence_side_count(g, n, k, N)


def test_field_side_is_monotone_along_divisibility():
    g = rule_of(2, [["1 + Z"]])
    counts = [field_side_count(g, 3, 0, N) for N in (1, 3, 6, 12)]
    assert counts == sorted(counts)
    assert counts[-1] == log_fix_count(g, 3)


def test_frobenius_plus_identity_matches_one_plus_z():
    # x -> x^p + x on F_{p^N} has the fixed-point counts of G = 1 + Z
    g = rule_of(3, [["1 + Z"]])
    for n in (1, 2, 3, 4):
        assert stabilized_count(g, n, 0, j_max=4).exponent == log_fix_count(g, n)


def test_certified_period():
    g = rule_of(2, [["1 + Z"]])
    assert certified_period(g, 3, 0) == 3
    assert certified_period(Rule.shift(2), 2, 0) == 2
    assert certified_period(Rule.shift(2), 1, 1) is None


def test_stabilized_count_examples():
    shift2 = stabilized_count(Rule.shift(2), 2, 0)
    assert (shift2.exponent, shift2.attained_at, shift2.status) == (2, 2, "equal")

    g = rule_of(2, [["1 + Z"]])
    three = stabilized_count(g, 3, 0)
    assert three.exponent == three.closed_form == 2
    assert three.attained and three.certified

    four = stabilized_count(g, 4, 0)
    assert (four.exponent, four.closed_form, four.attained_at) == (0, 0, 1)


def test_stabilized_count_without_certification():
    g = rule_of(2, [["1 + Z"]])
    result = stabilized_count(g, 3, 0, max_dim=2, j_max=2)
    assert not result.certified
    assert result.exponent <= result.closed_form
    assert result.status in ("equal", "lower bound only")


def test_stabilized_count_rejects_infinite_coincidences():
    with pytest.raises(NotConfinedError):
        stabilized_count(Rule.shift(2), 1, 1)


def test_exhaustive_search():
    assert exhaustive_config_search(Rule.zero(2), 1, 3) == [PeriodicConfig.zero(2, 1, 3)]
    constants = exhaustive_config_search(Rule.shift(2), 1, 3)
    assert len(constants) == 2
    g = rule_of(2, [["1 + Z"]])
    fixed = exhaustive_config_search(g, 3, 3)
    assert len(fixed) == 2 ** sequence_side_count(g, 3, 0, 3) == 4
    found = set(fixed)
    for a in fixed:
        assert shift_by(a, 1) in found
        for b in fixed:
            assert a + b in found
    with pytest.raises(ValueError):
        exhaustive_config_search(g, 1, 20, bound=1024)


def test_exhaustive_search_fixed_points_are_fixed():
    g = rule_of(3, [["Z", "2"], ["1", "Z^-1"]])
    for cfg in exhaustive_config_search(g, 2, 3):
        assert apply(g, apply(g, cfg)) == cfg