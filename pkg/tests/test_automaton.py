import numpy as np
import pytest

from app.services.algebra import LaurentMatrix
from app.services.automaton import (
    PeriodicConfig,
    Rule,
    apply,
    companion,
    compose,
    fixed_configs_dimension,
    is_one_sided,
    iterate,
    one_sided_reduction,
    reflect,
    shift_by,
    simulate,
    simulate_recursion,
    stack_states,
    transition_matrix,
    unstack_state,
)
from app.services.dynamics import log_fix_count
from app.services.oracle import certified_period
from app.services.rule_parser import parse_matrix
from tests.conftest import random_confined_rules, rule_of


def cfg(p, values):
    return PeriodicConfig(p, tuple((v,) if isinstance(v, int) else tuple(v) for v in values))


def test_config_equality_lifts_periods():
    a = cfg(2, [1, 0])
    b = cfg(2, [1, 0, 1, 0])
    assert a == b
    assert hash(a) == hash(b)
    assert a != cfg(2, [0, 1])
    assert b.minimal_period() == 2


def test_config_arithmetic():
    a = cfg(3, [1, 2])
    b = cfg(3, [1, 1, 1])
    assert a + b == cfg(3, [2, 0, 2, 0, 2, 0])
    assert (a - a).is_zero()
    assert a.scale(2) == cfg(3, [2, 1])


def test_shift_rule_rotates():
    s = Rule.shift(2)
    y = cfg(2, [1, 0, 0])
    assert apply(s, y) == cfg(2, [0, 0, 1])
    assert apply(s, y) == shift_by(y, 1)


def test_apply_matches_local_rule():
    # g(y)_i = y_i + y_{i+1}
    g = rule_of(2, [["1 + Z"]])
    assert apply(g, cfg(2, [1, 0, 0, 0])) == cfg(2, [1, 0, 0, 1])


def test_apply_two_sided_multiband():
    g = rule_of(3, [["Z^-1", "1"], ["0", "2*Z"]])
    y = cfg(3, [(1, 0), (0, 1), (2, 2)])
    # band 0: y_{i-1}[0] + y_i[1]; band 1: 2 * y_{i+1}[1]
    assert apply(g, y) == cfg(3, [(2 + 0, 2 * 1), (1 + 1, 2 * 2), (0 + 2, 0)])


def test_apply_rejects_mismatched_alphabet():
    with pytest.raises(ValueError):
        apply(Rule.shift(2, 2), cfg(2, [1, 0]))


def test_iterate_and_compose():
    g = rule_of(2, [["Z", "1"], ["1", "0"]])
    y = cfg(2, [(1, 0), (0, 0), (1, 1)])
    assert apply(iterate(g, 3), y) == apply(g, apply(g, apply(g, y)))
    assert iterate(g, 0) == Rule.identity(2, 2)
    assert compose(g, g) == iterate(g, 2)


def test_apply_commutes_with_shift():
    g = rule_of(3, [["Z^-1 + 2", "Z"], ["1", "Z^2"]])
    y = cfg(3, [(1, 2), (0, 1), (2, 2), (1, 0)])
    assert apply(g, shift_by(y, 1)) == shift_by(apply(g, y), 1)


def test_transition_matrix_matches_apply():
    g = rule_of(3, [["Z^-1 + 2", "Z"], ["1", "Z^2"]])
    y = cfg(3, [(1, 2), (0, 1), (2, 2), (1, 0), (0, 2)])
    t = transition_matrix(g, 5)
    assert PeriodicConfig.from_vector(3, 2, (t @ y.as_vector()) % 3) == apply(g, y)


def test_one_sided_reduction():
    g = rule_of(3, [["Z^-2 + 1", "Z"], ["0", "1"]])
    assert not is_one_sided(g)
    reduced, e_min = one_sided_reduction(g)
    assert e_min == -2
    assert is_one_sided(reduced)
    assert reduced.matrix == g.matrix.shifted(2)


def test_fixed_configs_dimension():
    # shift: fixed points of period 3 are the constants
    assert fixed_configs_dimension(Rule.shift(2), 1, 3) == 1
    # 1 + Z, n = 3 over F_2: two-dimensional on period 3
    assert fixed_configs_dimension(rule_of(2, [["1 + Z"]]), 3, 3) == 2


def test_fixed_configs_dimension_stabilizes():
    rules = random_confined_rules(10, seed=13) + [rule_of(2, [["Z", "1"], ["1", "0"]])]
    leveled = 0
    for rule in rules:
        for n in (1, 2, 3):
            closed = log_fix_count(rule, n)
            for N, k in ((1, 2), (1, 3), (2, 3), (3, 2), (6, 2)):
                low = fixed_configs_dimension(rule, n, N)
                assert low <= fixed_configs_dimension(rule, n, k * N) <= closed
            period = certified_period(rule, n, 0)
            if rule.r * period <= 60:
                assert fixed_configs_dimension(rule, n, period) == closed
                leveled += 1
    assert leveled > 0


def test_reflect():
    assert reflect(Rule.shift(2)).matrix == LaurentMatrix.identity(2, 1).shifted(-1)
    g = rule_of(3, [["Z^-1 + 2*Z^2"]])
    assert reflect(g) == rule_of(3, [["Z + 2*Z^-2"]])
    assert reflect(reflect(g)) == g
    start = cfg(2, [1, 0, 0, 1])
    assert apply(reflect(Rule.shift(2)), start) == shift_by(start, -1)


def test_zero_rule_window():
    assert Rule.zero(5, 2).window == (0, 0)
    assert Rule.zero(5, 2).local_rule() == {}


def test_companion_of_second_order_recursion():
    blocks = [parse_matrix([["Z"]], 2), parse_matrix([["1"]], 2)]
    assert companion(blocks) == rule_of(2, [["Z", "1"], ["1", "0"]])


def test_companion_rejects_mixed_blocks():
    with pytest.raises(ValueError):
        companion([LaurentMatrix.identity(2, 1), LaurentMatrix.identity(3, 1)])
    with pytest.raises(ValueError):
        companion([])


def test_companion_simulation_matches_recursion():
    blocks = [parse_matrix([["Z", "1"], ["0", "Z^-1"]], 3), parse_matrix([["1", "0"], ["2", "1"]], 3)]
    history = [cfg(3, [(1, 0), (0, 2), (1, 1)]), cfg(3, [(0, 1), (2, 0), (0, 0)])]
    direct = simulate_recursion(blocks, history, 6)
    stacked = simulate(companion(blocks), stack_states(history), 6)
    assert [unstack_state(s, 2)[0] for s in stacked[1:]] == direct
    assert unstack_state(stack_states(history), 2) == history


def test_second_order_example():
    blocks = [parse_matrix([["Z"]], 2), parse_matrix([["1"]], 2)]
    history = [cfg(2, [1, 0, 0]), cfg(2, [0, 0, 0])]
    out = simulate_recursion(blocks, history, 2)
    assert out == [cfg(2, [0, 0, 1]), cfg(2, [1, 1, 0])]


def test_simulate_includes_start():
    y = cfg(2, [1, 0, 0])
    trajectory = simulate(Rule.shift(2), y, 3)
    assert len(trajectory) == 4
    assert trajectory[0] == y and trajectory[3] == y


def test_as_vector_layout():
    y = cfg(5, [(1, 2), (3, 4)])
    assert list(y.as_vector()) == [1, 2, 3, 4]
    assert np.array_equal(PeriodicConfig.from_vector(5, 2, [1, 2, 3, 4]).as_vector(), y.as_vector())
