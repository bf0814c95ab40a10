"""Shared fixtures."""
import random
from typing import List

import pytest

from app.config import settings
from app.services.algebra import LaurentMatrix, LaurentPoly
from app.services.automaton import Rule, is_one_sided
from app.services.dynamics import is_confined
from app.services.rule_parser import parse_matrix


@pytest.fixture(autouse=True)
def no_traces(monkeypatch, tmp_path):
    """Keep test runs from writing trace files into the working tree."""
    monkeypatch.setattr(settings, "TRACE_ENABLED", False)
    monkeypatch.setattr(settings, "TRACE_ROOT", str(tmp_path / "traces"))


def rule_of(p: int, grid: List[List[str]]) -> Rule:
    return Rule(parse_matrix(grid, p))


def random_rule(rng: random.Random, p: int, r: int) -> Rule:
    """Entries with exponents in [-2, 2] spanning at most three consecutive powers."""
    rows = []
    for _ in range(r):
        row = []
        for _ in range(r):
            low = rng.randint(-2, 0)
            row.append(LaurentPoly.from_coeffs(p, [rng.randrange(p) for _ in range(3)], low))
        rows.append(row)
    return Rule(LaurentMatrix.from_rows(p, rows))


def random_confined_rules(count: int, seed: int, two_sided: bool = False) -> List[Rule]:
    """Seeded confined rules over p in {2, 3} with r in {1, 2}."""
    rng = random.Random(seed)
    rules = []
    while len(rules) < count:
        rule = random_rule(rng, rng.choice((2, 3)), rng.choice((1, 2)))
        if two_sided and is_one_sided(rule):
            continue
        if is_confined(rule):
            rules.append(rule)
    return rules


@pytest.fixture
def make_rule():
    return rule_of


@pytest.fixture
def rng_factory():
    return lambda seed: random.Random(seed)
