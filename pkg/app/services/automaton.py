"""Multiband linear cellular automata acting on spatially periodic configurations."""
import logging
from dataclasses import dataclass
from math import lcm
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.services import fp_linalg
from app.services.algebra import LaurentMatrix, LaurentPoly, check_prime, matrix_power

logger = logging.getLogger(__name__)

Cells = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True, eq=False)
class PeriodicConfig:
    """
    One period y_0..y_{N-1} of a bi-infinite sequence in (F_p^r)^Z.

    Equality and hashing are those of the bi-infinite sequence, so configs
    stated with different periods compare equal when they agree after lifting.
    """

    p: int
    cells: Cells

    def __post_init__(self):
        check_prime(self.p)
        if not self.cells:
            raise ValueError("a periodic configuration needs period >= 1")
        r = len(self.cells[0])
        if r < 1 or any(len(c) != r for c in self.cells):
            raise ValueError("all cells must be vectors of the same length r >= 1")
        object.__setattr__(
            self, "cells", tuple(tuple(int(v) % self.p for v in c) for c in self.cells)
        )

    @classmethod
    def zero(cls, p: int, r: int, period: int) -> "PeriodicConfig":
        return cls(p, tuple((0,) * r for _ in range(period)))

    @classmethod
    def from_vector(cls, p: int, r: int, vector: Sequence[int]) -> "PeriodicConfig":
        """Inverse of as_vector: entry i*r + b is band b of cell i."""
        values = [int(v) for v in vector]
        if not values or len(values) % r:
            raise ValueError(f"vector length {len(values)} is not a positive multiple of r={r}")
        return cls(p, tuple(tuple(values[i:i + r]) for i in range(0, len(values), r)))

    @property
    def r(self) -> int:
        return len(self.cells[0])

    @property
    def period(self) -> int:
        return len(self.cells)

    def as_vector(self) -> np.ndarray:
        return np.array([v for c in self.cells for v in c], dtype=np.int64)

    def lift(self, period: int) -> "PeriodicConfig":
        if period % self.period:
            raise ValueError(f"cannot lift period {self.period} to {period}")
        return PeriodicConfig(self.p, self.cells * (period // self.period))

    def minimal_period(self) -> int:
        n = self.period
        for d in range(1, n + 1):
            if n % d == 0 and all(self.cells[i] == self.cells[i % d] for i in range(n)):
                return d
        return n

    def canonical(self) -> "PeriodicConfig":
        return PeriodicConfig(self.p, self.cells[:self.minimal_period()])

    def _check(self, other: "PeriodicConfig") -> None:
        if other.p != self.p or other.r != self.r:
            raise ValueError("configurations over different alphabets")

    def __eq__(self, other) -> bool:
        if not isinstance(other, PeriodicConfig):
            return NotImplemented
        if other.p != self.p or other.r != self.r:
            return False
        n = lcm(self.period, other.period)
        return self.lift(n).cells == other.lift(n).cells

    def __hash__(self) -> int:
        c = self.canonical()
        return hash((c.p, c.cells))

    def __add__(self, other: "PeriodicConfig") -> "PeriodicConfig":
        self._check(other)
        n = lcm(self.period, other.period)
        a, b = self.lift(n).cells, other.lift(n).cells
        return PeriodicConfig(self.p, tuple(tuple(x + y for x, y in zip(u, v)) for u, v in zip(a, b)))

    def scale(self, c: int) -> "PeriodicConfig":
        return PeriodicConfig(self.p, tuple(tuple(c * v for v in cell) for cell in self.cells))

    def __neg__(self) -> "PeriodicConfig":
        return self.scale(-1)

    def __sub__(self, other: "PeriodicConfig") -> "PeriodicConfig":
        return self + (-other)

    def is_zero(self) -> bool:
        return not any(any(c) for c in self.cells)

    def to_lists(self) -> List[List[int]]:
        return [list(c) for c in self.cells]


@dataclass(frozen=True)
class Rule:
    """Linear CA g with g(y)_i = sum_j m_j y_{i+j}, i.e. matrix G(Z) = sum_j m_j Z^j."""

    matrix: LaurentMatrix

    @classmethod
    def shift(cls, p: int, r: int = 1) -> "Rule":
        return cls(LaurentMatrix.identity(p, r).shifted(1))

    @classmethod
    def identity(cls, p: int, r: int = 1) -> "Rule":
        return cls(LaurentMatrix.identity(p, r))

    @classmethod
    def zero(cls, p: int, r: int = 1) -> "Rule":
        return cls(LaurentMatrix.zero(p, r))

    @classmethod
    def from_local_rule(cls, p: int, r: int, blocks: Dict[int, Sequence[Sequence[int]]]) -> "Rule":
        return cls(LaurentMatrix.from_coefficients(p, r, blocks))

    @property
    def p(self) -> int:
        return self.matrix.p

    @property
    def r(self) -> int:
        return self.matrix.r

    @property
    def window(self) -> Tuple[int, int]:
        """(e_min, e_max); (0, 0) for the zero rule."""
        return self.matrix.window() or (0, 0)

    def local_rule(self) -> Dict[int, Tuple[Tuple[int, ...], ...]]:
        return self.matrix.coefficient_matrices()

    def __str__(self) -> str:
        return f"Rule(p={self.p}, G={self.matrix})"


def apply(rule: Rule, cfg: PeriodicConfig) -> PeriodicConfig:
    """y'_i = sum_j m_j y_{(i+j) mod N}."""
    if rule.p != cfg.p or rule.r != cfg.r:
        raise ValueError(
            f"rule over F_{rule.p}^{rule.r} applied to a configuration over F_{cfg.p}^{cfg.r}"
        )
    p, r, n = cfg.p, cfg.r, cfg.period
    blocks = [(j, np.array(m, dtype=np.int64)) for j, m in rule.local_rule().items()]
    cells = np.array(cfg.cells, dtype=np.int64)
    out = np.zeros((n, r), dtype=np.int64)
    for j, m in blocks:
        out = out + np.roll(cells, -j, axis=0) @ m.T
    return PeriodicConfig(p, tuple(tuple(int(v) for v in row) for row in out % p))


def iterate(rule: Rule, n: int) -> Rule:
    """g^n; iterate(rule, 0) is the identity rule."""
    return Rule(matrix_power(rule.matrix, n))


def compose(outer: Rule, inner: Rule) -> Rule:
    """outer after inner; corresponds to the matrix product G_outer * G_inner."""
    return Rule(outer.matrix * inner.matrix)


def is_one_sided(rule: Rule) -> bool:
    return rule.window[0] >= 0


def reflect(rule: Rule) -> Rule:
    """Mirror rule g'(y)_i = sum_j m_j y_{i-j}, i.e. G(Z^-1)."""
    return Rule(rule.matrix.invert_variable())


def one_sided_reduction(rule: Rule) -> Tuple[Rule, int]:
    """(g * s^-e_min, e_min): the rule with all exponents shifted to start at 0."""
    e_min, cleared = rule.matrix.cleared()
    return Rule(cleared), e_min


def companion(blocks: Sequence[LaurentMatrix]) -> Rule:
    """
    First-order rule on stacked states for Y^(t) = sum_j G_j Y^(t-j).

    Block row 0 is (G_1, ..., G_s); identity blocks sit on the subdiagonal.
    A stacked cell is (y^(t-1)_i, ..., y^(t-s)_i).
    """
    if not blocks:
        raise ValueError("companion needs at least one block")
    p, r = blocks[0].p, blocks[0].r
    for b in blocks:
        if b.p != p or b.r != r:
            raise ValueError("companion blocks must share p and r")
    s = len(blocks)
    zero = LaurentPoly.zero(p)
    one = LaurentPoly.one(p)
    rows = [[zero] * (r * s) for _ in range(r * s)]
    for k, block in enumerate(blocks):
        for a in range(r):
            for b in range(r):
                rows[a][k * r + b] = block[a, b]
    for t in range(1, s):
        for a in range(r):
            rows[t * r + a][(t - 1) * r + a] = one
    return Rule(LaurentMatrix.from_rows(p, rows))


def shift_by(cfg: PeriodicConfig, k: int) -> PeriodicConfig:
    """(s^k y)_i = y_{i+k}; k is read mod the period."""
    k %= cfg.period
    return PeriodicConfig(cfg.p, cfg.cells[k:] + cfg.cells[:k])


def transition_matrix(rule: Rule, period: int) -> np.ndarray:
    """Block-circulant rN x rN matrix of g on period-N configurations (see PeriodicConfig.as_vector)."""
    r = rule.r
    t = np.zeros((r * period, r * period), dtype=np.int64)
    for j, m in rule.local_rule().items():
        block = np.array(m, dtype=np.int64)
        for i in range(period):
            col = (i + j) % period
            t[i * r:(i + 1) * r, col * r:(col + 1) * r] += block
    return t % rule.p


def fixed_configs_dimension(rule: Rule, n: int, period: int) -> int:
    """F_p-dimension of {cfg of period dividing N : g^n(cfg) = cfg}."""
    if n < 1 or period < 1:
        raise ValueError("n and the period must be >= 1")
    t = transition_matrix(iterate(rule, n), period)
    return fp_linalg.nullity(t - fp_linalg.identity(t.shape[0]), rule.p)


def simulate(rule: Rule, cfg: PeriodicConfig, steps: int) -> List[PeriodicConfig]:
    """[cfg, g(cfg), ..., g^steps(cfg)]."""
    trajectory = [cfg]
    for _ in range(steps):
        trajectory.append(apply(rule, trajectory[-1]))
    return trajectory


def stack_states(states: Sequence[PeriodicConfig]) -> PeriodicConfig:
    """Stack (Y^(t-1), ..., Y^(t-s)) cell by cell into one configuration over F_p^(rs)."""
    if not states:
        raise ValueError("no states to stack")
    period = lcm(*(s.period for s in states))
    lifted = [s.lift(period) for s in states]
    return PeriodicConfig(
        states[0].p,
        tuple(tuple(v for s in lifted for v in s.cells[i]) for i in range(period)),
    )


def unstack_state(state: PeriodicConfig, r: int) -> List[PeriodicConfig]:
    """Inverse of stack_states."""
    if state.r % r:
        raise ValueError(f"stacked width {state.r} is not a multiple of r={r}")
    return [
        PeriodicConfig(state.p, tuple(cell[k * r:(k + 1) * r] for cell in state.cells))
        for k in range(state.r // r)
    ]


def simulate_recursion(
    blocks: Sequence[LaurentMatrix], history: Sequence[PeriodicConfig], steps: int
) -> List[PeriodicConfig]:
    """
    Run Y^(t) = sum_j G_j Y^(t-j) directly.

    Args:
        blocks: G_1..G_s
        history: Initial states (Y^(-1), ..., Y^(-s)), most recent first

    Returns:
        [Y^(0), ..., Y^(steps-1)]
    """
    if len(history) != len(blocks):
        raise ValueError(f"{len(blocks)} blocks need {len(blocks)} initial states")
    window = list(history)
    out: List[PeriodicConfig] = []
    for _ in range(steps):
        total: Optional[PeriodicConfig] = None
        for block, state in zip(blocks, window):
            term = apply(Rule(block), state)
            total = term if total is None else total + term
        out.append(total)
        window = [total] + window[:-1]
    return out

