"""Brute-force fixed-point and coincidence counting on both sides of the correspondence.

Field side: sigma = sum_j m_j F^j acting on F_{p^N}^r, F the Frobenius.
Sequence side: g acting on period-N configurations through its block-circulant matrix.
"""
import logging
from enum import Enum
from functools import lru_cache
from itertools import product
from math import lcm
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.config import settings
from app.services import fp_linalg
from app.services.automaton import PeriodicConfig, Rule, apply, iterate, transition_matrix
from app.services.dynamics import coincidence_determinant, coincidence_log_count
from app.services.errors import ConsistencyError, NotConfinedError
from app.services.finitefield import ExtField, polynomial_period

logger = logging.getLogger(__name__)


class Provenance(str, Enum):
    FIELD_SIDE = "field_side"
    SEQUENCE_SIDE = "sequence_side"


class LinearOperatorFp:
    """An F_p-linear endomorphism of an rN-dimensional space, as a dense matrix."""

    def __init__(self, matrix: np.ndarray, p: int, provenance: Provenance, params: Dict[str, Any]):
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("LinearOperatorFp needs a square matrix")
        self.matrix = fp_linalg.as_fp(matrix, p)
        self.p = p
        self.provenance = provenance
        self.params = params

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def nullity(self) -> int:
        return fp_linalg.nullity(self.matrix, self.p)

    def kernel(self) -> np.ndarray:
        return fp_linalg.nullspace(self.matrix, self.p)

    def __repr__(self) -> str:
        return f"LinearOperatorFp({self.provenance.value}, dim={self.dimension}, {self.params})"


@lru_cache(maxsize=64)
def _oracle_field(p: int, N: int, seed: int) -> ExtField:
    return ExtField(p, N, seed=seed)


def _check_args(n: int, k: int, N: int) -> None:
    if n < 1 or k < 0 or N < 1:
        raise ValueError(f"need n >= 1, k >= 0, N >= 1; got n={n}, k={k}, N={N}")


def field_operator(rule: Rule, n: int, k: int, N: int, seed: Optional[int] = None) -> LinearOperatorFp:
    """Matrix of sigma^n - F^k on F_{p^N}^r; negative Frobenius powers are read mod N."""
    _check_args(n, k, N)
    seed = settings.DEFAULT_SEED if seed is None else seed
    p, r = rule.p, rule.r
    field = _oracle_field(p, N, seed)
    frob = field.frobenius_matrix
    sigma = np.zeros((r * N, r * N), dtype=np.int64)
    for j, m in rule.local_rule().items():
        sigma = sigma + np.kron(np.array(m, dtype=np.int64), fp_linalg.matpow(frob, j % N, p))
    op = fp_linalg.matpow(sigma, n, p) - np.kron(fp_linalg.identity(r), fp_linalg.matpow(frob, k % N, p))
    return LinearOperatorFp(op, p, Provenance.FIELD_SIDE, {"n": n, "k": k, "N": N, "seed": seed})


def sequence_operator(rule: Rule, n: int, k: int, N: int) -> LinearOperatorFp:
    """Matrix of g^n - s^k on period-N configurations."""
    _check_args(n, k, N)
    p, r = rule.p, rule.r
    gn = transition_matrix(iterate(rule, n), N)
    sk = transition_matrix(iterate(Rule.shift(p, r), k), N)
    op = gn - sk
    return LinearOperatorFp(op, p, Provenance.SEQUENCE_SIDE, {"n": n, "k": k, "N": N})


def field_side_count(rule: Rule, n: int, k: int, N: int, seed: Optional[int] = None) -> int:
    """log_p #{x in F_{p^N}^r : sigma^n(x) = F^k(x)}."""
    return field_operator(rule, n, k, N, seed).nullity()


def sequence_side_count(rule: Rule, n: int, k: int, N: int) -> int:
    """log_p #{cfg of period dividing N : g^n(cfg) = s^k(cfg)}."""
    return sequence_operator(rule, n, k, N).nullity()


def certified_period(rule: Rule, n: int, k: int) -> Optional[int]:
    """
    A period shared by every solution of g^n(y) = s^k(y), or None when there are infinitely many.

    Solutions are annihilated by D = det(G^n - Z^k I) acting as a shift polynomial,
    so each one is periodic with period dividing the order of Z modulo D.
    """
    det = coincidence_determinant(rule, n, k)
    if det.is_zero:
        return None
    return polynomial_period(det.unit_part)


def ladder(j_max: Optional[int] = None) -> List[int]:
    """Distinct values of lcm(1..j) for j <= j_max."""
    j_max = settings.LADDER_J_MAX if j_max is None else j_max
    values: List[int] = []
    current = 1
    for j in range(1, j_max + 1):
        current = lcm(current, j)
        if current not in values:
            values.append(current)
    return values


class StabilizedCount(BaseModel):
    model_config = ConfigDict(frozen=True)

    exponent: int = Field(..., description="Largest oracle exponent seen along the ladder")
    closed_form: int = Field(..., description="deg - val of det(G^n - Z^k I)")
    attained: bool
    attained_at: Optional[int] = Field(None, description="Smallest ladder N reaching the closed form")
    ladder: List[int]
    certified_period: Optional[int] = None
    certified: bool = Field(False, description="The certified period was within the cap and evaluated")
    status: str = Field(..., description="'equal' or 'lower bound only'")


def stabilized_count(
    rule: Rule,
    n: int,
    k: int = 0,
    max_dim: Optional[int] = None,
    j_max: Optional[int] = None,
    seed: Optional[int] = None,
) -> StabilizedCount:
    """
    Maximum oracle exponent over the lcm ladder, compared with the closed form.

    Ladder entries are evaluated on the field side. The certified period is
    evaluated on the sequence side when r*N fits under max_dim.

    Raises:
        NotConfinedError: if the closed form is infinite
        ConsistencyError: if an oracle count exceeds the closed form
    """
    max_dim = settings.ORACLE_MAX_DIM if max_dim is None else max_dim
    closed = coincidence_log_count(rule, n, k)
    period = certified_period(rule, n, k)
    if period is None:
        raise NotConfinedError(f"coincidence set of g^{n} and s^{k} is infinite for {rule}")
    steps = [N for N in ladder(j_max) if rule.r * N <= max_dim]
    best = 0
    attained_at = None
    for N in steps:
        value = field_side_count(rule, n, k, N, seed)
        if value > closed:
            raise ConsistencyError(f"oracle exponent {value} at N={N} exceeds closed form {closed} for {rule}")
        best = max(best, value)
        if value == closed and attained_at is None:
            attained_at = N
    certified = rule.r * period <= max_dim
    if certified:
        value = sequence_side_count(rule, n, k, period)
        if value != closed:
            raise ConsistencyError(
                f"sequence side at the certified period {period} gives {value}, closed form {closed} for {rule}"
            )
        best = closed
        steps = sorted(set(steps) | {period})
        if attained_at is None:
            attained_at = period
    attained = best == closed
    logger.debug("stabilized count n=%d k=%d: %d/%d ladder=%s period=%s", n, k, best, closed, steps, period)
    return StabilizedCount(
        exponent=best,
        closed_form=closed,
        attained=attained,
        attained_at=attained_at,
        ladder=steps,
        certified_period=period,
        certified=certified,
        status="equal" if attained else "lower bound only",
    )


def exhaustive_config_search(
    rule: Rule, n: int, N: int, bound: Optional[int] = None
) -> List[PeriodicConfig]:
    """
    All configurations of period dividing N fixed by g^n, by enumeration.

    Raises:
        ValueError: if p^{rN} exceeds the bound
    """
    bound = settings.SEARCH_BOUND if bound is None else bound
    p, r = rule.p, rule.r
    if p ** (r * N) > bound:
        raise ValueError(f"p^(rN) = {p}^{r * N} exceeds the search bound {bound}")
    gn = iterate(rule, n)
    found = []
    for values in product(range(p), repeat=r * N):
        cfg = PeriodicConfig.from_vector(p, r, values)
        if apply(gn, cfg).cells == cfg.cells:
            found.append(cfg)
    return found
