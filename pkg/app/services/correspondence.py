"""The map iota from F_{p^N}^r to period-N configurations, and its verification.

iota(x)_j = (tr(alpha * x_i^(p^j)))_i where alpha is a normal generator of the
top field F_{p^Nmax} and tr is the absolute trace. Subfields F_{p^N}, N | Nmax,
are the Frobenius-fixed subsets of the top field; each gets the normal basis
{alpha_N^(p^i)} with alpha_N = tr_{Nmax,N}(alpha).
"""
import logging
import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, computed_field
from sympy import divisors

from app.config import settings
from app.services import fp_linalg
from app.services.automaton import PeriodicConfig, Rule, is_one_sided, iterate, shift_by, transition_matrix
from app.services.errors import ConsistencyError
from app.services.finitefield import (
    ExtElem,
    ExtField,
    absolute_trace,
    conjugates,
    find_normal_generator,
    frobenius_power,
    in_subfield,
    is_normal_generator,
    is_normal_in_subfield,
    rel_trace,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GeneratorChain:
    """Trace-compatible normal generators alpha_N of F_{p^N} for every N | Nmax."""

    top_field: ExtField
    alpha: ExtElem
    alpha_at: Dict[int, ExtElem]
    seed: int

    @property
    def p(self) -> int:
        return self.top_field.p

    @property
    def n_max(self) -> int:
        return self.top_field.N

    def levels(self) -> List[int]:
        return sorted(self.alpha_at)


def build_chain(p: int, n_max: int, seed: Optional[int] = None) -> GeneratorChain:
    """
    Build the top field, a normal generator, and its traces to every subfield.

    Raises:
        ConsistencyError: if a trace is not normal or the traces are not compatible
    """
    seed = settings.DEFAULT_SEED if seed is None else seed
    field = ExtField(p, n_max, seed=seed)
    alpha = find_normal_generator(field, seed)
    if not is_normal_generator(alpha):
        raise ConsistencyError(f"{alpha!r} is not a normal generator of {field!r}")
    alpha_at = {int(N): rel_trace(alpha, int(N)) for N in divisors(n_max)}
    for N, alpha_n in alpha_at.items():
        if not is_normal_in_subfield(alpha_n, N):
            raise ConsistencyError(f"trace of {alpha!r} to degree {N} is not a normal generator")
        for M in divisors(N):
            if rel_trace(alpha_n, int(M), level=N) != alpha_at[int(M)]:
                raise ConsistencyError(f"tr_{N},{M}(alpha_{N}) != alpha_{M} for seed {seed}")
    logger.info("generator chain over %r with seed %d", field, seed)
    return GeneratorChain(field, alpha, alpha_at, seed)


def _check_level(chain: GeneratorChain, N: int) -> None:
    if N < 1 or chain.n_max % N:
        raise ValueError(f"level {N} does not divide Nmax = {chain.n_max}")


@lru_cache(maxsize=None)
def subfield_basis(chain: GeneratorChain, N: int) -> Tuple[ExtElem, ...]:
    """Normal basis alpha_N, alpha_N^p, ..., alpha_N^(p^(N-1)) of F_{p^N}."""
    _check_level(chain, N)
    return tuple(conjugates(chain.alpha_at[N], N))


@lru_cache(maxsize=None)
def _basis_matrix(chain: GeneratorChain, N: int) -> np.ndarray:
    return np.array([b.coeffs for b in subfield_basis(chain, N)], dtype=np.int64).T


def element_from_coords(chain: GeneratorChain, N: int, coords: Sequence[int]) -> ExtElem:
    vec = (_basis_matrix(chain, N) @ np.array(coords, dtype=np.int64)) % chain.p
    return ExtElem(chain.top_field, tuple(int(v) for v in vec))


def coords_of(chain: GeneratorChain, x: ExtElem, N: int) -> Tuple[int, ...]:
    """Coordinates of x in the normal basis of F_{p^N}."""
    return tuple(int(v) for v in fp_linalg.solve(_basis_matrix(chain, N), x.vector(), chain.p))


def iota_scalar(chain: GeneratorChain, x: ExtElem, N: int) -> Tuple[int, ...]:
    """(tr(alpha * x^(p^j)))_{j < N}."""
    values = []
    y = x
    for _ in range(N):
        values.append(absolute_trace(chain.alpha * y))
        y = frobenius_power(y, 1)
    return tuple(values)


def iota(chain: GeneratorChain, x: Sequence[ExtElem], N: int) -> PeriodicConfig:
    """
    Period-N configuration whose cell j is (tr(alpha * x_i^(p^j)))_i.

    Raises:
        ValueError: if N does not divide Nmax or a coordinate lies outside F_{p^N}
    """
    _check_level(chain, N)
    if not x:
        raise ValueError("iota needs at least one coordinate")
    for xi in x:
        if not in_subfield(xi, N):
            raise ValueError(f"{xi!r} does not lie in the subfield of degree {N}")
    rows = [iota_scalar(chain, xi, N) for xi in x]
    return PeriodicConfig(chain.p, tuple(tuple(row[j] for row in rows) for j in range(N)))


def frobenius_vector(x: Sequence[ExtElem], k: int) -> List[ExtElem]:
    return [frobenius_power(xi, k) for xi in x]


def apply_sigma(rule: Rule, x: Sequence[ExtElem]) -> List[ExtElem]:
    """sigma(x) = sum_j m_j F^j(x), Frobenius entrywise first, then the F_p-matrix."""
    if len(x) != rule.r:
        raise ValueError(f"sigma of a rank-{rule.r} rule applied to {len(x)} coordinates")
    field = x[0].field
    out = [field.zero] * rule.r
    for j, m in rule.local_rule().items():
        fx = frobenius_vector(x, j)
        for a in range(rule.r):
            for b in range(rule.r):
                if m[a][b]:
                    out[a] = out[a] + fx[b] * m[a][b]
    return out


def verify_galois_shift(chain: GeneratorChain, x: Sequence[ExtElem], N: int, k: int) -> bool:
    """iota(F^k x) == shift_by(iota(x), k)."""
    return iota(chain, frobenius_vector(x, k), N) == shift_by(iota(chain, x, N), k)


@lru_cache(maxsize=None)
def iota_coordinate_matrix(chain: GeneratorChain, r: int, N: int) -> np.ndarray:
    """
    rN x rN matrix of iota from basis coordinates (block a holds x_a) to
    configuration vectors (index j*r + a).
    """
    images = [iota_scalar(chain, b, N) for b in subfield_basis(chain, N)]
    m = np.zeros((r * N, r * N), dtype=np.int64)
    for a in range(r):
        for i, img in enumerate(images):
            for j in range(N):
                m[j * r + a, a * N + i] = img[j]
    return m


def sigma_coordinate_matrix(chain: GeneratorChain, rule: Rule, N: int) -> np.ndarray:
    """Matrix of sigma on F_{p^N}^r in basis coordinates, built from field arithmetic."""
    r = rule.r
    basis = subfield_basis(chain, N)
    zero = chain.top_field.zero
    cols = []
    for a in range(r):
        for b in basis:
            x = [zero] * r
            x[a] = b
            image = apply_sigma(rule, x)
            cols.append([c for y in image for c in coords_of(chain, y, N)])
    return np.array(cols, dtype=np.int64).T


class CheckResult(BaseModel):
    name: str
    passed: bool
    checked: int = Field(0, description="Number of elements or pairs examined")
    witness: Optional[str] = Field(None, description="First counterexample, if any")


class CorrespondenceReport(BaseModel):
    p: int
    r: int
    n: int
    N: int
    n_max: int
    seed: int
    one_sided: bool
    exhaustive: bool
    field_fixed_log: int
    sequence_fixed_log: int
    checks: List[CheckResult]

    @computed_field
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _random_coords(rng: random.Random, p: int, size: int) -> Tuple[int, ...]:
    return tuple(rng.randrange(p) for _ in range(size))


def _exhaustive_properties(chain: GeneratorChain, r: int, N: int, samples: int, rng: random.Random) -> List[CheckResult]:
    p = chain.p
    basis_images = np.array([iota_scalar(chain, b, N) for b in subfield_basis(chain, N)], dtype=np.int64)
    image_of: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
    coords_by_elem: Dict[ExtElem, Tuple[int, ...]] = {}
    linear_witness = None
    for coords in product(range(p), repeat=N):
        x = element_from_coords(chain, N, coords)
        img = iota_scalar(chain, x, N)
        expected = tuple(int(v) for v in (np.array(coords, dtype=np.int64) @ basis_images) % p)
        if img != expected and linear_witness is None:
            linear_witness = f"coords {coords}: iota {img} != linear combination {expected}"
        image_of[coords] = img
        coords_by_elem[x] = coords
    frob_of = {}
    for x, coords in coords_by_elem.items():
        fx = frobenius_power(x, 1)
        frob_of[coords] = coords_by_elem.get(fx)

    def cfg_of(vec) -> PeriodicConfig:
        return PeriodicConfig(p, tuple(tuple(image_of[c][j] for c in vec) for j in range(N)))

    domain = list(product(image_of, repeat=r))
    images = set()
    equiv_witness = None
    for vec in domain:
        cfg = cfg_of(vec)
        images.add(cfg)
        if equiv_witness is None:
            fvec = tuple(frob_of[c] for c in vec)
            if any(c is None for c in fvec):
                equiv_witness = f"Frobenius leaves the subfield at {vec}"
            elif cfg_of(fvec) != shift_by(cfg, 1):
                equiv_witness = f"iota(F x) != s(iota(x)) at {vec}"

    for _ in range(samples):
        if linear_witness is not None:
            break
        u, v = rng.choice(domain), rng.choice(domain)
        w = tuple(
            coords_by_elem[element_from_coords(chain, N, cu) + element_from_coords(chain, N, cv)]
            for cu, cv in zip(u, v)
        )
        if cfg_of(w) != cfg_of(u) + cfg_of(v):
            linear_witness = f"iota(x + y) != iota(x) + iota(y) at {u}, {v}"

    total = p ** (r * N)
    missing = next(
        (vals for vals in product(range(p), repeat=r * N)
         if PeriodicConfig.from_vector(p, r, vals) not in images),
        None,
    )
    return [
        CheckResult(name="additivity", passed=linear_witness is None, checked=p ** N + samples, witness=linear_witness),
        CheckResult(
            name="injectivity",
            passed=len(images) == total,
            checked=total,
            witness=None if len(images) == total else f"{total - len(images)} collisions",
        ),
        CheckResult(name="equivariance", passed=equiv_witness is None, checked=total, witness=equiv_witness),
        CheckResult(
            name="image",
            passed=missing is None,
            checked=total,
            witness=None if missing is None else f"configuration {list(missing)} is not an image",
        ),
    ]


def _sampled_properties(chain: GeneratorChain, r: int, N: int, samples: int, rng: random.Random) -> List[CheckResult]:
    p = chain.p

    def sample() -> List[ExtElem]:
        return [element_from_coords(chain, N, _random_coords(rng, p, N)) for _ in range(r)]

    linear_witness = None
    equiv_witness = None
    for _ in range(samples):
        x, y = sample(), sample()
        if linear_witness is None and iota(chain, [u + v for u, v in zip(x, y)], N) != iota(chain, x, N) + iota(chain, y, N):
            linear_witness = f"iota(x + y) != iota(x) + iota(y) at {x}, {y}"
        if equiv_witness is None and not verify_galois_shift(chain, x, N, 1):
            equiv_witness = f"iota(F x) != s(iota(x)) at {x}"
    full_rank = fp_linalg.rank(iota_coordinate_matrix(chain, r, N), p) == r * N
    rank_witness = None if full_rank else "iota matrix is singular"
    return [
        CheckResult(name="additivity", passed=linear_witness is None, checked=samples, witness=linear_witness),
        CheckResult(name="injectivity", passed=full_rank, checked=r * N, witness=rank_witness),
        CheckResult(name="equivariance", passed=equiv_witness is None, checked=samples, witness=equiv_witness),
        CheckResult(name="image", passed=full_rank, checked=r * N, witness=rank_witness),
    ]


@lru_cache(maxsize=256)
def _iota_properties(chain: GeneratorChain, r: int, N: int, bound: int, samples: int, seed: int) -> Tuple[CheckResult, ...]:
    rng = random.Random(seed)
    if chain.p ** (r * N) <= bound:
        return tuple(_exhaustive_properties(chain, r, N, samples, rng))
    return tuple(_sampled_properties(chain, r, N, samples, rng))


def verify_iota_properties(
    chain: GeneratorChain,
    r: int,
    N: int,
    exhaustive_bound: Optional[int] = None,
    sample_count: Optional[int] = None,
    seed: Optional[int] = None,
) -> List[CheckResult]:
    """Additivity, injectivity, shift-Frobenius equivariance and image of iota on F_{p^N}^r."""
    _check_level(chain, N)
    bound = settings.EXHAUSTIVE_BOUND if exhaustive_bound is None else exhaustive_bound
    samples = settings.SAMPLE_COUNT if sample_count is None else sample_count
    seed = chain.seed if seed is None else seed
    return list(_iota_properties(chain, r, N, bound, samples, seed))


def _span(basis: np.ndarray, p: int, limit: int) -> Optional[List[np.ndarray]]:
    """All F_p-combinations of the rows of basis, or None when there are more than limit."""
    if p ** len(basis) > limit:
        return None
    width = basis.shape[1] if basis.ndim == 2 else 0
    return [
        (np.array(c, dtype=np.int64) @ basis) % p if len(basis) else np.zeros(width, dtype=np.int64)
        for c in product(range(p), repeat=len(basis))
    ]


def verify_fixed_point_matching(
    chain: GeneratorChain,
    rule: Rule,
    n: int,
    N: int,
    search_bound: Optional[int] = None,
) -> Tuple[CheckResult, CheckResult, int, int]:
    """
    iota maps {x in F_{p^N}^r : sigma^n(x) = x} onto {cfg of period | N : g^n(cfg) = cfg}.

    Returns:
        (conjugacy check, matching check, field-side log count, sequence-side log count)
    """
    _check_level(chain, N)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    bound = settings.SEARCH_BOUND if search_bound is None else search_bound
    p, r = rule.p, rule.r
    if p != chain.p:
        raise ValueError(f"rule over F_{p} with a chain over F_{chain.p}")
    dim = r * N
    eye = fp_linalg.identity(dim)
    sigma = sigma_coordinate_matrix(chain, rule, N)
    j = iota_coordinate_matrix(chain, r, N)
    g = transition_matrix(rule, N)

    # iota o sigma = g o iota on coordinates
    conj_ok = not ((j @ sigma - g @ j) % p).any()
    conjugacy = CheckResult(
        name="conjugacy",
        passed=conj_ok,
        checked=dim,
        witness=None if conj_ok else "iota(sigma(x)) != g(iota(x)) on a basis vector",
    )

    field_kernel = fp_linalg.nullspace(fp_linalg.matpow(sigma, n, p) - eye, p)
    seq_kernel = fp_linalg.nullspace(transition_matrix(iterate(rule, n), N) - eye, p)
    field_log, seq_log = len(field_kernel), len(seq_kernel)
    witness = None
    if field_log != seq_log:
        witness = f"field side has p^{field_log} fixed points, sequence side p^{seq_log}"
    checked = field_log
    field_points = _span(field_kernel, p, bound)
    if witness is None and field_points is not None:
        seq_set = {PeriodicConfig.from_vector(p, r, v) for v in _span(seq_kernel, p, bound)}
        matched = set()
        for coords in field_points:
            x = [element_from_coords(chain, N, coords[a * N:(a + 1) * N]) for a in range(r)]
            y = x
            for _ in range(n):
                y = apply_sigma(rule, y)
            if y != x:
                witness = f"sigma^{n} does not fix kernel element {list(coords)}"
                break
            cfg = iota(chain, x, N)
            if cfg not in seq_set:
                witness = f"iota({list(coords)}) = {cfg.to_lists()} is not fixed by g^{n}"
                break
            matched.add(cfg)
        if witness is None and matched != seq_set:
            witness = f"{len(seq_set - matched)} sequence-side fixed points are not images"
        checked = len(field_points)
    elif witness is None:
        images = (j @ field_kernel.T) % p
        residual = ((transition_matrix(iterate(rule, n), N) - eye) @ images) % p
        if residual.any() or fp_linalg.rank(images.T, p) != field_log:
            witness = "iota does not map the field-side kernel onto the sequence-side kernel"
    matching = CheckResult(name="fixed_point_matching", passed=witness is None, checked=checked, witness=witness)
    return conjugacy, matching, field_log, seq_log


def verify_theorem_main(
    chain: GeneratorChain,
    rule: Rule,
    n: int,
    N: int,
    exhaustive_bound: Optional[int] = None,
    sample_count: Optional[int] = None,
    search_bound: Optional[int] = None,
) -> CorrespondenceReport:
    """All properties of iota at level N plus fixed-point matching for g^n."""
    bound = settings.EXHAUSTIVE_BOUND if exhaustive_bound is None else exhaustive_bound
    checks = verify_iota_properties(chain, rule.r, N, exhaustive_bound=bound, sample_count=sample_count)
    conjugacy, matching, field_log, seq_log = verify_fixed_point_matching(chain, rule, n, N, search_bound)
    report = CorrespondenceReport(
        p=rule.p,
        r=rule.r,
        n=n,
        N=N,
        n_max=chain.n_max,
        seed=chain.seed,
        one_sided=is_one_sided(rule),
        exhaustive=rule.p ** (rule.r * N) <= bound,
        field_fixed_log=field_log,
        sequence_fixed_log=seq_log,
        checks=checks + [conjugacy, matching],
    )
    if not report.passed:
        failed = [c.name for c in report.checks if not c.passed]
        logger.warning("correspondence checks failed at n=%d N=%d: %s", n, N, failed)
    return report


def verify_correspondence(
    chain: GeneratorChain, rule: Rule, n_values: Sequence[int] = (1, 2, 3, 4)
) -> List[CorrespondenceReport]:
    """verify_theorem_main for every level N | Nmax and every n in n_values."""
    return [
        verify_theorem_main(chain, rule, n, N)
        for N in chain.levels()
        for n in n_values
    ]
