"""Fixed-point counts, the invariants (a, t, varpi), zeta classification and orbit counts.

Conventions: G(Z) is the rule matrix, chi(lambda) = det(lambda*I - G) with
Laurent coefficients c_0..c_r. The two places are v_Z (AT_ZERO) and
-deg_Z (AT_INFINITY). A Newton polygon segment of slope mu carries eigenvalues
of valuation -mu.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import Decimal, localcontext
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field
from sympy import divisors, mobius, multiplicity

from app.config import settings
from app.services.algebra import (
    DensePoly,
    LaurentMatrix,
    LaurentPoly,
    char_poly,
    deg_val,
    laurent_det,
    matrix_power,
)
from app.services.automaton import Rule, iterate
from app.services.errors import ConsistencyError, NotConfinedError, RuleSpecError
from app.services.finitefield import root_order

logger = logging.getLogger(__name__)


class Place(str, Enum):
    """Places of F_p(Z) seen by the invariants."""
    AT_ZERO = "at_zero"
    AT_INFINITY = "at_infinity"


class ZetaKind(str, Enum):
    RATIONAL = "Rational"
    NATURAL_BOUNDARY_CANDIDATE = "NaturalBoundaryCandidate"


@dataclass(frozen=True)
class NewtonSegment:
    slope: Fraction
    length: int
    start: int
    height: int


@dataclass(frozen=True)
class NewtonPolygon:
    place: Place
    segments: Tuple[NewtonSegment, ...]
    zero_eigenvalue_count: int

    def valuations(self) -> List[Fraction]:
        """Valuations of the nonzero eigenvalues, with multiplicity."""
        return [-seg.slope for seg in self.segments for _ in range(seg.length)]

    def unit_segment(self) -> Optional[NewtonSegment]:
        return next((seg for seg in self.segments if seg.slope == 0), None)

    def rate(self) -> int:
        """sum over eigenvalues of max(-valuation, 0)."""
        total = sum((seg.slope * seg.length for seg in self.segments if seg.slope > 0), Fraction(0))
        if total.denominator != 1:
            raise ConsistencyError(f"non-integral rate {total} at {self.place.value}")
        return int(total)


class Invariants(BaseModel):
    """Invariants of a confined rule: log_p #Fix(g^n) = n*a - t_{gcd(n, varpi)} * p^{v_p(n)}."""

    model_config = ConfigDict(frozen=True)

    p: int = Field(..., description="Characteristic")
    confined: bool = Field(..., description="No eigenvalue is a root of unity")
    a: int = Field(..., ge=0, description="Linear growth rate of log_p #Fix(g^n)")
    varpi: int = Field(..., ge=1, description="Period of t, coprime to p")
    t: Dict[int, int] = Field(..., description="t_d for every divisor d of varpi")
    n_checked: int = Field(..., ge=0, description="Fixed-point formula verified for n = 1..n_checked")
    a_at_zero: int = Field(0, ge=0)
    a_at_infinity: int = Field(0, ge=0)
    t_at_zero: Dict[int, int] = Field(default_factory=dict)
    t_at_infinity: Dict[int, int] = Field(default_factory=dict)

    def t_for(self, n: int) -> int:
        return self.t[gcd(n, self.varpi)]

    def predicted_log_count(self, n: int) -> int:
        return n * self.a - self.t_for(n) * self.p ** multiplicity(self.p, n)


class ZetaClassification(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ZetaKind
    a: int
    truncated_series: List[int] = Field(..., description="Coefficients of z^0..z^order")


@lru_cache(maxsize=1024)
def _chi(rule: Rule) -> Tuple[LaurentPoly, ...]:
    return tuple(char_poly(rule.matrix))


@lru_cache(maxsize=8192)
def coincidence_determinant(rule: Rule, n: int, k: int) -> LaurentPoly:
    """det(G^n - Z^k I), cached per (rule, n, k)."""
    g = matrix_power(rule.matrix, n)
    return laurent_det(g - LaurentMatrix.identity(rule.p, rule.r).shifted(k))


def place_valuation(c: LaurentPoly, place: Place) -> int:
    return c.val if place is Place.AT_ZERO else -c.deg


def is_confined(rule: Rule, n_check: Optional[int] = None) -> bool:
    """
    True iff no eigenvalue of G(Z) is a root of unity.

    Writes chi(Z, lambda) = sum_k d_k(lambda) Z^k; a root of unity is an
    eigenvalue iff it is a common root of all d_k, so the rule is confined
    iff gcd_k d_k is a power of lambda. For confined rules det(G^n - I) is
    re-checked to be nonzero for n <= n_check (N_CHECK_MIN by default).
    """
    p, r = rule.p, rule.r
    slices: Dict[int, Dict[int, int]] = {}
    for j, c in enumerate(_chi(rule)):
        for e, v in c.terms().items():
            slices.setdefault(e, {})[j] = v
    h = DensePoly.zero(p)
    for terms in slices.values():
        h = h.gcd(DensePoly(p, tuple(terms.get(j, 0) for j in range(r + 1))))
    confined = not any(h.coeffs[:-1])
    logger.debug("confinedness gcd for %s: %s", rule, h.format("lambda"))
    if confined:
        for n in range(1, (n_check or settings.N_CHECK_MIN) + 1):
            if coincidence_determinant(rule, n, 0).is_zero:
                raise ConsistencyError(f"{rule} passed the gcd test but det(G^{n} - I) = 0")
    return confined


def coincidence_log_count(rule: Rule, n: int, k: int) -> int:
    """log_p #Coin(g^n, s^k) = deg - val of det(G^n - Z^k I)."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    det = coincidence_determinant(rule, n, k)
    if det.is_zero:
        raise NotConfinedError(f"det(G^{n} - Z^{k} I) vanishes for {rule}: infinitely many coincidences")
    deg, val = deg_val(det)
    return deg - val


def log_fix_count(rule: Rule, n: int) -> int:
    """log_p #Fix(g^n)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return coincidence_log_count(rule, n, 0)


def fix_count_table(rule: Rule, ns: Iterable[int], threads: Optional[int] = None) -> Dict[int, int]:
    """log_fix_count for every n in ns; determinants run on a thread pool when threads > 1."""
    ns = list(ns)
    threads = threads or settings.THREADS
    if threads > 1 and len(ns) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(lambda n: log_fix_count(rule, n), ns))
    else:
        values = [log_fix_count(rule, n) for n in ns]
    return dict(zip(ns, values))


def newton_polygon(chi: Sequence[LaurentPoly], place: Place) -> NewtonPolygon:
    """Lower convex hull of (j, v(c_j)) after stripping the zero eigenvalues."""
    if not chi or chi[-1] != LaurentPoly.one(chi[-1].p):
        raise ValueError("newton_polygon needs a monic characteristic polynomial")
    place = Place(place)
    k = next(j for j, c in enumerate(chi) if not c.is_zero)
    points = [(j, place_valuation(c, place)) for j, c in enumerate(chi) if j >= k and not c.is_zero]
    hull: List[Tuple[int, int]] = []
    for pt in points:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            if (x1 - x0) * (pt[1] - y0) - (y1 - y0) * (pt[0] - x0) > 0:
                break
            hull.pop()
        hull.append(pt)
    segments = tuple(
        NewtonSegment(Fraction(y1 - y0, x1 - x0), x1 - x0, x0, y0)
        for (x0, y0), (x1, y1) in zip(hull, hull[1:])
    )
    return NewtonPolygon(place, segments, k)


def rule_newton_polygon(rule: Rule, place: Place) -> NewtonPolygon:
    return newton_polygon(_chi(rule), place)


def place_rates(rule: Rule) -> Dict[Place, int]:
    """a_v for both places."""
    return {place: rule_newton_polygon(rule, place).rate() for place in Place}


def compute_a(rule: Rule) -> int:
    return sum(place_rates(rule).values())


def is_eventually_zero(rule: Rule) -> bool:
    """True iff G is nilpotent; the characteristic polynomial and G^r = 0 must agree."""
    nilpotent = all(c.is_zero for c in _chi(rule)[:-1])
    vanishes = iterate(rule, rule.r).matrix.is_zero
    if nilpotent != vanishes:
        raise ConsistencyError(f"chi = lambda^r is {nilpotent} but G^r = 0 is {vanishes} for {rule}")
    return nilpotent


def residual_data(rule: Rule, place: Place) -> List[Tuple[int, int]]:
    """
    (residue degree k, multiplicative order m) for every unit eigenvalue at `place`.

    The residual polynomial takes the leading term at `place` of each c_j on the
    slope-0 segment (zero where the valuation is above the segment).
    """
    place = Place(place)
    chi = _chi(rule)
    seg = rule_newton_polygon(rule, place).unit_segment()
    if seg is None:
        return []
    h = seg.height
    coeffs = []
    for j in range(seg.start, seg.start + seg.length + 1):
        c = chi[j]
        if c.is_zero or place_valuation(c, place) != h:
            coeffs.append(0)
        else:
            coeffs.append(c.coeff(h if place is Place.AT_ZERO else -h))
    residual = DensePoly(rule.p, tuple(coeffs))
    data: List[Tuple[int, int]] = []
    for factor, mult in residual.factor():
        data.extend([(int(factor.degree), root_order(factor))] * mult)
    logger.debug("residual polynomial at %s: %s -> %s", place.value, residual.format("lambda"), data)
    return data


def compute_varpi(rule: Rule) -> int:
    varpi = 1
    for place in Place:
        for _, m in residual_data(rule, place):
            varpi = lcm(varpi, m)
    return varpi


def compute_t(rule: Rule, a: int, varpi: int) -> Dict[int, int]:
    """t_d = a*d - log_fix_count(rule, d) for d | varpi."""
    t = {}
    for d in divisors(varpi):
        d = int(d)
        t[d] = a * d - log_fix_count(rule, d)
        if t[d] < 0:
            raise ConsistencyError(f"negative t_{d} = {t[d]} for {rule}")
    return t


def place_t(rule: Rule, varpi: int, rates: Dict[Place, int]) -> Tuple[Dict[int, int], Dict[int, int]]:
    """
    Per-place corrections: t^0_d = v_Z D + a_0 d and t^inf_d = a_inf d - deg_Z D with D = det(G^d - I).
    """
    at_zero, at_infinity = {}, {}
    for d in divisors(varpi):
        d = int(d)
        deg, val = deg_val(coincidence_determinant(rule, d, 0))
        at_zero[d] = val + rates[Place.AT_ZERO] * d
        at_infinity[d] = rates[Place.AT_INFINITY] * d - deg
        if at_zero[d] < 0 or at_infinity[d] < 0:
            raise ConsistencyError(f"negative per-place correction at d={d} for {rule}")
    return at_zero, at_infinity


def default_n_check(p: int, varpi: int) -> int:
    return max(settings.N_CHECK_MIN, 2 * varpi, 2 * p)


def invariants(rule: Rule, n_check: Optional[int] = None, threads: Optional[int] = None) -> Invariants:
    """
    Assemble (a, varpi, t) from Newton polygons and residual orders, then verify
    log_fix_count(rule, n) = n*a - t_{gcd(n, varpi)} * p^{v_p(n)} for n = 1..n_check.

    Raises:
        RuleSpecError: if n_check is below N_CHECK_MIN
        NotConfinedError: if the rule is not confined
        ConsistencyError: on any mismatch
    """
    p = rule.p
    if n_check is not None and n_check < settings.N_CHECK_MIN:
        raise RuleSpecError(f"n_check must be >= {settings.N_CHECK_MIN}, got {n_check}")
    if not is_confined(rule, n_check):
        raise NotConfinedError(f"{rule} is not confined: some eigenvalue is a root of unity")
    rates = place_rates(rule)
    a = sum(rates.values())
    varpi = compute_varpi(rule)
    if gcd(varpi, p) != 1:
        raise ConsistencyError(f"varpi = {varpi} is not coprime to p = {p}")
    t = compute_t(rule, a, varpi)
    t_zero, t_infinity = place_t(rule, varpi, rates)
    for d in t:
        if t_zero[d] + t_infinity[d] != t[d]:
            raise ConsistencyError(f"per-place corrections do not add up at d={d} for {rule}")

    n_check = n_check or default_n_check(p, varpi)
    result = Invariants(
        p=p,
        confined=True,
        a=a,
        varpi=varpi,
        t=t,
        n_checked=n_check,
        a_at_zero=rates[Place.AT_ZERO],
        a_at_infinity=rates[Place.AT_INFINITY],
        t_at_zero=t_zero,
        t_at_infinity=t_infinity,
    )
    for n, log_count in fix_count_table(rule, range(1, n_check + 1), threads).items():
        expected = result.predicted_log_count(n)
        if log_count != expected:
            raise ConsistencyError(
                f"fixed-point formula fails at n={n} for {rule}: determinant gives {log_count}, invariants give {expected}"
            )
    if (a == 0) != is_eventually_zero(rule):
        raise ConsistencyError(f"a = {a} disagrees with nilpotency for {rule}")
    logger.info("invariants for %s: a=%d varpi=%d t=%s", rule, a, varpi, t)
    return result


def zeta(rule: Rule, order: Optional[int] = None, inv: Optional[Invariants] = None) -> ZetaClassification:
    """
    Truncated exp(sum #Fix(g^n) z^n / n) and the Rational / NaturalBoundaryCandidate verdict.

    Uses n*c_n = sum_{k=1..n} #Fix(g^k) c_{n-k}; every coefficient must be an integer.
    """
    order = settings.ZETA_ORDER if order is None else order
    inv = inv or invariants(rule)
    p = rule.p
    counts = fix_count_table(rule, range(1, order + 1))
    series = [1]
    for n in range(1, order + 1):
        total = sum(p ** counts[k] * series[n - k] for k in range(1, n + 1))
        if total % n:
            raise ConsistencyError(f"zeta coefficient of z^{n} is not an integer for {rule}")
        series.append(total // n)
    rational = all(v == 0 for v in inv.t.values())
    if rational:
        expected = [p ** (inv.a * n) for n in range(order + 1)]
        if series != expected:
            raise ConsistencyError(f"t = 0 but zeta differs from 1/(1 - p^a z) for {rule}")
    kind = ZetaKind.RATIONAL if rational else ZetaKind.NATURAL_BOUNDARY_CANDIDATE
    return ZetaClassification(kind=kind, a=inv.a, truncated_series=series)


def orbit_counts(rule: Rule, l_max: Optional[int] = None) -> List[int]:
    """P_1..P_lmax by Moebius inversion of #Fix(g^d)."""
    l_max = settings.L_MAX if l_max is None else l_max
    p = rule.p
    logs = fix_count_table(rule, range(1, l_max + 1))
    counts = []
    for length in range(1, l_max + 1):
        total = sum(int(mobius(length // d)) * p ** logs[int(d)] for d in divisors(length))
        if total % length or total < 0:
            raise ConsistencyError(f"Moebius inversion gives {total}/{length} orbits for {rule}")
        counts.append(total // length)
    return counts


@dataclass(frozen=True)
class AsymptoticRow:
    length: int
    orbits: int
    main_term: Fraction
    ratio_squared: Fraction

    @property
    def residual_ratio(self) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = 30
            q = self.ratio_squared
            return (Decimal(q.numerator) / Decimal(q.denominator)).sqrt()


@dataclass(frozen=True)
class AsymptoticReport:
    rows: Tuple[AsymptoticRow, ...]
    bound: float
    bounded: bool

    @property
    def max_ratio(self) -> Decimal:
        return max((row.residual_ratio for row in self.rows), default=Decimal(0))


def asymptotic_report(
    rule: Rule,
    l_max: Optional[int] = None,
    inv: Optional[Invariants] = None,
    bound: Optional[float] = None,
) -> AsymptoticReport:
    """
    Compare P_l with p^{l a - t_l p^{v_p(l)}} / l.

    residual_ratio = |P_l - main_term| / p^{l a / 2}; it is kept squared as an
    exact fraction so the bound check is exact.
    """
    inv = inv or invariants(rule)
    if inv.a < 1:
        raise ValueError("asymptotic_report needs a >= 1")
    bound = settings.ASYMPTOTIC_BOUND if bound is None else bound
    p = rule.p
    rows = []
    for length, orbits in enumerate(orbit_counts(rule, l_max), start=1):
        main = Fraction(p ** inv.predicted_log_count(length), length)
        diff = orbits - main
        rows.append(AsymptoticRow(length, orbits, main, diff * diff / p ** (length * inv.a)))
    limit = Fraction(bound) ** 2
    bounded = all(row.ratio_squared <= limit for row in rows)
    return AsymptoticReport(tuple(rows), bound, bounded)


@dataclass(frozen=True)
class CountingRow:
    bound: int
    total: int
    normalized: Fraction


@dataclass(frozen=True)
class CountingFunction:
    rows: Tuple[CountingRow, ...]
    limit: Optional[Fraction]


def orbit_counting_function(
    rule: Rule, x_max: Optional[int] = None, inv: Optional[Invariants] = None
) -> CountingFunction:
    """pi(X) = sum_{l <= X} P_l with X*pi(X)/p^{aX}; the limit p^a/(p^a - 1) applies when t = 0 and a >= 1."""
    inv = inv or invariants(rule)
    p = rule.p
    rows = []
    total = 0
    for x, orbits in enumerate(orbit_counts(rule, x_max), start=1):
        total += orbits
        rows.append(CountingRow(x, total, Fraction(x * total, p ** (inv.a * x))))
    limit = None
    if inv.a >= 1 and all(v == 0 for v in inv.t.values()):
        limit = Fraction(p ** inv.a, p ** inv.a - 1)
    return CountingFunction(tuple(rows), limit)
