"""Extension fields F_{p^N} = F_p[x]/(modulus) in the power basis."""
import logging
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from math import lcm
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy import divisors, factorint
from sympy.polys import galoistools as gt
from sympy.polys.domains import ZZ

from app.config import settings
from app.services import fp_linalg
from app.services.algebra import DensePoly, check_prime
from app.services.errors import SearchExhaustedError

logger = logging.getLogger(__name__)


def random_irreducible(p: int, N: int, seed: Optional[int] = None) -> DensePoly:
    """
    Seeded search for a monic irreducible polynomial of degree N over F_p.

    Args:
        p: Prime
        N: Degree >= 1
        seed: PRNG seed (settings.DEFAULT_SEED when None)

    Returns:
        Monic irreducible DensePoly of degree N

    Raises:
        SearchExhaustedError: if MAX_ATTEMPTS candidates were all reducible
    """
    check_prime(p)
    if N < 1:
        raise ValueError(f"extension degree must be >= 1, got {N}")
    rng = random.Random(settings.DEFAULT_SEED if seed is None else seed)
    for attempt in range(settings.MAX_ATTEMPTS):
        candidate = DensePoly(p, tuple(rng.randrange(p) for _ in range(N)) + (1,))
        if gt.gf_irreducible_p(candidate.to_gf(), p, ZZ):
            logger.debug("irreducible of degree %d over F_%d after %d attempts", N, p, attempt + 1)
            return candidate
    raise SearchExhaustedError(
        f"no irreducible polynomial of degree {N} over F_{p} in {settings.MAX_ATTEMPTS} attempts"
    )


class ExtField:
    """F_{p^N} with a fixed monic irreducible modulus."""

    def __init__(self, p: int, N: int, modulus: Optional[DensePoly] = None, seed: Optional[int] = None):
        self.p = check_prime(p)
        if N < 1:
            raise ValueError(f"extension degree must be >= 1, got {N}")
        self.N = N
        if modulus is None:
            modulus = random_irreducible(p, N, seed)
        if modulus.p != p or modulus.degree != N or not modulus.is_monic():
            raise ValueError(f"modulus must be monic of degree {N} over F_{p}, got {modulus}")
        if not modulus.is_irreducible():
            raise ValueError(f"modulus {modulus} is reducible over F_{p}")
        self.modulus = modulus
        self._modulus_gf = modulus.to_gf()

    @property
    def order(self) -> int:
        return self.p ** self.N

    def _key(self) -> Tuple[int, int, Tuple[int, ...]]:
        return self.p, self.N, self.modulus.coeffs

    def __eq__(self, other) -> bool:
        return isinstance(other, ExtField) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f"ExtField(p={self.p}, N={self.N}, modulus={self.modulus.format('x')})"

    def element(self, coeffs: Sequence[int]) -> "ExtElem":
        return ExtElem(self, tuple(coeffs))

    def from_poly(self, f: DensePoly) -> "ExtElem":
        return self._from_gf(gt.gf_rem(f.to_gf(), self._modulus_gf, self.p, ZZ))

    def _from_gf(self, f: Sequence) -> "ExtElem":
        return ExtElem(self, tuple(int(c) for c in reversed(f)))

    @property
    def zero(self) -> "ExtElem":
        return ExtElem(self, ())

    @property
    def one(self) -> "ExtElem":
        return ExtElem(self, (1,))

    @property
    def gen(self) -> "ExtElem":
        """The class of x."""
        return self.from_poly(DensePoly.monomial(self.p, 1))

    def elements(self) -> Iterator["ExtElem"]:
        for coeffs in product(range(self.p), repeat=self.N):
            yield ExtElem(self, coeffs)

    def random_element(self, rng: random.Random) -> "ExtElem":
        return ExtElem(self, tuple(rng.randrange(self.p) for _ in range(self.N)))

    @cached_property
    def frobenius_matrix(self) -> np.ndarray:
        """Columns are the coordinates of (x^j)^p."""
        xp = gt.gf_pow_mod([1, 0], self.p, self._modulus_gf, self.p, ZZ)
        cols = []
        power = [1]
        for _ in range(self.N):
            cols.append(self._from_gf(power).coeffs)
            power = gt.gf_rem(gt.gf_mul(power, xp, self.p, ZZ), self._modulus_gf, self.p, ZZ)
        return np.array(cols, dtype=np.int64).T

    @cached_property
    def trace_vector(self) -> np.ndarray:
        """tr_{N,1}(x^j) for j < N; the absolute trace is linear in coordinates."""
        values = []
        for j in range(self.N):
            basis = ExtElem(self, (0,) * j + (1,))
            values.append(rel_trace(basis, 1).coeffs[0])
        return np.array(values, dtype=np.int64)


@dataclass(frozen=True)
class ExtElem:
    """Element of an ExtField; coeffs[i] is the coordinate on x^i."""

    field: ExtField
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        p, N = self.field.p, self.field.N
        values = [int(c) % p for c in self.coeffs]
        if len(values) > N:
            raise ValueError(f"{len(values)} coordinates for a degree-{N} field")
        values += [0] * (N - len(values))
        object.__setattr__(self, "coeffs", tuple(values))

    def vector(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=np.int64)

    def _gf(self) -> List[int]:
        return gt.gf_strip(list(reversed(self.coeffs)))

    def _check(self, other) -> "ExtElem":
        if isinstance(other, int):
            return ExtElem(self.field, (other,))
        if not isinstance(other, ExtElem):
            raise TypeError(f"cannot combine ExtElem with {type(other).__name__}")
        if other.field != self.field:
            raise ValueError("elements of different fields")
        return other

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, other) -> "ExtElem":
        other = self._check(other)
        return ExtElem(self.field, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __sub__(self, other) -> "ExtElem":
        other = self._check(other)
        return ExtElem(self.field, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "ExtElem":
        return ExtElem(self.field, tuple(-a for a in self.coeffs))

    def __mul__(self, other) -> "ExtElem":
        other = self._check(other)
        f = self.field
        prod = gt.gf_mul(self._gf(), other._gf(), f.p, ZZ)
        return f._from_gf(gt.gf_rem(prod, f._modulus_gf, f.p, ZZ))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ExtElem":
        f = self.field
        if n < 0:
            if self.is_zero:
                raise ZeroDivisionError("0 has no inverse")
            n %= f.order - 1
        return f._from_gf(gt.gf_pow_mod(self._gf(), n, f._modulus_gf, f.p, ZZ))

    def __repr__(self) -> str:
        return f"ExtElem({DensePoly(self.field.p, self.coeffs).format('x')})"


def frobenius_power(x: ExtElem, k: int) -> ExtElem:
    """x^(p^(k mod N))."""
    f = x.field
    k %= f.N
    if k == 0 or x.is_zero:
        return x
    v = x.vector()
    fr = f.frobenius_matrix
    for _ in range(k):
        v = (fr @ v) % f.p
    return ExtElem(f, tuple(int(c) for c in v))


def degree_over_prime_field(x: ExtElem) -> int:
    """Least k with x^(p^k) = x, i.e. [F_p(x) : F_p]."""
    for k in divisors(x.field.N):
        if frobenius_power(x, k) == x:
            return k
    return x.field.N


def in_subfield(x: ExtElem, M: int) -> bool:
    return frobenius_power(x, M) == x


def rel_trace(x: ExtElem, M: int, level: Optional[int] = None) -> ExtElem:
    """
    Relative trace tr_{level,M}(x) = sum_{i < level/M} x^(p^(M*i)).

    Args:
        x: Element lying in the subfield F_{p^level}
        M: Target subfield degree, M | level
        level: Degree of the subfield x is taken in (the whole field when None)

    Raises:
        ValueError: if M does not divide level, level does not divide N, or x is outside F_{p^level}
    """
    N = x.field.N
    level = N if level is None else level
    if level < 1 or N % level:
        raise ValueError(f"level {level} does not divide the field degree {N}")
    if M < 1 or level % M:
        raise ValueError(f"{M} does not divide {level}")
    if level != N and not in_subfield(x, level):
        raise ValueError(f"{x} does not lie in the subfield of degree {level}")
    total = x.field.zero
    term = x
    for _ in range(level // M):
        total = total + term
        term = frobenius_power(term, M)
    return total


def absolute_trace(x: ExtElem) -> int:
    """tr_{N,1}(x) as an integer in [0, p)."""
    f = x.field
    return int(f.trace_vector @ x.vector()) % f.p


def conjugates(x: ExtElem, count: Optional[int] = None) -> List[ExtElem]:
    """[x, x^p, ..., x^(p^(count-1))]."""
    count = x.field.N if count is None else count
    out = [x]
    for _ in range(count - 1):
        out.append(frobenius_power(out[-1], 1))
    return out


def is_normal_in_subfield(alpha: ExtElem, M: int) -> bool:
    """True iff alpha lies in F_{p^M} and its M conjugates are F_p-independent."""
    if alpha.field.N % M or not in_subfield(alpha, M):
        return False
    rows = np.array([c.coeffs for c in conjugates(alpha, M)], dtype=np.int64)
    return fp_linalg.rank(rows, alpha.field.p) == M


def is_normal_generator(alpha: ExtElem) -> bool:
    return is_normal_in_subfield(alpha, alpha.field.N)


def find_normal_generator(field: ExtField, seed: Optional[int] = None) -> ExtElem:
    """
    Seeded random search for a normal basis generator.

    Raises:
        SearchExhaustedError: if MAX_ATTEMPTS candidates failed
    """
    rng = random.Random(settings.DEFAULT_SEED if seed is None else seed)
    for attempt in range(settings.MAX_ATTEMPTS):
        candidate = field.random_element(rng)
        if is_normal_generator(candidate):
            logger.debug("normal generator found for %r after %d attempts", field, attempt + 1)
            return candidate
    raise SearchExhaustedError(f"no normal generator of {field!r} in {settings.MAX_ATTEMPTS} attempts")


def trace_pairing_matrix(field: ExtField) -> np.ndarray:
    """Gram matrix tr(x^i x^j) of the trace form on the power basis."""
    N = field.N
    powers = [field.one]
    for _ in range(2 * N - 2):
        powers.append(powers[-1] * field.gen)
    traces = [absolute_trace(e) for e in powers]
    return np.array([[traces[i + j] for j in range(N)] for i in range(N)], dtype=np.int64)


def multiplication_matrix(beta: ExtElem) -> np.ndarray:
    """Matrix of y -> beta*y; column j holds beta*x^j."""
    f = beta.field
    cols = [(beta * ExtElem(f, (0,) * j + (1,))).coeffs for j in range(f.N)]
    return np.array(cols, dtype=np.int64).T


def frobenius_matrix(field: ExtField) -> np.ndarray:
    return field.frobenius_matrix.copy()


def multiplicative_order(beta: ExtElem) -> int:
    """
    Least m >= 1 with beta^m = 1.

    The group order p^k - 1 (k = degree of beta over F_p) is factored and
    prime factors are stripped while beta^(order/l) stays 1.
    """
    if beta.is_zero:
        raise ValueError("multiplicative order of 0 is undefined")
    one = beta.field.one
    order = beta.field.p ** degree_over_prime_field(beta) - 1
    for prime in factorint(order):
        while order % prime == 0 and beta ** (order // prime) == one:
            order //= prime
    return order


def polynomial_period(f: DensePoly) -> int:
    """
    Order of x modulo f, for f with f(0) != 0.

    With f = prod g_i^e_i this is lcm(ord(x mod g_i)) * p^t, t the least with p^t >= max e_i.
    """
    if f.is_zero or f.coeffs[0] == 0:
        raise ValueError(f"{f} must have a nonzero constant term")
    if f.degree == 0:
        return 1
    p = f.p
    period = 1
    top = 1
    for g, e in f.factor():
        period = lcm(period, root_order(g))
        top = max(top, e)
    power = 1
    while power < top:
        power *= p
    return period * power


@lru_cache(maxsize=256)
def _root_field(g: DensePoly) -> ExtField:
    return ExtField(g.p, int(g.degree), modulus=g)


def root_order(g: DensePoly) -> int:
    """Multiplicative order of the roots of a monic irreducible g with g(0) != 0."""
    return multiplicative_order(_root_field(g).gen)
