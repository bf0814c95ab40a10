"""Exact arithmetic over F_p: residues, dense and Laurent polynomials, Laurent matrices.

Dense polynomial arithmetic is delegated to sympy's galoistools, which works on
high-degree-first lists of integers; values here are stored low-degree-first.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from sympy import isprime
from sympy.polys import galoistools as gt
from sympy.polys.domains import ZZ

logger = logging.getLogger(__name__)

# degree of the zero polynomial
NEG_INF = float("-inf")


@lru_cache(maxsize=None)
def check_prime(p: int) -> int:
    """Return p if it is a prime >= 2, else raise ValueError."""
    if isinstance(p, bool) or not isinstance(p, int) or p < 2 or not isprime(p):
        raise ValueError(f"p must be a prime >= 2, got {p!r}")
    return p


@dataclass(frozen=True)
class PrimeFieldElem:
    """Residue class mod a prime p."""

    p: int
    value: int

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "value", int(self.value) % self.p)

    def _value_of(self, other) -> int:
        if isinstance(other, PrimeFieldElem):
            if other.p != self.p:
                raise ValueError(f"characteristic mismatch: {self.p} vs {other.p}")
            return other.value
        if isinstance(other, int):
            return other % self.p
        raise TypeError(f"cannot combine PrimeFieldElem with {type(other).__name__}")

    def __add__(self, other) -> "PrimeFieldElem":
        return PrimeFieldElem(self.p, self.value + self._value_of(other))

    __radd__ = __add__

    def __sub__(self, other) -> "PrimeFieldElem":
        return PrimeFieldElem(self.p, self.value - self._value_of(other))

    def __rsub__(self, other) -> "PrimeFieldElem":
        return PrimeFieldElem(self.p, self._value_of(other) - self.value)

    def __mul__(self, other) -> "PrimeFieldElem":
        return PrimeFieldElem(self.p, self.value * self._value_of(other))

    __rmul__ = __mul__

    def __neg__(self) -> "PrimeFieldElem":
        return PrimeFieldElem(self.p, -self.value)

    def inverse(self) -> "PrimeFieldElem":
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse in F_p")
        return PrimeFieldElem(self.p, pow(self.value, -1, self.p))

    def __truediv__(self, other) -> "PrimeFieldElem":
        return self * PrimeFieldElem(self.p, self._value_of(other)).inverse()

    def __pow__(self, n: int) -> "PrimeFieldElem":
        if n < 0:
            return self.inverse() ** (-n)
        return PrimeFieldElem(self.p, pow(self.value, n, self.p))

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __str__(self) -> str:
        return str(self.value)


class PrimeField:
    """The field F_p; construction validates p."""

    def __init__(self, p: int):
        self.p = check_prime(p)

    def __call__(self, value: int) -> PrimeFieldElem:
        return PrimeFieldElem(self.p, value)

    def elements(self) -> Iterator[PrimeFieldElem]:
        return (PrimeFieldElem(self.p, v) for v in range(self.p))

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"


def _strip(coeffs: Sequence, p: int) -> Tuple[int, ...]:
    values = [int(c) % p for c in coeffs]
    while values and values[-1] == 0:
        values.pop()
    return tuple(values)


@dataclass(frozen=True)
class DensePoly:
    """
    Polynomial over F_p; coeffs[i] is the residue of the coefficient of x^i.

    Residues are kept as plain ints for galoistools; coeff(i) and leading_coeff
    hand them out as PrimeFieldElem.
    """

    p: int
    coeffs: Tuple[int, ...] = ()

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "coeffs", _strip(self.coeffs, self.p))

    @classmethod
    def zero(cls, p: int) -> "DensePoly":
        return cls(p, ())

    @classmethod
    def one(cls, p: int) -> "DensePoly":
        return cls(p, (1,))

    @classmethod
    def monomial(cls, p: int, k: int, c: int = 1) -> "DensePoly":
        if k < 0:
            raise ValueError("DensePoly exponents must be >= 0")
        return cls(p, (0,) * k + (c,))

    @classmethod
    def from_gf(cls, p: int, f: Sequence) -> "DensePoly":
        return cls(p, tuple(int(c) for c in reversed(f)))

    def to_gf(self) -> List[int]:
        return list(reversed(self.coeffs))

    @property
    def degree(self) -> Union[int, float]:
        """Degree, or NEG_INF for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_monic(self) -> bool:
        return self.leading == 1

    @property
    def field(self) -> PrimeField:
        return PrimeField(self.p)

    def leading_coeff(self) -> PrimeFieldElem:
        return self.field(self.leading)

    def coeff(self, i: int) -> PrimeFieldElem:
        value = self.coeffs[i] if 0 <= i < len(self.coeffs) else 0
        return self.field(value)

    def _check(self, other) -> "DensePoly":
        if isinstance(other, int):
            return DensePoly(self.p, (other,))
        if not isinstance(other, DensePoly):
            raise TypeError(f"cannot combine DensePoly with {type(other).__name__}")
        if other.p != self.p:
            raise ValueError(f"characteristic mismatch: {self.p} vs {other.p}")
        return other

    def __add__(self, other) -> "DensePoly":
        other = self._check(other)
        return DensePoly.from_gf(self.p, gt.gf_add(self.to_gf(), other.to_gf(), self.p, ZZ))

    __radd__ = __add__

    def __sub__(self, other) -> "DensePoly":
        other = self._check(other)
        return DensePoly.from_gf(self.p, gt.gf_sub(self.to_gf(), other.to_gf(), self.p, ZZ))

    def __rsub__(self, other) -> "DensePoly":
        return self._check(other) - self

    def __neg__(self) -> "DensePoly":
        return DensePoly(self.p, tuple(-c for c in self.coeffs))

    def __mul__(self, other) -> "DensePoly":
        other = self._check(other)
        return DensePoly.from_gf(self.p, gt.gf_mul(self.to_gf(), other.to_gf(), self.p, ZZ))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "DensePoly":
        if n < 0:
            raise ValueError("DensePoly powers must be >= 0")
        return DensePoly.from_gf(self.p, gt.gf_pow(self.to_gf(), n, self.p, ZZ))

    def __divmod__(self, other) -> Tuple["DensePoly", "DensePoly"]:
        other = self._check(other)
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        q, rem = gt.gf_div(self.to_gf(), other.to_gf(), self.p, ZZ)
        return DensePoly.from_gf(self.p, q), DensePoly.from_gf(self.p, rem)

    def __floordiv__(self, other) -> "DensePoly":
        return divmod(self, other)[0]

    def __mod__(self, other) -> "DensePoly":
        return divmod(self, other)[1]

    def exact_quo(self, other) -> "DensePoly":
        q, rem = divmod(self, other)
        if not rem.is_zero:
            raise ValueError(f"{other} does not divide {self}")
        return q

    def shift_up(self, k: int) -> "DensePoly":
        """Multiply by x^k, k >= 0."""
        if self.is_zero or k == 0:
            return self
        return DensePoly(self.p, (0,) * k + self.coeffs)

    def monic(self) -> "DensePoly":
        if self.is_zero:
            return self
        return DensePoly.from_gf(self.p, gt.gf_monic(self.to_gf(), self.p, ZZ)[1])

    def gcd(self, other) -> "DensePoly":
        """Monic gcd (zero when both are zero)."""
        other = self._check(other)
        return DensePoly.from_gf(self.p, gt.gf_gcd(self.to_gf(), other.to_gf(), self.p, ZZ))

    def evaluate(self, x: int) -> int:
        return int(gt.gf_eval(self.to_gf(), x % self.p, self.p, ZZ)) % self.p

    def is_irreducible(self) -> bool:
        if self.is_zero or self.degree < 1:
            return False
        return bool(gt.gf_irreducible_p(self.monic().to_gf(), self.p, ZZ))

    def factor(self) -> List[Tuple["DensePoly", int]]:
        """Monic irreducible factors with multiplicities (leading coefficient dropped)."""
        if self.is_zero:
            raise ValueError("cannot factor the zero polynomial")
        _, factors = gt.gf_factor(self.to_gf(), self.p, ZZ)
        result = [(DensePoly.from_gf(self.p, f), int(e)) for f, e in factors]
        return sorted(result, key=lambda fe: (fe[0].degree, fe[0].coeffs, fe[1]))

    def format(self, var: str = "x") -> str:
        if self.is_zero:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
                continue
            mono = var if i == 1 else f"{var}^{i}"
            parts.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class LaurentPoly:
    """Z^offset * unit_part, with unit_part(0) != 0 unless the value is zero."""

    unit_part: DensePoly
    offset: int = 0

    def __post_init__(self):
        coeffs = self.unit_part.coeffs
        if not coeffs:
            object.__setattr__(self, "offset", 0)
            return
        low = next(i for i, c in enumerate(coeffs) if c)
        if low:
            object.__setattr__(self, "unit_part", DensePoly(self.unit_part.p, coeffs[low:]))
            object.__setattr__(self, "offset", self.offset + low)

    @classmethod
    def zero(cls, p: int) -> "LaurentPoly":
        return cls(DensePoly.zero(p))

    @classmethod
    def one(cls, p: int) -> "LaurentPoly":
        return cls(DensePoly.one(p))

    @classmethod
    def constant(cls, p: int, c: int) -> "LaurentPoly":
        return cls(DensePoly(p, (c,)))

    @classmethod
    def monomial(cls, p: int, e: int, c: int = 1) -> "LaurentPoly":
        return cls(DensePoly(p, (c,)), e)

    @classmethod
    def from_coeffs(cls, p: int, coeffs: Sequence[int], offset: int = 0) -> "LaurentPoly":
        """coeffs[i] is the coefficient of Z^(offset + i)."""
        return cls(DensePoly(p, tuple(coeffs)), offset)

    @classmethod
    def from_terms(cls, p: int, terms: Mapping[int, int]) -> "LaurentPoly":
        live = {e: c % p for e, c in terms.items() if c % p}
        if not live:
            return cls.zero(p)
        low = min(live)
        coeffs = [0] * (max(live) - low + 1)
        for e, c in live.items():
            coeffs[e - low] = c
        return cls.from_coeffs(p, coeffs, low)

    @property
    def p(self) -> int:
        return self.unit_part.p

    @property
    def is_zero(self) -> bool:
        return self.unit_part.is_zero

    @property
    def val(self) -> int:
        if self.is_zero:
            raise ValueError("valuation of the zero Laurent polynomial is undefined")
        return self.offset

    @property
    def deg(self) -> int:
        if self.is_zero:
            raise ValueError("degree of the zero Laurent polynomial is undefined")
        return self.offset + len(self.unit_part.coeffs) - 1

    def is_monomial(self) -> bool:
        return len(self.unit_part.coeffs) == 1

    def coeff(self, e: int) -> int:
        return self.unit_part.coeff(e - self.offset).value

    def terms(self) -> Dict[int, int]:
        return {self.offset + i: c for i, c in enumerate(self.unit_part.coeffs) if c}

    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, int):
            return LaurentPoly.constant(self.p, other)
        if not isinstance(other, LaurentPoly):
            raise TypeError(f"cannot combine LaurentPoly with {type(other).__name__}")
        if other.p != self.p:
            raise ValueError(f"characteristic mismatch: {self.p} vs {other.p}")
        return other

    def _aligned(self, other: "LaurentPoly") -> Tuple[DensePoly, DensePoly, int]:
        base = min(self.offset, other.offset)
        return (
            self.unit_part.shift_up(self.offset - base),
            other.unit_part.shift_up(other.offset - base),
            base,
        )

    def __add__(self, other) -> "LaurentPoly":
        other = self._coerce(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        a, b, base = self._aligned(other)
        return LaurentPoly(a + b, base)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(-self.unit_part, self.offset)

    def __sub__(self, other) -> "LaurentPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "LaurentPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "LaurentPoly":
        other = self._coerce(other)
        if self.is_zero or other.is_zero:
            return LaurentPoly.zero(self.p)
        return LaurentPoly(self.unit_part * other.unit_part, self.offset + other.offset)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentPoly":
        if n < 0:
            if not self.is_monomial():
                raise ValueError("only monomials are invertible in F_p[Z, Z^-1]")
            c = self.unit_part.leading_coeff().inverse()
            return LaurentPoly.monomial(self.p, -self.offset, int(c)) ** (-n)
        return LaurentPoly(self.unit_part ** n, self.offset * n)

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by Z^k."""
        if self.is_zero:
            return self
        return LaurentPoly(self.unit_part, self.offset + k)

    def invert_variable(self) -> "LaurentPoly":
        """Substitute Z -> Z^-1."""
        if self.is_zero:
            return self
        return LaurentPoly(DensePoly(self.p, tuple(reversed(self.unit_part.coeffs))), -self.deg)

    def to_dense(self) -> DensePoly:
        if self.is_zero:
            return self.unit_part
        if self.offset < 0:
            raise ValueError(f"{self} has negative powers of Z")
        return self.unit_part.shift_up(self.offset)

    def __str__(self) -> str:
        return format_laurent(self)


def format_laurent(x: LaurentPoly) -> str:
    """Render x in the rule-entry grammar (parses back to x)."""
    if x.is_zero:
        return "0"
    parts = []
    for e, c in sorted(x.terms().items()):
        if e == 0:
            parts.append(str(c))
            continue
        mono = "Z" if e == 1 else f"Z^{e}"
        parts.append(mono if c == 1 else f"{c}*{mono}")
    return " + ".join(parts)


def deg_val(x: LaurentPoly) -> Tuple[int, int]:
    """(deg_Z x, v_Z x) of a nonzero Laurent polynomial."""
    if x.is_zero:
        raise ValueError("deg_val of the zero Laurent polynomial")
    return x.deg, x.val


Entry = Union[LaurentPoly, int]


@dataclass(frozen=True)
class LaurentMatrix:
    """Square matrix over F_p[Z, Z^-1]."""

    p: int
    entries: Tuple[Tuple[LaurentPoly, ...], ...]

    def __post_init__(self):
        check_prime(self.p)
        rows = []
        for row in self.entries:
            cells = []
            for e in row:
                if isinstance(e, int):
                    e = LaurentPoly.constant(self.p, e)
                elif not isinstance(e, LaurentPoly):
                    raise TypeError(f"matrix entries must be LaurentPoly, got {type(e).__name__}")
                elif e.p != self.p:
                    raise ValueError(f"entry over F_{e.p} in a matrix over F_{self.p}")
                cells.append(e)
            rows.append(tuple(cells))
        if not rows or any(len(row) != len(rows) for row in rows):
            raise ValueError("LaurentMatrix must be square with r >= 1")
        object.__setattr__(self, "entries", tuple(rows))

    @classmethod
    def from_rows(cls, p: int, rows: Sequence[Sequence[Entry]]) -> "LaurentMatrix":
        return cls(p, tuple(tuple(row) for row in rows))

    @classmethod
    def identity(cls, p: int, r: int) -> "LaurentMatrix":
        return cls(p, tuple(tuple(int(i == j) for j in range(r)) for i in range(r)))

    @classmethod
    def zero(cls, p: int, r: int) -> "LaurentMatrix":
        return cls(p, tuple((0,) * r for _ in range(r)))

    @classmethod
    def from_coefficients(
        cls, p: int, r: int, blocks: Mapping[int, Sequence[Sequence[int]]]
    ) -> "LaurentMatrix":
        """Build G(Z) = sum_j m_j Z^j from the local-rule matrices m_j."""
        terms: List[List[Dict[int, int]]] = [[{} for _ in range(r)] for _ in range(r)]
        for j, m in blocks.items():
            for a in range(r):
                for b in range(r):
                    terms[a][b][j] = terms[a][b].get(j, 0) + int(m[a][b])
        return cls(p, tuple(tuple(LaurentPoly.from_terms(p, t) for t in row) for row in terms))

    @property
    def r(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: Tuple[int, int]) -> LaurentPoly:
        i, j = ij
        return self.entries[i][j]

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for row in self.entries for e in row)

    def _check(self, other: "LaurentMatrix") -> None:
        if other.p != self.p or other.r != self.r:
            raise ValueError(
                f"matrix mismatch: {self.r}x{self.r} over F_{self.p} vs {other.r}x{other.r} over F_{other.p}"
            )

    def map(self, fn) -> "LaurentMatrix":
        return LaurentMatrix(self.p, tuple(tuple(fn(e) for e in row) for row in self.entries))

    def __add__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        self._check(other)
        return LaurentMatrix(self.p, tuple(
            tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.entries, other.entries)
        ))

    def __neg__(self) -> "LaurentMatrix":
        return self.map(lambda e: -e)

    def __sub__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        return self + (-other)

    def __mul__(self, other) -> "LaurentMatrix":
        if isinstance(other, (int, LaurentPoly)):
            return self.map(lambda e: e * other)
        self._check(other)
        r = self.r
        zero = LaurentPoly.zero(self.p)
        rows = []
        for i in range(r):
            row = []
            for j in range(r):
                acc = zero
                for k in range(r):
                    a = self.entries[i][k]
                    b = other.entries[k][j]
                    if not a.is_zero and not b.is_zero:
                        acc = acc + a * b
                row.append(acc)
            rows.append(tuple(row))
        return LaurentMatrix(self.p, tuple(rows))

    def __rmul__(self, scalar) -> "LaurentMatrix":
        return self.map(lambda e: e * scalar)

    def __pow__(self, n: int) -> "LaurentMatrix":
        return matrix_power(self, n)

    def window(self) -> Optional[Tuple[int, int]]:
        """(e_min, e_max) over all nonzero entries; None for the zero matrix."""
        live = [e for row in self.entries for e in row if not e.is_zero]
        if not live:
            return None
        return min(e.val for e in live), max(e.deg for e in live)

    def coefficient_matrices(self) -> Dict[int, Tuple[Tuple[int, ...], ...]]:
        """Local-rule matrices m_j, keyed by Z-exponent j (nonzero ones only)."""
        window = self.window()
        if window is None:
            return {}
        result = {}
        for j in range(window[0], window[1] + 1):
            m = tuple(tuple(e.coeff(j) for e in row) for row in self.entries)
            if any(any(row) for row in m):
                result[j] = m
        return result

    def shifted(self, k: int) -> "LaurentMatrix":
        """Multiply every entry by Z^k."""
        return self.map(lambda e: e.shift(k))

    def invert_variable(self) -> "LaurentMatrix":
        return self.map(lambda e: e.invert_variable())

    def cleared(self) -> Tuple[int, "LaurentMatrix"]:
        """(e_min, Z^-e_min * self): factor out Z^e_min so all entries are polynomials."""
        window = self.window()
        e_min = window[0] if window else 0
        return e_min, self.shifted(-e_min)

    def to_strings(self) -> List[List[str]]:
        return [[format_laurent(e) for e in row] for row in self.entries]

    def __str__(self) -> str:
        return "[" + ", ".join("[" + ", ".join(row) + "]" for row in self.to_strings()) + "]"


def matrix_power(m: LaurentMatrix, n: int) -> LaurentMatrix:
    """m^n by repeated squaring; m^0 = I_r."""
    if n < 0:
        raise ValueError(f"matrix_power needs n >= 0, got {n}")
    result = LaurentMatrix.identity(m.p, m.r)
    base = m
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def _bareiss(rows: List[List[DensePoly]], p: int) -> DensePoly:
    """Fraction-free elimination over F_p[Z]; every division is exact."""
    a = [list(row) for row in rows]
    n = len(a)
    sign = 1
    prev = DensePoly.one(p)
    for k in range(n - 1):
        if a[k][k].is_zero:
            swap = next((i for i in range(k + 1, n) if not a[i][k].is_zero), None)
            if swap is None:
                return DensePoly.zero(p)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]).exact_quo(prev)
        prev = pivot
    det = a[n - 1][n - 1]
    return det if sign > 0 else -det


def laurent_det(m: LaurentMatrix) -> LaurentPoly:
    """Exact determinant in F_p[Z, Z^-1]."""
    p = m.p
    total_offset = 0
    rows = []
    for row in m.entries:
        live = [e for e in row if not e.is_zero]
        if not live:
            return LaurentPoly.zero(p)
        e_min = min(e.val for e in live)
        total_offset += e_min
        rows.append([e.shift(-e_min).to_dense() for e in row])
    return LaurentPoly(_bareiss(rows, p), total_offset)


# Polynomials in lambda with Laurent coefficients, as tuples indexed by lambda-degree.
LambdaPoly = Tuple[LaurentPoly, ...]


def _lam_trim(c: List[LaurentPoly]) -> LambdaPoly:
    while c and c[-1].is_zero:
        c.pop()
    return tuple(c)


def _lam_add(a: LambdaPoly, b: LambdaPoly, p: int) -> LambdaPoly:
    zero = LaurentPoly.zero(p)
    size = max(len(a), len(b))
    return _lam_trim([
        (a[i] if i < len(a) else zero) + (b[i] if i < len(b) else zero) for i in range(size)
    ])


def _lam_mul(a: LambdaPoly, b: LambdaPoly, p: int) -> LambdaPoly:
    if not a or not b:
        return ()
    out = [LaurentPoly.zero(p)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x.is_zero:
            continue
        for j, y in enumerate(b):
            if not y.is_zero:
                out[i + j] = out[i + j] + x * y
    return _lam_trim(out)


def char_poly(m: LaurentMatrix) -> List[LaurentPoly]:
    """
    Coefficients c_0..c_r of det(lambda*I - m).

    Division-free Laplace expansion memoized on the set of used columns, so
    it is exact in every characteristic.
    """
    p, r = m.p, m.r
    one = LaurentPoly.one(p)
    entry: List[List[LambdaPoly]] = [
        [_lam_trim([-m[i, j], one] if i == j else [-m[i, j]]) for j in range(r)]
        for i in range(r)
    ]

    @lru_cache(maxsize=None)
    def minor(row: int, used: int) -> LambdaPoly:
        if row == r:
            return (one,)
        total: LambdaPoly = ()
        position = 0
        for j in range(r):
            if used >> j & 1:
                continue
            if entry[row][j]:
                term = _lam_mul(entry[row][j], minor(row + 1, used | (1 << j)), p)
                if position % 2:
                    term = tuple(-c for c in term)
                total = _lam_add(total, term, p)
            position += 1
        return total

    coeffs = list(minor(0, 0))
    coeffs += [LaurentPoly.zero(p)] * (r + 1 - len(coeffs))
    if coeffs[r] != one:
        raise ArithmeticError("characteristic polynomial is not monic")
    return coeffs


def polynomial_in_matrix(coeffs: Sequence[LaurentPoly], m: LaurentMatrix) -> LaurentMatrix:
    """sum_j coeffs[j] * m^j, evaluated by Horner's rule."""
    result = LaurentMatrix.zero(m.p, m.r)
    identity = LaurentMatrix.identity(m.p, m.r)
    for c in reversed(coeffs):
        result = result * m + identity * c
    return result
