"""Dense exact linear algebra over F_p on numpy int64 arrays.

Entries are kept reduced to [0, p). Products are reduced after every matrix
multiplication, so p**2 * dim must stay below 2**63 (p < 10**7 at dim 600).
"""
from typing import List, Tuple

import numpy as np

from app.services.algebra import PrimeFieldElem


def as_fp(matrix, p: int) -> np.ndarray:
    """Copy `matrix` into a fresh int64 array reduced mod p."""
    return np.array(matrix, dtype=np.int64) % p


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def matmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    return (a @ b) % p


def matpow(a: np.ndarray, n: int, p: int) -> np.ndarray:
    """a**n mod p by repeated squaring."""
    if n < 0:
        raise ValueError(f"matrix power needs n >= 0, got {n}")
    result = identity(a.shape[0])
    base = as_fp(a, p)
    while n:
        if n & 1:
            result = matmul(result, base, p)
        base = matmul(base, base, p)
        n >>= 1
    return result


def row_reduce(matrix, p: int) -> Tuple[np.ndarray, List[int]]:
    """
    Reduced row echelon form over F_p.

    Returns:
        (rref, pivot_columns)
    """
    m = as_fp(matrix, p)
    if m.ndim != 2:
        raise ValueError("row_reduce expects a 2-d matrix")
    rows, cols = m.shape
    pivots: List[int] = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        nonzero = np.nonzero(m[row:, col])[0]
        if nonzero.size == 0:
            continue
        pivot = row + int(nonzero[0])
        if pivot != row:
            m[[row, pivot]] = m[[pivot, row]]
        inv = PrimeFieldElem(p, int(m[row, col])).inverse().value
        m[row] = (m[row] * inv) % p
        others = np.nonzero(m[:, col])[0]
        others = others[others != row]
        if others.size:
            m[others] = (m[others] - np.outer(m[others, col], m[row])) % p
        pivots.append(col)
        row += 1
    return m, pivots


def rank(matrix, p: int) -> int:
    return len(row_reduce(matrix, p)[1])


def nullity(matrix, p: int) -> int:
    """Dimension of the right kernel."""
    m = np.asarray(matrix)
    return m.shape[1] - rank(m, p)


def nullspace(matrix, p: int) -> np.ndarray:
    """
    Basis of the right kernel {v : matrix @ v = 0}.

    Returns:
        Array of shape (nullity, cols); each row is a basis vector.
    """
    rref, pivots = row_reduce(matrix, p)
    cols = rref.shape[1]
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = (-rref[i, f]) % p
    return basis


def solve(matrix, rhs, p: int) -> np.ndarray:
    """
    One solution x of matrix @ x = rhs over F_p.

    Raises:
        ValueError: if the system is inconsistent
    """
    a = as_fp(matrix, p)
    b = as_fp(rhs, p).reshape(-1, 1)
    rref, pivots = row_reduce(np.hstack([a, b]), p)
    cols = a.shape[1]
    if cols in pivots:
        raise ValueError("linear system has no solution over F_p")
    x = np.zeros(cols, dtype=np.int64)
    for i, pc in enumerate(pivots):
        x[pc] = rref[i, cols]
    return x


def determinant(matrix, p: int) -> int:
    """Determinant over F_p of a square matrix (0 when singular)."""
    m = as_fp(matrix, p)
    n = m.shape[0]
    det = 1
    for col in range(n):
        nonzero = np.nonzero(m[col:, col])[0]
        if nonzero.size == 0:
            return 0
        pivot = col + int(nonzero[0])
        if pivot != col:
            m[[col, pivot]] = m[[pivot, col]]
            det = -det
        det = (det * int(m[col, col])) % p
        inv = PrimeFieldElem(p, int(m[col, col])).inverse().value
        below = m[col + 1:, col] * inv % p
        m[col + 1:] = (m[col + 1:] - np.outer(below, m[col])) % p
    return det % p
