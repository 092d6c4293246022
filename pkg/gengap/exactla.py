"""Exact linear algebra over prime fields and over the integers.

Matrices over F_p are dense int64 numpy arrays wrapped in `FpMatrix`; integer matrices are numpy arrays
with dtype=object so that every entry is an arbitrary precision python int.
Row vectors are the convention throughout: a system "x·A = b" asks for a combination of the rows of A.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from gengap.errors import InvalidModulusError, ShapeMismatchError
from loguru import logger

IntMatrix = np.ndarray


@lru_cache(maxsize=None)
def check_prime(p: int) -> int:
    if not sympy.isprime(int(p)):
        raise InvalidModulusError(f"modulus {p} is not prime")
    return int(p)


@dataclass(frozen=True)
class FpMatrix:
    """Dense matrix over F_p. Entries are kept reduced into [0, p)."""

    p: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        check_prime(self.p)
        entries = np.asarray(self.entries)
        if entries.ndim != 2:
            raise ShapeMismatchError(f"FpMatrix needs a 2d array, got shape {entries.shape}")
        if entries.dtype == object:
            entries = np.mod(entries, self.p)
        object.__setattr__(self, "entries", np.mod(entries.astype(np.int64), self.p))

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], p: int, cols: Optional[int] = None) -> "FpMatrix":
        rows = [list(row) for row in rows]
        if not rows:
            return cls.zeros(0, cols or 0, p)
        return cls(p, np.array([[int(x) % p for x in row] for row in rows], dtype=np.int64))

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> "FpMatrix":
        return cls(p, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, n: int, p: int) -> "FpMatrix":
        return cls(p, np.eye(n, dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def __matmul__(self, other: "FpMatrix") -> "FpMatrix":
        if other.p != self.p or self.cols != other.rows:
            raise ShapeMismatchError(f"cannot multiply {self.entries.shape} mod {self.p} by {other.entries.shape} mod {other.p}")
        return FpMatrix(self.p, matmul_mod(self.entries, other.entries, self.p))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FpMatrix)
            and other.p == self.p
            and other.entries.shape == self.entries.shape
            and bool(np.array_equal(other.entries, self.entries))
        )

    def __hash__(self) -> int:
        return hash((self.p, self.entries.shape, self.entries.tobytes()))


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Product mod p without int64 overflow for p < 2**31 (reduces after every rank-one update when needed)."""
    a = np.asarray(a, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64) % p
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    if p * p * a.shape[1] < 2**62:
        return (a @ b) % p
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for k in range(a.shape[1]):
        out = (out + np.outer(a[:, k], b[k, :]) % p) % p
    return out


@dataclass(frozen=True)
class RrefResult:
    rank: int
    basis: FpMatrix  # nonzero rows of the reduced echelon form
    kernel: FpMatrix  # rows k with k·mᵀ = 0
    pivots: Tuple[int, ...]


def _rref_array(m: np.ndarray, p: int) -> Tuple[np.ndarray, List[int]]:
    m = m.copy() % p
    n_rows, n_cols = m.shape
    pivots: List[int] = []
    r = 0
    for c in range(n_cols):
        if r >= n_rows:
            break
        nonzero = np.nonzero(m[r:, c])[0]
        if len(nonzero) == 0:
            continue
        pivot = r + int(nonzero[0])
        if pivot != r:
            m[[r, pivot]] = m[[pivot, r]]
        inv = pow(int(m[r, c]), -1, p)
        m[r] = (m[r] * inv) % p
        factors = m[:, c].copy()
        factors[r] = 0
        rows = np.nonzero(factors)[0]
        if len(rows):
            m[rows] = (m[rows] - np.outer(factors[rows], m[r]) % p) % p
        pivots.append(c)
        r += 1
    return m, pivots


def rref(m: FpMatrix) -> RrefResult:
    """Reduced row echelon form, rank, row space and right nullspace of m."""
    reduced, pivots = _rref_array(m.entries, m.p)
    rank = len(pivots)
    basis = FpMatrix(m.p, reduced[:rank])
    free = [c for c in range(m.cols) if c not in set(pivots)]
    kernel = np.zeros((len(free), m.cols), dtype=np.int64)
    for k, f in enumerate(free):
        kernel[k, f] = 1
        for i, c in enumerate(pivots):
            kernel[k, c] = (-reduced[i, f]) % m.p
    return RrefResult(rank, basis, FpMatrix(m.p, kernel), tuple(pivots))


def left_kernel(m: FpMatrix) -> FpMatrix:
    """Rows x with x·m = 0."""
    return rref(FpMatrix(m.p, m.entries.T)).kernel


def solve_mod_p(a: FpMatrix, b: Sequence[int]) -> Optional[np.ndarray]:
    """Find x with x·a = b over F_p, or None when the system is inconsistent."""
    b = np.asarray([int(v) for v in b], dtype=np.int64) % a.p
    if len(b) != a.cols:
        raise ShapeMismatchError(f"right hand side has length {len(b)}, matrix has {a.cols} columns")
    augmented = np.concatenate([a.entries.T, b.reshape(-1, 1)], axis=1)
    reduced, pivots = _rref_array(augmented, a.p)
    if a.rows in pivots:
        return None
    x = np.zeros(a.rows, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = reduced[i, a.rows]
    return x


def reduce_against(basis: np.ndarray, pivots: Sequence[int], v: np.ndarray, p: int) -> np.ndarray:
    """Reduce v modulo the span of a reduced echelon basis; the result is zero iff v lies in the span."""
    v = np.asarray(v, dtype=np.int64) % p
    for row, c in zip(basis, pivots):
        if v[c]:
            v = (v - v[c] * row) % p
    return v


class EchelonSpan:
    """Incrementally grown subspace of F_p^n kept in reduced echelon form."""

    def __init__(self, n: int, p: int) -> None:
        self.n = n
        self.p = check_prime(p)
        self.rows: List[np.ndarray] = []
        self.pivots: List[int] = []

    @property
    def dim(self) -> int:
        return len(self.rows)

    def reduce(self, v: np.ndarray) -> np.ndarray:
        return reduce_against(self.rows, self.pivots, v, self.p)

    def contains(self, v: np.ndarray) -> bool:
        return not self.reduce(v).any()

    def add(self, v: np.ndarray) -> bool:
        """Add v to the span; returns False when v was already inside."""
        v = self.reduce(v)
        nonzero = np.nonzero(v)[0]
        if len(nonzero) == 0:
            return False
        c = int(nonzero[0])
        v = (v * pow(int(v[c]), -1, self.p)) % self.p
        for i, row in enumerate(self.rows):
            if row[c]:
                self.rows[i] = (row - row[c] * v) % self.p
        self.rows.append(v)
        self.pivots.append(c)
        return True

    def matrix(self) -> FpMatrix:
        order = np.argsort(self.pivots)
        if not self.rows:
            return FpMatrix.zeros(0, self.n, self.p)
        return FpMatrix(self.p, np.array([self.rows[i] for i in order], dtype=np.int64))


# --------------------------------------------------------------------------- integers


def as_int_matrix(a, cols: Optional[int] = None) -> IntMatrix:
    """Copy into an object array of python ints; an empty row list keeps the requested column count."""
    if isinstance(a, np.ndarray) and a.ndim == 2:
        out = np.empty(a.shape, dtype=object)
        for i, row in enumerate(a.tolist()):
            out[i, :] = [int(x) for x in row]
        return out
    rows = [[int(x) for x in row] for row in a]
    if not rows:
        return np.empty((0, cols or 0), dtype=object)
    out = np.empty((len(rows), len(rows[0])), dtype=object)
    for i, row in enumerate(rows):
        if len(row) != out.shape[1]:
            raise ShapeMismatchError(f"row {i} has length {len(row)}, expected {out.shape[1]}")
        out[i, :] = row
    return out


def int_identity(n: int) -> IntMatrix:
    out = int_zeros(n, n)
    for i in range(n):
        out[i, i] = 1
    return out


def int_zeros(rows: int, cols: int) -> IntMatrix:
    out = np.empty((rows, cols), dtype=object)
    out.fill(0)
    return out


def int_matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"cannot multiply {a.shape} by {b.shape}")
    if a.shape[1] == 0:
        return int_zeros(a.shape[0], b.shape[1])
    return np.dot(a, b)


@dataclass(frozen=True)
class SmithForm:
    U: IntMatrix
    V: IntMatrix
    D: IntMatrix
    invariant_factors: Tuple[int, ...]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.invariant_factors if d != 0)


def _swap_rows(m: IntMatrix, i: int, j: int) -> None:
    if i != j:
        m[[i, j]] = m[[j, i]]


def _swap_cols(m: IntMatrix, i: int, j: int) -> None:
    if i != j:
        m[:, [i, j]] = m[:, [j, i]]


def smith_normal_form(a) -> SmithForm:
    """U·A·V = D with U, V unimodular and D diagonal with d_1 | d_2 | ...

    The pivot is always the entry of least absolute value in the remaining block, which keeps
    the entries small on the desk-scale matrices this package produces.
    """
    D = as_int_matrix(a).copy()
    m, n = D.shape
    U, V = int_identity(m), int_identity(n)
    t = 0
    while t < min(m, n):
        candidates = [(abs(D[i, j]), i, j) for i in range(t, m) for j in range(t, n) if D[i, j] != 0]
        if not candidates:
            break
        _, i, j = min(candidates)
        _swap_rows(D, t, i)
        _swap_rows(U, t, i)
        _swap_cols(D, t, j)
        _swap_cols(V, t, j)
        settled = False
        while not settled:
            settled = True
            for i in range(t + 1, m):
                q = D[i, t] // D[t, t]
                if q:
                    D[i] = D[i] - q * D[t]
                    U[i] = U[i] - q * U[t]
                if D[i, t] != 0:
                    _swap_rows(D, t, i)
                    _swap_rows(U, t, i)
                    settled = False
                    break
            if not settled:
                continue
            for j in range(t + 1, n):
                q = D[t, j] // D[t, t]
                if q:
                    D[:, j] = D[:, j] - q * D[:, t]
                    V[:, j] = V[:, j] - q * V[:, t]
                if D[t, j] != 0:
                    _swap_cols(D, t, j)
                    _swap_cols(V, t, j)
                    settled = False
                    break
            if not settled:
                continue
            for i in range(t + 1, m):
                if any(D[i, j] % D[t, t] != 0 for j in range(t + 1, n)):
                    D[t] = D[t] + D[i]
                    U[t] = U[t] + U[i]
                    settled = False
                    break
        if D[t, t] < 0:
            D[t] = -D[t]
            U[t] = -U[t]
        t += 1
    factors = tuple(int(D[k, k]) for k in range(min(m, n)))
    return SmithForm(U, V, D, factors)


@dataclass(frozen=True)
class Echelon:
    E: IntMatrix  # row echelon form, pivots positive, entries above pivots reduced
    T: IntMatrix  # unimodular with T·A = E
    pivots: Tuple[int, ...]


def row_echelon(a) -> Echelon:
    E = as_int_matrix(a).copy()
    m, n = E.shape
    T = int_identity(m)
    pivots: List[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            rows = [i for i in range(r, m) if E[i, c] != 0]
            if not rows:
                break
            i = min(rows, key=lambda k: abs(E[k, c]))
            _swap_rows(E, r, i)
            _swap_rows(T, r, i)
            for k in range(r + 1, m):
                if E[k, c] != 0:
                    q = E[k, c] // E[r, c]
                    E[k] = E[k] - q * E[r]
                    T[k] = T[k] - q * T[r]
            if all(E[k, c] == 0 for k in range(r + 1, m)):
                break
        if E[r, c] == 0:
            continue
        if E[r, c] < 0:
            E[r] = -E[r]
            T[r] = -T[r]
        for k in range(r):
            q = E[k, c] // E[r, c]
            if q:
                E[k] = E[k] - q * E[r]
                T[k] = T[k] - q * T[r]
        pivots.append(c)
        r += 1
    return Echelon(E, T, tuple(pivots))


def hermite_normal_form(a, cols: Optional[int] = None) -> IntMatrix:
    """Row Hermite normal form: the nonzero rows of the reduced echelon form."""
    a = as_int_matrix(a, cols)
    echelon = row_echelon(a)
    return echelon.E[: len(echelon.pivots)].copy()


def integer_kernel(a, cols: Optional[int] = None) -> IntMatrix:
    """Hermite-reduced basis of the lattice {x : x·A = 0}."""
    a = as_int_matrix(a, cols)
    echelon = row_echelon(a)
    kernel = echelon.T[len(echelon.pivots):]
    if kernel.shape[0] == 0:
        return int_zeros(0, a.shape[0])
    return hermite_normal_form(kernel)


def _solve_with(echelon: Echelon, b: Sequence[int]) -> Optional[List[int]]:
    residual = [int(v) for v in b]
    y = [0] * echelon.E.shape[0]
    for idx, c in enumerate(echelon.pivots):
        if residual[c] == 0:
            continue
        q, rem = divmod(residual[c], echelon.E[idx, c])
        if rem:
            return None
        y[idx] = q
        row = echelon.E[idx]
        for k in range(c, len(residual)):
            if row[k]:
                residual[k] -= q * row[k]
    if any(residual):
        return None
    x = [0] * echelon.T.shape[1]
    for idx, coefficient in enumerate(y):
        if coefficient:
            row = echelon.T[idx]
            for k in range(len(x)):
                if row[k]:
                    x[k] += coefficient * row[k]
    return x


class IntegerSolver:
    """Solve x·A = b over Z for many right hand sides against one echelon form of A."""

    def __init__(self, a, cols: Optional[int] = None) -> None:
        self.a = as_int_matrix(a, cols)
        self.echelon = row_echelon(self.a)

    def solve(self, b: Sequence[int]) -> Optional[List[int]]:
        if len(b) != self.a.shape[1]:
            raise ShapeMismatchError(f"right hand side has length {len(b)}, matrix has {self.a.shape[1]} columns")
        return _solve_with(self.echelon, b)


def solve_integer(a, b: Sequence[int]) -> Optional[List[int]]:
    return IntegerSolver(a, len(b)).solve(b)


def lattice_coordinates(basis, v: Sequence[int]) -> Optional[List[int]]:
    """Coordinates of v in a Z-basis (linearly independent rows), None when v is outside the lattice."""
    return solve_integer(basis, v)


def rational_rank(a) -> int:
    a = as_int_matrix(a)
    return len(row_echelon(a).pivots)


def minimal_multiple(rows, v: Sequence[int]) -> int:
    """Least m > 0 with m·v in the Z-span of rows; 0 when v is not even in the rational span."""
    stacked = as_int_matrix(as_int_matrix(rows, len(v)).tolist() + [[-int(x) for x in v]])
    kernel = integer_kernel(stacked)
    m = 0
    for k in kernel.tolist():
        m = gcd(m, int(k[-1]))
    return abs(m)


def to_fp(a, p: int) -> FpMatrix:
    a = as_int_matrix(a)
    if a.shape[0] == 0:
        return FpMatrix.zeros(0, a.shape[1], p)
    return FpMatrix(p, np.array([[int(x) % p for x in row] for row in a.tolist()], dtype=np.int64))


def invariant_factors_to_exponent(factors: Sequence[int]) -> int:
    """Exponent of the finite abelian group with these invariant factors; 0 encodes infinite."""
    if any(f == 0 for f in factors):
        return 0
    exponent = 1
    for f in factors:
        exponent = exponent * f // gcd(exponent, f)
    logger.debug(f"exponent of Z-module with invariant factors {tuple(factors)} is {exponent}")
    return exponent


def inverse_mod_p(m: FpMatrix) -> FpMatrix:
    if m.rows != m.cols:
        raise ShapeMismatchError(f"only square matrices have inverses, got {m.entries.shape}")
    n = m.rows
    reduced, pivots = _rref_array(np.concatenate([m.entries, np.eye(n, dtype=np.int64)], axis=1), m.p)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ShapeMismatchError("matrix is singular mod p")
    return FpMatrix(m.p, reduced[:, n:])
