"""Exact linear algebra over the rationals.

Everything here works on :class:`RMatrix`, a small immutable dense matrix of
:class:`fractions.Fraction` entries. Rank and kernel computations clear
denominators row by row and then run fraction-free (Bareiss) elimination on
Python integers, so no intermediate rational ever has to be normalised.

Two independent routes exist for cross-checking:

* :func:`rank_rational` -- textbook Gauss-Jordan on fractions, first nonzero
  pivot. Slow, but shares no code with the Bareiss path.
* :func:`rank_modular` -- elimination over a few word-sized primes with
  numpy, falling back to Bareiss whenever the primes disagree.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm, prod
from typing import Iterable, Sequence

import numpy as np

Rational = Fraction

# Primes below 2**31 so that a product of two residues fits in int64.


def _is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for n < 3.2e9."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d, s = d // 2, s + 1
    for a in (2, 3, 5, 7):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _primes_below(n: int, count: int) -> tuple:
    out = []
    while len(out) < count:
        n -= 1
        if _is_prime(n):
            out.append(n)
    return tuple(out)


# products of two residues stay below 2**62, inside int64
DEFAULT_PRIMES = _primes_below(2**31, 16)


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


@dataclass(frozen=True)
class RMatrix:
    """Dense row-major rational matrix."""

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative matrix shape")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "RMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise ValueError("ragged rows")
        return cls(len(rows), cols, tuple(as_rational(x) for r in rows for x in r))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RMatrix":
        return cls(rows, cols, (Fraction(0),) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "RMatrix":
        return cls(n, n, tuple(Fraction(int(i == j)) for i in range(n) for j in range(n)))

    @classmethod
    def outer(cls, u: Sequence, v: Sequence) -> "RMatrix":
        return cls(len(u), len(v), tuple(as_rational(a) * as_rational(b) for a in u for b in v))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def tolist(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def T(self) -> "RMatrix":
        return RMatrix(
            self.cols, self.rows,
            tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)),
        )

    def __add__(self, other: "RMatrix") -> "RMatrix":
        self._same_shape(other)
        return RMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "RMatrix") -> "RMatrix":
        self._same_shape(other)
        return RMatrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "RMatrix":
        return RMatrix(self.rows, self.cols, tuple(-a for a in self.entries))

    def scale(self, c) -> "RMatrix":
        c = as_rational(c)
        return RMatrix(self.rows, self.cols, tuple(c * a for a in self.entries))

    def __matmul__(self, other: "RMatrix") -> "RMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        ocols = [other.entries[j::other.cols] for j in range(other.cols)]
        out = []
        for i in range(self.rows):
            r = self.row(i)
            for c in ocols:
                out.append(sum((a * b for a, b in zip(r, c) if a and b), Fraction(0)))
        return RMatrix(self.rows, other.cols, tuple(out))

    def apply(self, v: Sequence) -> tuple:
        """Matrix-vector product."""
        if len(v) != self.cols:
            raise ValueError("vector length does not match matrix columns")
        return tuple(
            sum((a * b for a, b in zip(self.row(i), v) if a and b), Fraction(0))
            for i in range(self.rows)
        )

    def trace(self) -> Fraction:
        return sum((self[i, i] for i in range(min(self.rows, self.cols))), Fraction(0))

    def is_zero(self) -> bool:
        return not any(self.entries)

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and self == self.T

    def _same_shape(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")


def kron(a: RMatrix, b: RMatrix) -> RMatrix:
    out = []
    for i in range(a.rows):
        for k in range(b.rows):
            for j in range(a.cols):
                x = a[i, j]
                out.extend(x * y for y in b.row(k))
    return RMatrix(a.rows * b.rows, a.cols * b.cols, tuple(out))


def kron_vec(*vectors: Sequence) -> tuple:
    """Kronecker product of vectors, first factor most significant."""
    out = [Fraction(1)]
    for v in vectors:
        out = [a * as_rational(b) for a in out for b in v]
    return tuple(out)


def dot(u: Sequence, v: Sequence) -> Fraction:
    if len(u) != len(v):
        raise ValueError("vector length mismatch")
    return sum((a * b for a, b in zip(u, v) if a and b), Fraction(0))


def primitive(v: Sequence) -> tuple:
    """Rescale a rational vector by a positive factor to a primitive integer vector."""
    v = [as_rational(x) for x in v]
    den = reduce(lcm, (x.denominator for x in v), 1)
    ints = [int(x * den) for x in v]
    g = reduce(gcd, ints, 0)
    if g == 0:
        return tuple(Fraction(0) for _ in v)
    return tuple(Fraction(x // g) for x in ints)


def _integer_rows(m: RMatrix) -> list[list[int]]:
    # Row scaling by a nonzero constant changes neither rank nor kernel.
    out = []
    for i in range(m.rows):
        r = m.row(i)
        den = reduce(lcm, (x.denominator for x in r), 1)
        out.append([int(x * den) for x in r])
    return out


def bareiss_echelon(m: RMatrix) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form.

    Returns the integer echelon rows (only the first ``rank`` rows are
    meaningful) and the pivot columns. Pivot choice: in each column the
    nonzero candidate with the smallest bit length, lowest row index on ties.
    """
    a = _integer_rows(m)
    nrows, ncols = m.rows, m.cols
    prev = 1
    r = 0
    pivots: list[int] = []
    for c in range(ncols):
        if r == nrows:
            break
        best = None
        best_bits = None
        for i in range(r, nrows):
            x = a[i][c]
            if x:
                bits = abs(x).bit_length()
                if best is None or bits < best_bits:
                    best, best_bits = i, bits
        if best is None:
            continue
        if best != r:
            a[r], a[best] = a[best], a[r]
        piv_row = a[r]
        p = piv_row[c]
        for i in range(r + 1, nrows):
            row = a[i]
            f = row[c]
            if f:
                for j in range(c + 1, ncols):
                    row[j] = (p * row[j] - f * piv_row[j]) // prev
            else:
                for j in range(c + 1, ncols):
                    if row[j]:
                        row[j] = (p * row[j]) // prev
            row[c] = 0
        prev = p
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: RMatrix, method: str = "bareiss") -> int:
    """Exact rank of ``m`` over Q.

    ``method`` is one of ``"bareiss"`` (default), ``"modular"`` or
    ``"rational"``.
    """
    if method == "bareiss":
        return len(bareiss_echelon(m)[1])
    if method == "modular":
        return rank_modular(m)
    if method == "rational":
        return rank_rational(m)
    raise ValueError(f"unknown rank method {method!r}")


def kernel_basis(m: RMatrix) -> list[tuple]:
    """Basis of the right null space, one primitive integer vector per free column."""
    ech, pivots = bareiss_echelon(m)
    n = m.cols
    pivot_set = set(pivots)
    free = [j for j in range(n) if j not in pivot_set]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for k in range(len(pivots) - 1, -1, -1):
            pc = pivots[k]
            row = ech[k]
            s = sum((row[j] * x[j] for j in range(pc + 1, n) if row[j] and x[j]), Fraction(0))
            x[pc] = -s / row[pc]
        basis.append(primitive(x))
    return basis


def solution_space_dim(m: RMatrix) -> int:
    return m.cols - rank(m)


def rank_rational(m: RMatrix) -> int:
    """Plain Gauss-Jordan rank on fractions; independent oracle for :func:`rank`."""
    a = m.tolist()
    r = 0
    for c in range(m.cols):
        piv = next((i for i in range(r, m.rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(m.rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == m.rows:
            break
    return r


def _rank_mod_p(rows: list[list[int]], ncols: int, p: int) -> int:
    if not rows or ncols == 0:
        return 0
    a = np.array([[x % p for x in r] for r in rows], dtype=np.int64)
    nrows = a.shape[0]
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = (a[r] * inv) % p
        below = a[r + 1:, c].copy()
        mask = below != 0
        if mask.any():
            idx = np.nonzero(mask)[0] + r + 1
            a[idx] = (a[idx] - np.outer(below[mask], a[r]) % p) % p
        r += 1
    return r


def rank_modular(m: RMatrix, primes: Iterable[int] = DEFAULT_PRIMES) -> int:
    """Rank via elimination modulo primes, exact by a Hadamard-bound argument.

    The rank mod p never exceeds the rational rank, and it drops only when p
    divides every maximal nonzero minor. Minors are bounded by H, the product
    of the largest row norms; once the primes used multiply past H no nonzero
    minor can be divisible by all of them, so the largest modular rank seen
    is the true rank. If the supplied primes run out first, Bareiss decides.
    """
    rows = _integer_rows(m)
    k = min(m.rows, m.cols)
    if k == 0:
        return 0
    norms = sorted((sum(x * x for x in r) for r in rows), reverse=True)[:k]
    h2 = prod(max(n, 1) for n in norms)
    best, modulus = 0, 1
    for p in primes:
        best = max(best, _rank_mod_p(rows, m.cols, p))
        modulus *= p
        if best == k or modulus * modulus > h2:
            return best
    return len(bareiss_echelon(m)[1])


def inverse(m: RMatrix) -> RMatrix:
    """Inverse of a square nonsingular matrix (Gauss-Jordan on fractions)."""
    if m.rows != m.cols:
        raise ValueError("inverse of a non-square matrix")
    n = m.rows
    a = m.tolist()
    b = RMatrix.identity(n).tolist()
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        b[c], b[piv] = b[piv], b[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        b[c] = [x * inv for x in b[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
                b[i] = [x - f * y for x, y in zip(b[i], b[c])]
    return RMatrix.from_rows(b, n)


def independent_subset(vectors: Sequence[Sequence]) -> list[int]:
    """Indices of a maximal linearly independent subset, greedy in input order."""
    keep: list[int] = []
    current = 0
    for i, v in enumerate(vectors):
        cand = [vectors[k] for k in keep] + [v]
        r = rank(RMatrix.from_rows(cand))
        if r > current:
            keep.append(i)
            current = r
    return keep
