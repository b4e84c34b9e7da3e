"""Tensor-product structure for multipartite product states.

Conventions used throughout the package:

* States are unnormalised with rational (in practice integer) amplitudes.
  Every check in the package is scale invariant, so no square roots appear.
* Tensor expansion is big-endian: for three parties the global index is
  ``(a * d_B + b) * d_C + c``.
* A party of dimension 6 factorised as ``[2, 3]`` uses ``index = 3*i + j``
  (qubit ``i``, qutrit ``j``); ``[2, 2]`` uses ``index = 2*i + j``.
* Subsystem labels are the lower-case party letter, followed by the 1-based
  factor number when the party is factorised (``"b1"``, ``"b2"``), or the
  bare letter otherwise (``"a"``).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Iterable, Sequence

from .exactla import RMatrix, as_rational, dot, kron, kron_vec

PARTY_NAMES = "ABCDEFGH"


class StructuralError(ValueError):
    """Raised when objects with incompatible tensor structure are combined."""


@dataclass(frozen=True)
class PartySpec:
    party_dims: tuple
    factorizations: tuple = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.party_dims)
        facs = tuple(self.factorizations) or (None,) * len(dims)
        if len(facs) != len(dims):
            raise StructuralError("one factorization entry per party is required")
        facs = tuple(None if f is None else tuple(int(x) for x in f) for f in facs)
        if not dims:
            raise StructuralError("at least one party is required")
        if len(dims) > len(PARTY_NAMES):
            raise StructuralError("too many parties")
        for d, f in zip(dims, facs):
            if d < 2:
                raise StructuralError(f"party dimension {d} < 2")
            if f is not None:
                if any(x < 2 for x in f) or prod(f) != d:
                    raise StructuralError(f"factorization {f} does not multiply to {d}")
        object.__setattr__(self, "party_dims", dims)
        object.__setattr__(self, "factorizations", facs)

    @property
    def n_parties(self) -> int:
        return len(self.party_dims)

    @property
    def total_dim(self) -> int:
        return prod(self.party_dims)

    def party_name(self, k: int) -> str:
        return PARTY_NAMES[k]

    def party_index(self, name: str) -> int:
        k = PARTY_NAMES.find(name.upper())
        if k < 0 or k >= self.n_parties or len(name) != 1:
            raise StructuralError(f"unknown party {name!r}")
        return k

    def factor_dims(self, k: int) -> tuple:
        f = self.factorizations[k]
        return f if f is not None else (self.party_dims[k],)

    def factor_labels(self, k: int) -> tuple:
        letter = PARTY_NAMES[k].lower()
        if self.factorizations[k] is None:
            return (letter,)
        return tuple(f"{letter}{i + 1}" for i in range(len(self.factorizations[k])))

    def all_factor_labels(self) -> tuple:
        return tuple(lab for k in range(self.n_parties) for lab in self.factor_labels(k))

    def locate(self, label: str) -> tuple[int, int]:
        """(party, factor position) of a subsystem label."""
        for k in range(self.n_parties):
            labels = self.factor_labels(k)
            if label in labels:
                return k, labels.index(label)
        letter = label[:1].upper()
        if letter in PARTY_NAMES[:self.n_parties] and len(label) > 1:
            raise StructuralError(f"party {letter} carries no factorization; no subsystem {label!r}")
        raise StructuralError(f"unknown subsystem {label!r}")


@dataclass(frozen=True)
class FactorIndexMap:
    """Bijection between a party's basis index and its factor multi-index."""

    factor_dims: tuple

    def to_multi(self, index: int) -> tuple:
        out = []
        for d in reversed(self.factor_dims):
            index, r = divmod(index, d)
            out.append(r)
        if index:
            raise IndexError("basis index out of range")
        return tuple(reversed(out))

    def to_index(self, multi: Sequence[int]) -> int:
        idx = 0
        for m, d in zip(multi, self.factor_dims):
            if not 0 <= m < d:
                raise IndexError("factor index out of range")
            idx = idx * d + m
        return idx


@dataclass(frozen=True)
class ProductState:
    id: str
    locals: tuple

    def __post_init__(self):
        loc = tuple(tuple(as_rational(x) for x in v) for v in self.locals)
        for v in loc:
            if not any(v):
                raise StructuralError(f"state {self.id}: zero local vector")
        object.__setattr__(self, "locals", loc)

    @property
    def dims(self) -> tuple:
        return tuple(len(v) for v in self.locals)

    def norm2(self) -> Fraction:
        out = Fraction(1)
        for v in self.locals:
            out *= dot(v, v)
        return out


def ket(d: int, expr: str) -> tuple:
    """Integer vector from a signed sum of basis labels, e.g. ``ket(6, "0-1+4-5")``."""
    expr = expr.replace(" ", "")
    terms = re.findall(r"([+-]?)(\d+)", expr)
    if not terms or "".join(s + i for s, i in terms) != expr:
        raise ValueError(f"cannot parse ket {expr!r}")
    v = [0] * d
    for sign, i in terms:
        i = int(i)
        if i >= d:
            raise ValueError(f"basis index {i} out of range for dimension {d}")
        v[i] += -1 if sign == "-" else 1
    return tuple(Fraction(x) for x in v)


def _check_compatible(s: ProductState, t: ProductState):
    if s.dims != t.dims:
        raise StructuralError(f"states {s.id} and {t.id} have different party layouts {s.dims} vs {t.dims}")


def local_inner_products(s: ProductState, t: ProductState) -> tuple:
    _check_compatible(s, t)
    return tuple(dot(u, v) for u, v in zip(s.locals, t.locals))


def inner_product(s: ProductState, t: ProductState) -> Fraction:
    out = Fraction(1)
    for x in local_inner_products(s, t):
        if not x:
            return Fraction(0)
        out *= x
    return out


def full_vector(s: ProductState) -> tuple:
    return kron_vec(*s.locals)


@dataclass(frozen=True)
class DensityMatrix:
    dim: int
    entries: RMatrix

    def __post_init__(self):
        if self.entries.shape != (self.dim, self.dim):
            raise StructuralError("density matrix shape does not match its dimension")

    def trace(self) -> Fraction:
        return self.entries.trace()


def local_reduced(vec: Sequence, factor_dims: Sequence[int], keep: Iterable[int]) -> RMatrix:
    """Unnormalised partial trace of ``|v><v|`` onto the kept factor positions.

    Keeping nothing returns the 1x1 matrix ``<v|v>``.
    """
    factor_dims = tuple(factor_dims)
    keep = tuple(sorted(set(keep)))
    drop = tuple(i for i in range(len(factor_dims)) if i not in keep)
    imap = FactorIndexMap(factor_dims)
    kdims = [factor_dims[i] for i in keep]
    ddims = [factor_dims[i] for i in drop]
    kd = prod(kdims)
    # reshape v into a (kept, dropped) matrix, then rho = M M^T
    mat = [[Fraction(0)] * prod(ddims) for _ in range(kd)]
    kmap = FactorIndexMap(tuple(kdims))
    dmap = FactorIndexMap(tuple(ddims))
    for idx, amp in enumerate(vec):
        if not amp:
            continue
        multi = imap.to_multi(idx)
        ki = kmap.to_index([multi[i] for i in keep]) if keep else 0
        di = dmap.to_index([multi[i] for i in drop]) if drop else 0
        mat[ki][di] = as_rational(amp)
    out = []
    for i in range(kd):
        for j in range(kd):
            out.append(dot(mat[i], mat[j]))
    return RMatrix(kd, kd, tuple(out))


def reduced_density(s: ProductState, spec: PartySpec, keep: Iterable[str]) -> DensityMatrix:
    """Unnormalised partial trace of ``|s><s|`` onto the kept subsystems.

    The result is the tensor product, in party order, of each party's local
    reduced matrix; fully discarded parties contribute the scalar ``<x|x>``.
    """
    keep = set(keep)
    if not keep:
        raise StructuralError("keep set is empty")
    if s.dims != spec.party_dims:
        raise StructuralError(f"state {s.id} does not fit party layout {spec.party_dims}")
    per_party: dict[int, list[int]] = {k: [] for k in range(spec.n_parties)}
    for label in keep:
        k, pos = spec.locate(label)
        per_party[k].append(pos)
    rho = RMatrix.identity(1)
    for k in range(spec.n_parties):
        rho = kron(rho, local_reduced(s.locals[k], spec.factor_dims(k), per_party[k]))
    return DensityMatrix(rho.rows, rho)


def partial_trace(rho: DensityMatrix, dims: Sequence[int], discard: Iterable[int]) -> DensityMatrix:
    """Trace out subsystems (by position in ``dims``) of a density matrix."""
    dims = tuple(dims)
    if prod(dims) != rho.dim:
        raise StructuralError("subsystem dimensions do not match the density matrix")
    discard = set(discard)
    keep = [i for i in range(len(dims)) if i not in discard]
    kdims = tuple(dims[i] for i in keep)
    ddims = tuple(dims[i] for i in sorted(discard))
    full = FactorIndexMap(dims)
    kd = prod(kdims)
    out = [[Fraction(0)] * kd for _ in range(kd)]
    kmap = FactorIndexMap(kdims)
    for kr in range(kd):
        mr = kmap.to_multi(kr)
        for kc in range(kd):
            mc = kmap.to_multi(kc)
            acc = Fraction(0)
            for dm in itertools.product(*(range(d) for d in ddims)):
                row = [0] * len(dims)
                col = [0] * len(dims)
                for pos, i in enumerate(keep):
                    row[i] = mr[pos]
                    col[i] = mc[pos]
                for pos, i in enumerate(sorted(discard)):
                    row[i] = col[i] = dm[pos]
                acc += rho.entries[full.to_index(row), full.to_index(col)]
            out[kr][kc] = acc
    return DensityMatrix(kd, RMatrix.from_rows(out, kd))


def trace_of_product(r1: RMatrix, r2: RMatrix) -> Fraction:
    if r1.shape != r2.shape or r1.rows != r1.cols:
        raise StructuralError("trace of product needs equal square shapes")
    n = r1.rows
    return sum((r1[i, j] * r2[j, i] for i in range(n) for j in range(n) if r1[i, j] and r2[j, i]),
               Fraction(0))


def densities_orthogonal(r1: DensityMatrix, r2: DensityMatrix) -> bool:
    """True iff ``tr(r1 r2) == 0``; for PSD matrices this means orthogonal supports."""
    if r1.dim != r2.dim:
        raise StructuralError(f"dimension mismatch {r1.dim} vs {r2.dim}")
    return trace_of_product(r1.entries, r2.entries) == 0


def outer_density(s: ProductState) -> DensityMatrix:
    v = full_vector(s)
    return DensityMatrix(len(v), RMatrix.outer(v, v))
