"""Decidable nonlocality checks on product-state sets.

* :func:`check_local_redundancy` discards every nonempty proper set of
  subsystems and looks for reduced pairs that stop being orthogonal.
* :func:`check_upb` decides unextendibility by enumerating assignments of
  states to parties.
* :func:`opm_solution_dims` and :func:`certify_strong_irreducibility` build
  the linear conditions an orthogonality-preserving effect must satisfy and
  report the dimension of their solution space.

A trivial-only solution space (just multiples of the identity) is a
certificate that the set is locally irreducible for that grouping. The
converse does not hold: a nontrivial solution is *not* a proof that a state
can be eliminated, and reports never claim it is.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Iterable, Sequence

from .exactla import RMatrix, dot, kernel_basis, kron_vec, rank
from .hilbert import PARTY_NAMES, PartySpec, ProductState, local_reduced, trace_of_product
from .measurements import Measurement, Outcome
from .statesets import StateSet

UPB_GUARD = 10**7


class EnumerationTooLarge(ValueError):
    pass


# ------------------------------------------------------------ redundancy


@dataclass
class DiscardPattern:
    discarded: tuple
    witnesses: list

    @property
    def orthogonality_preserved(self) -> bool:
        return not self.witnesses


@dataclass
class RedundancyReport:
    patterns: list

    @property
    def redundancy_free(self) -> bool:
        return all(p.witnesses for p in self.patterns)

    def pattern(self, *discarded: str) -> DiscardPattern:
        want = set(discarded)
        for p in self.patterns:
            if set(p.discarded) == want:
                return p
        raise KeyError(discarded)


def check_local_redundancy(s: StateSet) -> RedundancyReport:
    """Witness pairs for every nonempty, non-total discard of subsystems.

    For product states the reduced state factorises over parties, so
    ``tr(rho_i rho_j)`` is the product of the per-party traces; each pattern
    is evaluated from scratch.
    """
    spec = s.spec
    labels = spec.all_factor_labels()
    where = {lab: spec.locate(lab) for lab in labels}
    cache: dict = {}

    def local(k, keep, st_index):
        key = (k, keep, st_index)
        if key not in cache:
            cache[key] = local_reduced(s.states[st_index].locals[k], spec.factor_dims(k), keep)
        return cache[key]

    n = len(s)
    patterns = []
    for size in range(1, len(labels)):
        for discarded in itertools.combinations(labels, size):
            keeps = []
            for k in range(spec.n_parties):
                dropped = {where[lab][1] for lab in discarded if where[lab][0] == k}
                keeps.append(tuple(i for i in range(len(spec.factor_dims(k))) if i not in dropped))
            witnesses = []
            for i in range(n):
                for j in range(i + 1, n):
                    val = Fraction(1)
                    for k in range(spec.n_parties):
                        val *= trace_of_product(local(k, keeps[k], i), local(k, keeps[k], j))
                        if not val:
                            break
                    if val:
                        witnesses.append((s.states[i].id, s.states[j].id))
            patterns.append(DiscardPattern(discarded, witnesses))
    return RedundancyReport(patterns)


# ------------------------------------------------------------ UPB


@dataclass
class UpbVerdict:
    is_upb: bool
    witness: tuple | None = None
    assignment: dict | None = None
    assignments_checked: int = 0


def check_upb(s: StateSet, guard: int = UPB_GUARD) -> UpbVerdict:
    """Unextendibility by enumerating every map states -> parties.

    The set is extendible iff some map leaves, for every party, the locals
    assigned to it spanning a proper subspace; a vector orthogonal to each
    of those spans is then a product state orthogonal to the whole set.
    """
    k = s.spec.n_parties
    n = len(s)
    if k**n > guard:
        raise EnumerationTooLarge(f"{k}^{n} assignments exceed the guard {guard}")
    dims = s.spec.party_dims
    rank_cache: dict = {}

    def deficient(party, members):
        key = (party, members)
        if key not in rank_cache:
            if not members:
                rank_cache[key] = True
            else:
                m = RMatrix.from_rows([s.states[i].locals[party] for i in members])
                rank_cache[key] = rank(m) < dims[party]
        return rank_cache[key]

    checked = 0
    for assign in itertools.product(range(k), repeat=n):
        checked += 1
        groups = [tuple(i for i in range(n) if assign[i] == p) for p in range(k)]
        if all(deficient(p, groups[p]) for p in range(k)):
            witness = []
            for p in range(k):
                if groups[p]:
                    m = RMatrix.from_rows([s.states[i].locals[p] for i in groups[p]])
                    witness.append(kernel_basis(m)[0])
                else:
                    witness.append(tuple(Fraction(int(j == 0)) for j in range(dims[p])))
            mapping = {s.states[i].id: PARTY_NAMES[assign[i]] for i in range(n)}
            return UpbVerdict(False, tuple(witness), mapping, checked)
    return UpbVerdict(True, None, None, checked)


# ------------------------------------------------------------ OPM constraints


def restrict_to_support(s: StateSet) -> tuple[StateSet, tuple]:
    """Drop basis directions no state touches; returns the set and kept indices per party."""
    supports = []
    for k in range(s.spec.n_parties):
        idx = sorted({i for st in s.states for i, x in enumerate(st.locals[k]) if x})
        supports.append(tuple(idx))
    if all(len(sup) == d for sup, d in zip(supports, s.spec.party_dims)):
        return s, tuple(supports)
    for k, sup in enumerate(supports):
        if len(sup) < 2:
            # a party dimension is at least 2; pad with one untouched direction
            extra = next(i for i in range(s.spec.party_dims[k]) if i not in sup)
            supports[k] = tuple(sorted(sup + (extra,)))
    dims = [len(sup) for sup in supports]
    states = []
    for st in s.states:
        locs = tuple(tuple(st.locals[k][i] for i in supports[k]) for k in range(s.spec.n_parties))
        states.append(ProductState(st.id, locs))
    return StateSet(PartySpec(tuple(dims)), tuple(states)), tuple(supports)


def _sym_index(d):
    return [(a, b) for a in range(d) for b in range(a, d)]


def _antisym_index(d):
    return [(a, b) for a in range(d) for b in range(a + 1, d)]


@dataclass
class ConstraintSystem:
    grouping: tuple
    dim: int
    sym: RMatrix
    antisym: RMatrix


def opm_constraints(s: StateSet, grouping: Iterable[int]) -> ConstraintSystem:
    """Linear conditions ``<i| E (x) I |j> = 0`` on a Hermitian E = S + iA.

    Unknowns are the upper triangle of the symmetric part S (d(d+1)/2) and
    the strict upper triangle of the antisymmetric part A (d(d-1)/2). Pairs
    already orthogonal outside the grouping contribute no row.
    """
    grouping = tuple(sorted(set(grouping)))
    nparty = s.spec.n_parties
    if not grouping or len(grouping) >= nparty or any(not 0 <= g < nparty for g in grouping):
        raise ValueError("grouping must be a nonempty proper subset of the parties")
    d = prod(s.spec.party_dims[g] for g in grouping)
    xs = [kron_vec(*(st.locals[g] for g in grouping)) for st in s.states]
    sym_idx = _sym_index(d)
    anti_idx = _antisym_index(d)
    sym_rows, anti_rows = [], []
    st = s.states
    for i in range(len(st)):
        for j in range(i + 1, len(st)):
            rest = True
            for k in range(nparty):
                if k not in grouping and not dot(st[i].locals[k], st[j].locals[k]):
                    rest = False
                    break
            if not rest:
                continue
            u, v = xs[i], xs[j]
            sym_rows.append([u[a] * v[a] if a == b else u[a] * v[b] + u[b] * v[a] for a, b in sym_idx])
            anti_rows.append([u[a] * v[b] - u[b] * v[a] for a, b in anti_idx])
    sym = RMatrix.from_rows(sym_rows, len(sym_idx)) if sym_rows else RMatrix.zeros(0, len(sym_idx))
    anti = RMatrix.from_rows(anti_rows, len(anti_idx)) if anti_rows else RMatrix.zeros(0, len(anti_idx))
    return ConstraintSystem(grouping, d, sym, anti)


def opm_solution_dims(s: StateSet, grouping: Iterable[int], on_support: bool = True) -> tuple[int, int]:
    """(symmetric, antisymmetric) solution-space dimensions for the grouping."""
    if on_support:
        s, _ = restrict_to_support(s)
    cs = opm_constraints(s, grouping)
    return cs.sym.cols - rank(cs.sym), cs.antisym.cols - rank(cs.antisym)


def sym_vector_to_matrix(vec: Sequence, d: int) -> RMatrix:
    m = [[Fraction(0)] * d for _ in range(d)]
    for (a, b), x in zip(_sym_index(d), vec):
        m[a][b] = m[b][a] = Fraction(x)
    return RMatrix.from_rows(m, d)


def antisym_vector_to_matrix(vec: Sequence, d: int) -> RMatrix:
    m = [[Fraction(0)] * d for _ in range(d)]
    for (a, b), x in zip(_antisym_index(d), vec):
        m[a][b] = Fraction(x)
        m[b][a] = -Fraction(x)
    return RMatrix.from_rows(m, d)


def identity_vector(d: int) -> tuple:
    return tuple(Fraction(int(a == b)) for a, b in _sym_index(d))


@dataclass
class IrreducibilityCertificate:
    grouping: tuple
    dim: int
    sym_shape: tuple
    antisym_shape: tuple
    sym_dim: int
    antisym_dim: int
    supports: tuple = ()

    @property
    def trivial_only(self) -> bool:
        return self.sym_dim == 1 and self.antisym_dim == 0

    @property
    def verdict(self) -> str:
        return "trivial-OPM-only" if self.trivial_only else "nontrivial-OPM-exists"

    @property
    def grouping_names(self) -> str:
        return "".join(PARTY_NAMES[g] for g in self.grouping)

    def to_dict(self) -> dict:
        return {
            "grouping": self.grouping_names,
            "dim": self.dim,
            "sym_constraints": list(self.sym_shape),
            "antisym_constraints": list(self.antisym_shape),
            "sym_dim": self.sym_dim,
            "antisym_dim": self.antisym_dim,
            "verdict": self.verdict,
            "supports": [list(x) for x in self.supports],
        }


def certify_grouping(s: StateSet, grouping: Iterable[int], on_support: bool = True) -> IrreducibilityCertificate:
    supports: tuple = ()
    if on_support:
        s, supports = restrict_to_support(s)
    cs = opm_constraints(s, grouping)
    return IrreducibilityCertificate(
        cs.grouping, cs.dim, cs.sym.shape, cs.antisym.shape,
        cs.sym.cols - rank(cs.sym), cs.antisym.cols - rank(cs.antisym), supports,
    )


@dataclass
class StrongIrreducibilityReport:
    certificates: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return bool(self.certificates) and all(c.trivial_only for c in self.certificates)

    @property
    def verdict(self) -> str:
        # a nontrivial solution does not prove reducibility
        return "strongly irreducible (certified)" if self.certified else "not certified"


def certify_strong_irreducibility(s: StateSet, on_support: bool = True) -> StrongIrreducibilityReport:
    """Certificates for each single party X and for the complementary group."""
    n = s.spec.n_parties
    if n < 3:
        raise ValueError("strong irreducibility needs at least three parties")
    certs = []
    for x in range(n):
        certs.append(certify_grouping(s, (x,), on_support))
        certs.append(certify_grouping(s, tuple(k for k in range(n) if k != x), on_support))
    return StrongIrreducibilityReport(certs)


def materialize_nontrivial_opm(s: StateSet, grouping: Iterable[int], on_support: bool = True):
    """A two-outcome measurement {E, I - E} that preserves orthogonality but is not trivial.

    Takes a kernel vector H that is not a multiple of the identity and sets
    E = (I + H / (1 + R)) / 2 with R the largest absolute row sum of H, which
    keeps both outcomes diagonally dominant and hence positive semidefinite.
    Returns ``(measurement, restricted_set)`` or None when only trivial
    solutions exist.
    """
    if on_support:
        s, _ = restrict_to_support(s)
    cs = opm_constraints(s, grouping)
    d = cs.dim
    ident = identity_vector(d)
    re = im = None
    for vec in kernel_basis(cs.sym):
        if not _proportional(vec, ident):
            re = sym_vector_to_matrix(vec, d)
            break
    if re is None:
        anti = kernel_basis(cs.antisym)
        if not anti:
            return None
        im = antisym_vector_to_matrix(anti[0], d)
        re = RMatrix.zeros(d, d)
    bound = max(
        sum(abs(re[i, j]) + (abs(im[i, j]) if im is not None else 0) for j in range(d))
        for i in range(d)
    )
    c = Fraction(1, 2) / (1 + bound)
    half = RMatrix.identity(d).scale(Fraction(1, 2))
    e_re = half + re.scale(c)
    e_im = im.scale(c) if im is not None else None
    f_re = RMatrix.identity(d) - e_re
    f_im = -e_im if e_im is not None else None
    dims = tuple(s.spec.party_dims[g] for g in cs.grouping)
    m = Measurement(cs.grouping, dims, (
        Outcome("E", effect=e_re, effect_imag=e_im),
        Outcome("I-E", effect=f_re, effect_imag=f_im),
    ), "materialized")
    return m, s


def _proportional(u, v) -> bool:
    i0 = next(i for i, x in enumerate(v) if x)
    if not u[i0]:
        return not any(u)
    r = Fraction(u[i0]) / v[i0]
    return all(Fraction(a) == r * b for a, b in zip(u, v))
