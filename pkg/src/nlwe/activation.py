"""End-to-end checks that the local OPMs turn each seed set into its target.

Each ``verify_theoremN`` applies the measurement, checks it preserves
orthogonality and annihilates no state, and matches every outcome set
against the claimed target up to a fixed basis relabeling, a permutation of
states and a nonzero scalar per state.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .exactla import primitive
from .hilbert import PARTY_NAMES, PartySpec, ProductState, StructuralError
from .measurements import (
    AnnihilatedState,
    Measurement,
    apply_outcome,
    block_measurement,
    check_completeness,
    is_orthogonality_preserving,
)
from .nonlocality import certify_strong_irreducibility, check_upb
from .statesets import (
    StateSet,
    StrongTemplateParams,
    build_g1,
    build_g2,
    build_g3,
    build_g4,
    build_shifts_upb,
    build_strong_set,
    build_tiles_upb,
    check_orthogonality,
)


@dataclass(frozen=True)
class RelabelingMap:
    """Per-party partial index map ``{old: new}`` together with the new dimension.

    Parties mapped to None are left untouched.
    """

    maps: tuple

    def __post_init__(self):
        maps = []
        for entry in self.maps:
            if entry is None:
                maps.append(None)
                continue
            mapping, dim = entry
            mapping = {int(a): int(b) for a, b in dict(mapping).items()}
            if len(set(mapping.values())) != len(mapping):
                raise StructuralError("relabeling is not injective")
            if any(not 0 <= b < dim for b in mapping.values()):
                raise StructuralError("relabeling target outside the new dimension")
            maps.append((tuple(sorted(mapping.items())), int(dim)))
        object.__setattr__(self, "maps", tuple(maps))

    @classmethod
    def on_party(cls, n_parties: int, party: int, mapping: Mapping[int, int], dim: int) -> "RelabelingMap":
        maps = [None] * n_parties
        maps[party] = (mapping, dim)
        return cls(tuple(maps))

    def describe(self) -> dict:
        return {
            PARTY_NAMES[k]: {"map": {str(a): b for a, b in m[0]}, "dim": m[1]}
            for k, m in enumerate(self.maps) if m is not None
        }


def apply_relabel(s: StateSet, relabel: RelabelingMap) -> StateSet:
    if len(relabel.maps) != s.spec.n_parties:
        raise StructuralError("relabeling has the wrong number of parties")
    dims = list(s.spec.party_dims)
    facs = list(s.spec.factorizations)
    for k, m in enumerate(relabel.maps):
        if m is not None:
            dims[k] = m[1]
            facs[k] = None
    out = []
    for st in s.states:
        locs = list(st.locals)
        for k, m in enumerate(relabel.maps):
            if m is None:
                continue
            mapping = dict(m[0])
            v = [Fraction(0)] * m[1]
            for i, x in enumerate(st.locals[k]):
                if not x:
                    continue
                if i not in mapping:
                    raise StructuralError(f"state {st.id}: index {i} of party {PARTY_NAMES[k]} outside the relabeling")
                v[mapping[i]] = x
            locs[k] = tuple(v)
        out.append(ProductState(st.id, tuple(locs)))
    return StateSet(PartySpec(tuple(dims), tuple(facs)), tuple(out))


def _canonical(st: ProductState):
    """Sign-normalised primitive form of each local; equal keys mean proportional states."""
    key = []
    for v in st.locals:
        p = primitive(v)
        lead = next(x for x in p if x)
        if lead < 0:
            p = tuple(-x for x in p)
        key.append(p)
    return tuple(key)


def _ratio(a: ProductState, b: ProductState) -> Fraction:
    """Scalar c with a = c * b (full tensor), assuming proportionality."""
    c = Fraction(1)
    for u, v in zip(a.locals, b.locals):
        i = next(i for i, x in enumerate(v) if x)
        c *= Fraction(u[i]) / v[i]
    return c


@dataclass
class MatchResult:
    matched: bool
    bijection: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "matched": self.matched,
            "bijection": dict(self.bijection),
            "scalars": {k: str(v) for k, v in self.scalars.items()},
            "reason": self.reason,
        }


def match_sets(a: StateSet, b: StateSet, relabel: RelabelingMap | None = None) -> MatchResult:
    """Find a bijection a -> b with each pair proportional, after relabeling ``a``.

    Proportional product states have identical sign-normalised primitive
    locals, so the search is a lookup on that key; an orthogonal set never
    holds two states with the same key.
    """
    if len(a) != len(b) or a.spec.n_parties != b.spec.n_parties:
        return MatchResult(False, reason=f"shape mismatch: {len(a)} states/{a.spec.n_parties} parties "
                                         f"vs {len(b)}/{b.spec.n_parties}")
    if relabel is not None:
        try:
            a = apply_relabel(a, relabel)
        except StructuralError as exc:
            return MatchResult(False, reason=str(exc))
    if a.spec.party_dims != b.spec.party_dims:
        return MatchResult(False, reason=f"party dimensions {a.spec.party_dims} vs {b.spec.party_dims}")
    index: dict = {}
    for st in b.states:
        index.setdefault(_canonical(st), []).append(st)
    used = set()
    bij, scal = {}, {}
    for st in a.states:
        cands = [t for t in index.get(_canonical(st), []) if t.id not in used]
        if not cands:
            return MatchResult(False, bij, scal, reason=f"no partner for {st.id}")
        t = cands[0]
        used.add(t.id)
        bij[st.id] = t.id
        scal[st.id] = _ratio(st, t)
    return MatchResult(True, bij, scal)


@dataclass
class OutcomeCheck:
    outcome: str
    deterministic: bool
    orthogonality_preserving: bool
    n_states: int
    target: str
    relabel: dict | None
    match: MatchResult | None
    upb: bool | None = None
    certificates: list | None = None
    annihilated: str | None = None

    @property
    def passed(self) -> bool:
        ok = self.deterministic and self.orthogonality_preserving and self.match is not None and self.match.matched
        if self.upb is not None:
            ok = ok and self.upb
        if self.certificates is not None:
            ok = ok and bool(self.certificates) and all(c.trivial_only for c in self.certificates)
        return ok

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "deterministic": self.deterministic,
            "orthogonality_preserving": self.orthogonality_preserving,
            "annihilated": self.annihilated,
            "n_states": self.n_states,
            "target": self.target,
            "relabel": self.relabel,
            "match": self.match.to_dict() if self.match else None,
            "upb": self.upb,
            "certificates": [c.to_dict() for c in self.certificates] if self.certificates is not None else None,
            "passed": self.passed,
        }


@dataclass
class TheoremReport:
    theorem: str
    measurement_complete: bool
    orthogonality_preserving: bool
    outcomes: list

    @property
    def passed(self) -> bool:
        return (self.measurement_complete and self.orthogonality_preserving
                and bool(self.outcomes) and all(o.passed for o in self.outcomes))

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "measurement_complete": self.measurement_complete,
            "orthogonality_preserving": self.orthogonality_preserving,
            "outcomes": [o.to_dict() for o in self.outcomes],
            "passed": self.passed,
        }


def k_measurement(party: int) -> Measurement:
    """{K1 = P[0,1,2], K2 = P[3,4,5]} on a six-dimensional party."""
    return block_measurement(party, 6, {"K1": (0, 1, 2), "K2": (3, 4, 5)}, "K")


def _single_outcome(seed, m, label, target, target_name, relabel, upb=False, certify=False):
    try:
        out = apply_outcome(seed, m, label)
    except AnnihilatedState as exc:
        return OutcomeCheck(label, False, False, 0, target_name, None, None, annihilated=exc.state_id), None
    op = not check_orthogonality(out)
    match = match_sets(out, target, relabel)
    chk = OutcomeCheck(label, True, op, len(out), target_name,
                       relabel.describe() if relabel else None, match)
    if upb:
        chk.upb = check_upb(apply_relabel(out, relabel) if relabel else out).is_upb
    if certify:
        chk.certificates = certify_strong_irreducibility(out).certificates
    return chk, out


def verify_theorem1() -> TheoremReport:
    g1 = build_g1()
    kb = k_measurement(1)
    tiles = build_tiles_upb()
    relabels = {
        "K1": RelabelingMap.on_party(2, 1, {0: 0, 1: 1, 2: 2}, 3),
        "K2": RelabelingMap.on_party(2, 1, {3: 2, 4: 0, 5: 1}, 3),
    }
    outcomes = [
        _single_outcome(g1, kb, label, tiles, "tiles", relabels[label], upb=True)[0]
        for label in ("K1", "K2")
    ]
    return TheoremReport("theorem1", check_completeness(kb), is_orthogonality_preserving(g1, kb), outcomes)


def r_measurement() -> Measurement:
    return block_measurement(2, 4, {"R1": (0, 1), "R2": (2, 3)}, "R")


def verify_theorem2() -> TheoremReport:
    g2 = build_g2()
    r = r_measurement()
    shifts = build_shifts_upb()
    relabels = {
        "R1": RelabelingMap.on_party(3, 2, {0: 0, 1: 1}, 2),
        "R2": RelabelingMap.on_party(3, 2, {2: 1, 3: 0}, 2),
    }
    outcomes = [
        _single_outcome(g2, r, label, shifts, "shifts", relabels[label], upb=True)[0]
        for label in ("R1", "R2")
    ]
    return TheoremReport("theorem2", check_completeness(r), is_orthogonality_preserving(g2, r), outcomes)


def theorem3_outcome(combo: Sequence[str]) -> StateSet:
    """G3 after K on Alice, Bob and Charlie with the given outcomes (raises on annihilation)."""
    s = build_g3()
    for party, label in enumerate(combo):
        s = apply_outcome(s, k_measurement(party), label)
    return s


def verify_theorem3(combos: Sequence[Sequence[str]] | None = None) -> TheoremReport:
    g3 = build_g3()
    combos = list(combos) if combos is not None else list(itertools.product(("K1", "K2"), repeat=3))
    complete = all(check_completeness(k_measurement(p)) for p in range(3))
    outcomes = []
    all_op = True
    for combo in combos:
        name = "".join(combo)
        s = g3
        chk = None
        for party, label in enumerate(combo):
            m = k_measurement(party)
            if not is_orthogonality_preserving(s, m):
                all_op = False
            try:
                s = apply_outcome(s, m, label)
            except AnnihilatedState as exc:
                chk = OutcomeCheck(name, False, False, 0, "strong", None, None, annihilated=exc.state_id)
                break
        if chk is None:
            params = StrongTemplateParams.from_outcomes(combo)
            target = build_strong_set(params)
            chk = OutcomeCheck(
                name, True, not check_orthogonality(s), len(s),
                "strong:" + "/".join(",".join(map(str, t)) for t in params.triples),
                None, match_sets(s, target),
                certificates=certify_strong_irreducibility(s).certificates,
            )
        outcomes.append(chk)
    return TheoremReport("theorem3", complete, all_op, outcomes)


def verify_theorem4() -> TheoremReport:
    g4 = build_g4()
    kc = k_measurement(2)
    outcomes = []
    for label, triple in (("K1", (0, 1, 2)), ("K2", (4, 5, 3))):
        params = StrongTemplateParams.charlie_only(triple)
        target = build_strong_set(params)
        chk, _ = _single_outcome(g4, kc, label, target, "strong7:" + ",".join(map(str, triple)),
                                 None, certify=True)
        outcomes.append(chk)
    return TheoremReport("theorem4", check_completeness(kc), is_orthogonality_preserving(g4, kc), outcomes)


THEOREMS = {
    "theorem1": verify_theorem1,
    "theorem2": verify_theorem2,
    "theorem3": verify_theorem3,
    "theorem4": verify_theorem4,
}
