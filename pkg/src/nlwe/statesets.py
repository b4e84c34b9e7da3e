"""Constructors for the seed sets, the UPBs and the strongly nonlocal template.

Kets are written in a signed-sum shorthand:
``ket(6, "0-1+4-5")`` is e0 - e1 + e4 - e5 in C^6. The +/- members of a pair
are separate states whose ids end in ``+`` / ``-``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .hilbert import PartySpec, ProductState, StructuralError, inner_product, ket


@dataclass(frozen=True)
class StateSet:
    spec: PartySpec
    states: tuple

    def __post_init__(self):
        states = tuple(self.states)
        seen = set()
        for s in states:
            if s.id in seen:
                raise StructuralError(f"duplicate state id {s.id!r}")
            seen.add(s.id)
            if s.dims != self.spec.party_dims:
                raise StructuralError(
                    f"state {s.id} has layout {s.dims}, expected {self.spec.party_dims}"
                )
        object.__setattr__(self, "states", states)

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    @property
    def ids(self) -> tuple:
        return tuple(s.id for s in self.states)

    def by_id(self, sid: str) -> ProductState:
        for s in self.states:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def subset(self, ids: Iterable[str]) -> "StateSet":
        ids = set(ids)
        return StateSet(self.spec, tuple(s for s in self.states if s.id in ids))

    def replace(self, states: Sequence[ProductState], spec: PartySpec | None = None) -> "StateSet":
        return StateSet(spec or self.spec, tuple(states))


def _state(sid, dims, *exprs):
    return ProductState(sid, tuple(ket(d, e) for d, e in zip(dims, exprs)))


def _pm(sid, dims, *exprs):
    """The two members of a +/- pair; ``{s}`` in an expression becomes the sign."""
    out = []
    for sign in "+-":
        out.append(_state(f"{sid}{sign}", dims, *(e.replace("{s}", sign) for e in exprs)))
    return out


def build_g1() -> StateSet:
    """Five states in C^3 (x) C^6, Bob's party split as qubit (x) qutrit."""
    spec = PartySpec((3, 6), (None, (2, 3)))
    d = spec.party_dims
    return StateSet(spec, (
        _state("psi1", d, "0", "0-1+4-5"),
        _state("psi2", d, "2", "1-2+5-3"),
        _state("psi3", d, "1-2", "0-4"),
        _state("psi4", d, "0-1", "2-3"),
        _state("psi5", d, "0+1+2", "0+1+2+3+4+5"),
    ))


def build_g2() -> StateSet:
    """Four states in C^2 (x) C^2 (x) C^4, Charlie's party split as two qubits."""
    spec = PartySpec((2, 2, 4), (None, None, (2, 2)))
    d = spec.party_dims
    return StateSet(spec, (
        _state("phi1", d, "0", "0-1", "1+2"),
        _state("phi2", d, "0-1", "1", "0+3"),
        _state("phi3", d, "1", "0", "0-1+2-3"),
        _state("phi4", d, "0+1", "0+1", "0+1+2+3"),
    ))


# single-party kets shared by the 6x6x6 and 3x3x6 families
_P, _Q, _R = "0-4", "1-5", "2-3"
_ETA = "0{s}1+4{s}5"
_KAPPA = "0{s}2+4{s}3"


def build_g3() -> StateSet:
    """27 states in C^6 (x) C^6 (x) C^6, every party split as qubit (x) qutrit."""
    spec = PartySpec((6, 6, 6), ((2, 3),) * 3)
    d = spec.party_dims
    states = []
    states += _pm("xi1", d, _P, _Q, _ETA)
    states += _pm("xi2", d, _P, _R, _KAPPA)
    states += _pm("xi3", d, _Q, _R, _ETA)
    states += _pm("xi4", d, _R, _Q, _KAPPA)
    states.append(_state("xi5", d, _P, _P, _P))
    states += _pm("xi6", d, _Q, _ETA, _P)
    states += _pm("xi7", d, _R, _KAPPA, _P)
    states += _pm("xi8", d, _R, _ETA, _Q)
    states += _pm("xi9", d, _Q, _KAPPA, _R)
    states.append(_state("xi10", d, _Q, _Q, _Q))
    states += _pm("xi11", d, _ETA, _P, _Q)
    states += _pm("xi12", d, _KAPPA, _P, _R)
    states += _pm("xi13", d, _ETA, _Q, _R)
    states += _pm("xi14", d, _KAPPA, _R, _Q)
    states.append(_state("xi15", d, _R, _R, _R))
    return StateSet(spec, tuple(states))


def build_g4() -> StateSet:
    """27 states in C^3 (x) C^3 (x) C^6, Charlie's party split as qubit (x) qutrit."""
    spec = PartySpec((3, 3, 6), (None, None, (2, 3)))
    d = spec.party_dims
    states = []
    states += _pm("zeta1", d, "0", "1", _ETA)
    states += _pm("zeta2", d, "0", "2", _KAPPA)
    states += _pm("zeta3", d, "1", "2", _ETA)
    states += _pm("zeta4", d, "2", "1", _KAPPA)
    states.append(_state("zeta5", d, "0", "0", _P))
    states += _pm("zeta6", d, "1", "0{s}1", _P)
    states += _pm("zeta7", d, "2", "0{s}2", _P)
    states += _pm("zeta8", d, "2", "0{s}1", _Q)
    states += _pm("zeta9", d, "1", "0{s}2", _R)
    states.append(_state("zeta10", d, "1", "1", _Q))
    states += _pm("zeta11", d, "0{s}1", "0", _Q)
    states += _pm("zeta12", d, "0{s}2", "0", _R)
    states += _pm("zeta13", d, "0{s}1", "1", _R)
    states += _pm("zeta14", d, "0{s}2", "2", _Q)
    states.append(_state("zeta15", d, "2", "2", _R))
    return StateSet(spec, tuple(states))


def build_tiles_upb() -> StateSet:
    spec = PartySpec((3, 3))
    d = spec.party_dims
    return StateSet(spec, (
        _state("tile1", d, "0", "0-1"),
        _state("tile2", d, "2", "1-2"),
        _state("tile3", d, "1-2", "0"),
        _state("tile4", d, "0-1", "2"),
        _state("stopper", d, "0+1+2", "0+1+2"),
    ))


def build_shifts_upb() -> StateSet:
    spec = PartySpec((2, 2, 2))
    d = spec.party_dims
    return StateSet(spec, (
        _state("shift1", d, "0", "0-1", "1"),
        _state("shift2", d, "0-1", "1", "0"),
        _state("shift3", d, "1", "0", "0-1"),
        _state("shift4", d, "0+1", "0+1", "0+1"),
    ))


_POOLS = ({0, 4}, {1, 5}, {2, 3})


@dataclass(frozen=True)
class StrongTemplateParams:
    """Per-party basis triple ``(p, q, r)`` and embedding dimension.

    In dimension 6 the triple is drawn from p in {0,4}, q in {1,5},
    r in {2,3}. In dimension 3 only (0, 1, 2) is allowed.
    """

    triples: tuple
    dims: tuple = (6, 6, 6)

    def __post_init__(self):
        triples = tuple(tuple(int(x) for x in t) for t in self.triples)
        dims = tuple(int(d) for d in self.dims)
        if len(triples) != 3 or len(dims) != 3:
            raise StructuralError("the strong template has exactly three parties")
        for t, d in zip(triples, dims):
            if len(t) != 3 or len(set(t)) != 3:
                raise StructuralError(f"triple {t} must hold three distinct indices")
            if d == 6:
                if any(x not in pool for x, pool in zip(t, _POOLS)):
                    raise StructuralError(f"triple {t} outside the pools p{{0,4}} q{{1,5}} r{{2,3}}")
            elif d == 3:
                if t != (0, 1, 2):
                    raise StructuralError(f"a qutrit party must use (0, 1, 2), got {t}")
            else:
                raise StructuralError(f"unsupported party dimension {d}")
        object.__setattr__(self, "triples", triples)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def uniform(cls, triple=(0, 1, 2)) -> "StrongTemplateParams":
        return cls((tuple(triple),) * 3)

    @classmethod
    def from_outcomes(cls, outcomes: Sequence[str]) -> "StrongTemplateParams":
        """Triples forced by K1 / K2 outcomes, one per party."""
        table = {"K1": (0, 1, 2), "K2": (4, 5, 3)}
        return cls(tuple(table[o] for o in outcomes))

    @classmethod
    def charlie_only(cls, triple) -> "StrongTemplateParams":
        """Alice and Bob are qutrits on (0, 1, 2); Charlie embeds in C^6."""
        return cls(((0, 1, 2), (0, 1, 2), tuple(triple)), (3, 3, 6))


def build_strong_set(params: StrongTemplateParams) -> StateSet:
    """The 27-state strongly nonlocal template on the chosen basis indices.

    Each row of the template is a cyclic family; ids follow the row/column
    layout ``t1..t15`` so that ``t{k}`` lines up with ``xi{k}``/``zeta{k}``.
    """
    dims = params.dims

    def e(k, which):
        v = [0] * dims[k]
        v[params.triples[k][which]] = 1
        return tuple(v)

    def sup(k, a, b, sign):
        v = [0] * dims[k]
        trip = params.triples[k]
        v[trip[a]] += 1
        v[trip[b]] += sign
        return tuple(v)

    P, Q, R = 0, 1, 2

    def st(sid, *locs):
        return ProductState(sid, locs)

    rows = [
        # (first, second, superposition pair), cyclic placements
        (P, Q, (P, Q), ("t1", "t6", "t11")),
        (P, R, (P, R), ("t2", "t7", "t12")),
        (Q, R, (P, Q), ("t3", "t8", "t13")),
        (R, Q, (P, R), ("t4", "t9", "t14")),
    ]
    states = []
    for x, y, (a, b), (id1, id2, id3) in rows:
        for place, sid in ((0, id1), (1, id2), (2, id3)):
            for sign, tag in ((1, "+"), (-1, "-")):
                # place 0: x y s ; place 1: y s x ; place 2: s x y
                layout = [None, None, None]
                if place == 0:
                    layout = [("e", x), ("e", y), ("s",)]
                elif place == 1:
                    layout = [("e", y), ("s",), ("e", x)]
                else:
                    layout = [("s",), ("e", x), ("e", y)]
                locs = tuple(
                    e(k, item[1]) if item[0] == "e" else sup(k, a, b, sign)
                    for k, item in enumerate(layout)
                )
                states.append(st(f"{sid}{tag}", *locs))
    for sid, w in (("t5", P), ("t10", Q), ("t15", R)):
        states.append(st(sid, e(0, w), e(1, w), e(2, w)))
    order = {f"t{k}": k for k in range(1, 16)}
    states.sort(key=lambda s: (order[s.id.rstrip("+-")], s.id[-1] == "-"))
    return StateSet(PartySpec(dims), tuple(states))


def check_orthogonality(s: StateSet) -> list[tuple[str, str, Fraction]]:
    """Every pair ``(id_i, id_j, <i|j>)`` with nonzero overlap, in set order."""
    out = []
    st = s.states
    for i in range(len(st)):
        for j in range(i + 1, len(st)):
            ip = inner_product(st[i], st[j])
            if ip:
                out.append((st[i].id, st[j].id, ip))
    return out


BUILDERS = {
    "g1": build_g1,
    "g2": build_g2,
    "g3": build_g3,
    "g4": build_g4,
    "tiles": build_tiles_upb,
    "shifts": build_shifts_upb,
}


def build_named(name: str) -> StateSet:
    """Built-in set by name: g1..g4, tiles, shifts, ``strong:p,q,r`` or ``strong7:p,q,r``.

    ``strong:`` accepts one triple for all parties or three triples
    separated by ``/``. ``strong7:`` builds the qutrit-qutrit-C^6 form with the
    given triple on Charlie.
    """
    if name in BUILDERS:
        return BUILDERS[name]()
    head, _, tail = name.partition(":")
    if head in ("strong", "strong7") and tail:
        try:
            triples = [tuple(int(x) for x in part.split(",")) for part in tail.split("/")]
        except ValueError:
            raise KeyError(name) from None
        try:
            if head == "strong7" and len(triples) == 1:
                return build_strong_set(StrongTemplateParams.charlie_only(triples[0]))
            if head == "strong" and len(triples) in (1, 3):
                return build_strong_set(StrongTemplateParams(tuple(triples * (3 // len(triples)))))
        except ValueError:
            raise KeyError(name) from None
    raise KeyError(name)
