"""Adaptive LOCC discrimination trees and an exact simulator for them.

A tree node names the acting party and a local projective measurement; each
outcome leads to another node or to a leaf listing the states that can still
be present. Leaves with two candidates are accepted as distinguishable,
since two orthogonal pure states can always be told apart by LOCC. The
simulator does not replay that final step.

Outcomes omitted from a node's ``children`` are read as empty leaves.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .hilbert import PARTY_NAMES, inner_product, ket
from .measurements import (
    Measurement,
    apply_outcome,
    block_measurement,
    check_completeness,
    complement,
    local_measurement,
    op_violations,
    span,
    supported_outcomes,
)
from .statesets import StateSet


class MalformedTree(ValueError):
    pass


class NondeterministicBranch(Exception):
    def __init__(self, state_id: str, node: str, outcomes):
        super().__init__(f"state {state_id} has support on {list(outcomes)} at node {node}")
        self.state_id = state_id
        self.node = node
        self.outcomes = tuple(outcomes)


@dataclass(frozen=True)
class Leaf:
    candidates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))


@dataclass(frozen=True)
class Node:
    party: int
    measurement: Measurement
    children: dict = field(default_factory=dict)

    def child(self, label: str) -> Union["Node", Leaf]:
        return self.children.get(label, Leaf())


ProtocolTree = Union[Node, Leaf]


@dataclass
class NodeRecord:
    path: str
    party: str
    measurement: str
    candidates: tuple
    deterministic: bool
    orthogonality_preserving: bool
    nondeterministic_states: tuple = ()


@dataclass
class LeafRecord:
    path: str
    expected: tuple
    reached: tuple
    ok: bool
    reason: str = ""


@dataclass
class StateRecord:
    state: str
    paths: list
    leaves: list
    verdict: str
    reasons: list


@dataclass
class SimulationReport:
    states: dict
    nodes: dict
    leaves: dict
    errors: list

    @property
    def distinguished(self) -> bool:
        return all(r.verdict == "distinguished" for r in self.states.values())

    @property
    def perfectly_discriminated(self) -> bool:
        """Every reachable leaf identifies the state, ignoring branch determinism."""
        return all(
            all(self.leaves[p].ok for p in r.leaves)
            and all(self.nodes[n].orthogonality_preserving for n in _prefixes(r.paths))
            for r in self.states.values()
        )

    def to_dict(self) -> dict:
        return {
            "distinguished": self.distinguished,
            "perfectly_discriminated": self.perfectly_discriminated,
            "states": {
                k: {"paths": v.paths, "leaves": v.leaves, "verdict": v.verdict, "reasons": v.reasons}
                for k, v in sorted(self.states.items())
            },
            "nodes": {
                k: {
                    "party": v.party,
                    "measurement": v.measurement,
                    "candidates": list(v.candidates),
                    "deterministic": v.deterministic,
                    "orthogonality_preserving": v.orthogonality_preserving,
                    "nondeterministic_states": list(v.nondeterministic_states),
                }
                for k, v in sorted(self.nodes.items())
            },
            "leaves": {
                k: {"expected": list(v.expected), "reached": list(v.reached), "ok": v.ok, "reason": v.reason}
                for k, v in sorted(self.leaves.items())
            },
            "errors": list(self.errors),
        }


def _key(path) -> str:
    return "root" if not path else "root/" + "/".join(path)


def _prefixes(paths):
    seen = set()
    for p in paths:
        for i in range(len(p)):
            seen.add(_key(p[:i]))
    return seen


def validate_tree(tree: ProtocolTree, s: StateSet, path=()) -> None:
    if isinstance(tree, Leaf):
        if len(set(tree.candidates)) != len(tree.candidates):
            raise MalformedTree(f"duplicate candidates at {_key(path)}")
        return
    m = tree.measurement
    if not 0 <= tree.party < s.spec.n_parties:
        raise MalformedTree(f"node {_key(path)} acts on a party outside the set")
    if m.target != (tree.party,):
        raise MalformedTree(f"node {_key(path)}: measurement is not local to party {PARTY_NAMES[tree.party]}")
    if m.dims != (s.spec.party_dims[tree.party],):
        raise MalformedTree(f"node {_key(path)}: measurement dimension {m.dims[0]} does not match the party")
    if not m.is_projective or not check_completeness(m):
        raise MalformedTree(f"node {_key(path)}: measurement {m.name or '?'} is not a complete projective measurement")
    for label in tree.children:
        if label not in m.labels:
            raise MalformedTree(f"node {_key(path)}: unknown outcome {label}")
    for label in m.labels:
        validate_tree(tree.child(label), s, path + (label,))


def simulate(s: StateSet, tree: ProtocolTree, strict: bool = False) -> SimulationReport:
    """Walk every state of ``s`` through ``tree`` with exact support tests.

    At each node the measurement must preserve orthogonality of the current
    candidates, each candidate should have support on exactly one outcome,
    and the candidates passed to a child are those with support on its
    outcome. With ``strict=True`` the first nondeterministic branch raises
    NondeterministicBranch instead of being recorded.
    """
    validate_tree(tree, s)
    nodes: dict = {}
    leaves: dict = {}
    reach: dict = {sid: [] for sid in s.ids}
    errors: list = []

    def walk(t, cands: StateSet, path):
        key = _key(path)
        if isinstance(t, Leaf):
            got = cands.ids
            expected = tuple(t.candidates)
            ok, reason = True, ""
            if set(got) != set(expected):
                ok, reason = False, f"leaf lists {sorted(expected)}, protocol delivers {sorted(got)}"
            elif len(got) > 2:
                ok, reason = False, f"{len(got)} candidates left"
            elif len(got) == 2 and inner_product(*cands.states):
                ok, reason = False, "the two remaining states are not orthogonal"
            leaves[key] = LeafRecord(key, expected, got, ok, reason)
            for sid in got:
                reach[sid].append(path)
            return
        m = t.measurement
        support = {st.id: supported_outcomes(st, m) for st in cands.states}
        nondet = tuple(sid for sid, sup in support.items() if len(sup) != 1)
        violations = op_violations(cands, m) if len(cands) > 1 else []
        nodes[key] = NodeRecord(
            key, PARTY_NAMES[t.party], m.name, cands.ids,
            deterministic=not nondet,
            orthogonality_preserving=not violations,
            nondeterministic_states=nondet,
        )
        for sid in nondet:
            err = NondeterministicBranch(sid, key, support[sid])
            if strict:
                raise err
            errors.append(str(err))
        for label in m.labels:
            ids = [sid for sid in cands.ids if label in support[sid]]
            sub = apply_outcome(cands.subset(ids), m, label) if ids else cands.subset(())
            walk(t.child(label), sub, path + (label,))

    walk(tree, s, ())

    states = {}
    for sid in s.ids:
        paths = [list(p) for p in reach[sid]]
        leaf_keys = [_key(p) for p in reach[sid]]
        reasons = []
        if not paths:
            reasons.append("never reaches a leaf")
        if len(paths) > 1:
            reasons.append(f"branches nondeterministically into {len(paths)} leaves")
        for p in reach[sid]:
            for i in range(len(p)):
                rec = nodes[_key(p[:i])]
                if sid in rec.nondeterministic_states and "nondeterministic branching" not in reasons:
                    reasons.append("nondeterministic branching")
                if not rec.orthogonality_preserving:
                    reasons.append(f"orthogonality not preserved at {rec.path}")
            leaf = leaves[_key(p)]
            if not leaf.ok:
                reasons.append(f"leaf {leaf.path}: {leaf.reason}")
        states[sid] = StateRecord(sid, paths, leaf_keys, "failed" if reasons else "distinguished", reasons)
    return SimulationReport(states, nodes, leaves, errors)


def protocol_measurements(tree: ProtocolTree) -> list[Measurement]:
    """Distinct measurements of a tree in depth-first order."""
    out: list = []

    def visit(t):
        if isinstance(t, Leaf):
            return
        if all(m is not t.measurement and m != t.measurement for m in out):
            out.append(t.measurement)
        for label in t.measurement.labels:
            visit(t.child(label))

    visit(tree)
    return out


# ---------------------------------------------------------------- builders


def build_g1_protocol() -> Node:
    nb = local_measurement(1, 6, [
        span("N1", ket(6, "0-4")),
        span("N2", ket(6, "2-3")),
        span("N3", ket(6, "0+1+2+3+4+5")),
        complement("N4"),
    ], "N_B")
    return Node(1, nb, {
        "N1": Leaf(("psi3",)),
        "N2": Leaf(("psi4",)),
        "N3": Leaf(("psi5",)),
        "N4": Leaf(("psi1", "psi2")),
    })


def build_g2_protocol() -> Node:
    kc = local_measurement(2, 4, [
        span("K1", ket(4, "0+3")),
        span("K2", ket(4, "0-3")),
        span("K3", ket(4, "1+2")),
        span("K4", ket(4, "1-2")),
    ], "K_C")
    return Node(2, kc, {
        "K1": Leaf(("phi2", "phi4")),
        "K2": Leaf(("phi3",)),
        "K3": Leaf(("phi1", "phi4")),
        "K4": Leaf(("phi3",)),
    })


def m1(party: int, suffix: str = "") -> Measurement:
    return local_measurement(party, 6, [
        span("P1", ket(6, "0-4")),
        span("P2", ket(6, "1-5")),
        span("P3", ket(6, "2-3")),
        complement("P4"),
    ], "M1" + suffix)


def m2(party: int, suffix: str = "") -> Measurement:
    return local_measurement(party, 6, [
        span("Q1", ket(6, "0+1+4+5")),
        span("Q2", ket(6, "0-1+4-5")),
        complement("Q3"),
    ], "M2" + suffix)


def m3(party: int, suffix: str = "") -> Measurement:
    return local_measurement(party, 6, [
        span("R1", ket(6, "0+2+4+3")),
        span("R2", ket(6, "0-2+4-3")),
        complement("R3"),
    ], "M3" + suffix)


def build_g3_protocol() -> Node:
    """Alice M1, then Bob M1, then Charlie M1 where still needed; M2/M3 split the +/- pairs."""
    A, B, C = 0, 1, 2
    sfx = {A: "^A", B: "^B", C: "^C"}

    def pair(name, party, which):
        if which == 2:
            return Node(party, m2(party, sfx[party]), {"Q1": Leaf((name + "+",)), "Q2": Leaf((name + "-",))})
        return Node(party, m3(party, sfx[party]), {"R1": Leaf((name + "+",)), "R2": Leaf((name + "-",))})

    def node(party, children):
        return Node(party, m1(party, sfx[party]), children)

    return node(A, {
        "P1": node(B, {
            "P1": Leaf(("xi5",)),
            "P2": pair("xi1", C, 2),
            "P3": pair("xi2", C, 3),
        }),
        "P2": node(B, {
            "P2": Leaf(("xi10",)),
            "P3": pair("xi3", C, 2),
            "P4": node(C, {"P1": pair("xi6", B, 2), "P3": pair("xi9", B, 3)}),
        }),
        "P3": node(B, {
            "P2": pair("xi4", C, 3),
            "P3": Leaf(("xi15",)),
            "P4": node(C, {"P1": pair("xi7", B, 3), "P2": pair("xi8", B, 2)}),
        }),
        "P4": node(B, {
            "P1": node(C, {"P2": pair("xi11", A, 2), "P3": pair("xi12", A, 3)}),
            "P2": pair("xi13", A, 2),
            "P3": pair("xi14", A, 3),
        }),
    })


def build_g4_protocol() -> Node:
    """Charlie measures M1 first; the branches follow the step-by-step analysis."""
    A, B, C = 0, 1, 2
    m1a = block_measurement(A, 3, {"P1": (0,), "P2": (1,), "P3": (2,)}, "M1^A")
    m1b = block_measurement(B, 3, {"P1": (0, 1), "P2": (2,)}, "M1^B")
    m2a = block_measurement(A, 3, {"Q1": (0, 1), "Q2": (2,)}, "M2^A")
    m2b = block_measurement(B, 3, {"Q1": (0,), "Q2": (1,), "Q3": (2,)}, "M2^B")
    m3b = block_measurement(B, 3, {"T1": (0, 2), "T2": (1,)}, "M3^B")
    m2a_r = block_measurement(A, 3, {"R1": (0, 2), "R2": (1,)}, "M2'^A")
    m4b = block_measurement(B, 3, {"N1": (0,), "N2": (1,), "N3": (2,)}, "M4^B")
    m3a = block_measurement(A, 3, {"T1": (0,), "T2": (1,), "T3": (2,)}, "M3^A")
    m5b = block_measurement(B, 3, {"L1": (0,), "L2": (1,), "L3": (2,)}, "M5^B")

    def pm(name):
        return Leaf((name + "+", name + "-"))

    return Node(C, m1(C, "^C"), {
        "P1": Node(A, m1a, {
            "P1": Leaf(("zeta5",)),
            "P2": pm("zeta6"),
            "P3": pm("zeta7"),
        }),
        "P2": Node(B, m1b, {
            "P2": pm("zeta14"),
            "P1": Node(A, m2a, {
                "Q2": pm("zeta8"),
                "Q1": Node(B, m2b, {
                    "Q2": Leaf(("zeta10",)),
                    "Q1": pm("zeta11"),
                }),
            }),
        }),
        "P3": Node(B, m3b, {
            "T2": pm("zeta13"),
            "T1": Node(A, m2a_r, {
                "R2": pm("zeta9"),
                "R1": Node(B, m4b, {
                    "N1": pm("zeta12"),
                    "N3": Leaf(("zeta15",)),
                }),
            }),
        }),
        "P4": Node(A, m3a, {
            "T2": pm("zeta3"),
            "T3": pm("zeta4"),
            "T1": Node(B, m5b, {
                "L2": pm("zeta1"),
                "L3": pm("zeta2"),
            }),
        }),
    })


PROTOCOLS = {
    "g1": build_g1_protocol,
    "g2": build_g2_protocol,
    "g3": build_g3_protocol,
    "g4": build_g4_protocol,
}
