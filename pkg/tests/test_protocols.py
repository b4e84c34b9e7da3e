import pytest

from nlwe.exactla import dot
from nlwe.hilbert import PartySpec, ProductState
from nlwe.measurements import local_measurement, span
from nlwe.protocols import (
    Leaf,
    MalformedTree,
    NondeterministicBranch,
    Node,
    PROTOCOLS,
    build_g1_protocol,
    build_g2_protocol,
    build_g3_protocol,
    build_g4_protocol,
    m1,
    protocol_measurements,
    simulate,
    validate_tree,
)
from nlwe.statesets import StateSet, build_g1, build_g2, build_g3, build_g4


def leaves(rep):
    return {k: set(v.expected) for k, v in rep.leaves.items()}


def test_g1_protocol():
    rep = simulate(build_g1(), build_g1_protocol())
    assert rep.distinguished
    assert rep.states["psi3"].leaves == ["root/N1"]
    lv = leaves(rep)
    assert lv["root/N3"] == {"psi5"}
    assert lv["root/N4"] == {"psi1", "psi2"}


def test_g2_protocol_leaves_and_branching():
    g2 = build_g2()
    tree = build_g2_protocol()
    validate_tree(tree, g2)
    rep = simulate(g2, tree)
    lv = leaves(rep)
    assert lv["root/K4"] == {"phi3"}
    assert lv["root/K2"] == {"phi3"}
    assert len(lv["root/K1"]) == 2
    # every reachable leaf names the state, but phi3 and phi4 each reach two leaves
    assert rep.perfectly_discriminated
    assert not rep.distinguished
    assert {k for k, r in rep.states.items() if r.verdict != "distinguished"} == {"phi3", "phi4"}
    with pytest.raises(NondeterministicBranch):
        simulate(g2, tree, strict=True)


def test_g3_protocol():
    rep = simulate(build_g3(), build_g3_protocol())
    assert rep.distinguished
    assert rep.states["xi5"].paths == [["P1", "P1"]]
    assert set(rep.nodes["root/P1"].candidates) == {"xi1+", "xi1-", "xi2+", "xi2-", "xi5"}
    assert set(rep.nodes["root/P2/P4"].candidates) == {"xi6+", "xi6-", "xi9+", "xi9-"}
    assert rep.nodes["root/P2/P4"].measurement == "M1^C"
    assert all(len(v) <= 2 for v in leaves(rep).values())


def test_g4_protocol():
    rep = simulate(build_g4(), build_g4_protocol())
    assert rep.distinguished
    assert set(rep.nodes["root/P1"].candidates) == {"zeta5", "zeta6+", "zeta6-", "zeta7+", "zeta7-"}
    lv = leaves(rep)
    assert lv["root/P1/P1"] == {"zeta5"}
    assert lv["root/P4/T2"] == {"zeta3+", "zeta3-"}
    assert all(len(v) <= 2 for v in lv.values())


def test_single_state_bare_leaf():
    s = StateSet(PartySpec((2, 2)), (ProductState("only", ((1, 0), (0, 1))),))
    assert simulate(s, Leaf(("only",))).distinguished


def test_wrong_leaf_is_reported():
    g1 = build_g1()
    tree = build_g1_protocol()
    bad = Node(tree.party, tree.measurement, {**tree.children, "N3": Leaf(("psi4",))})
    rep = simulate(g1, bad)
    assert not rep.distinguished
    assert rep.states["psi5"].verdict != "distinguished"


def test_malformed_trees():
    g1 = build_g1()
    with pytest.raises(MalformedTree):
        validate_tree(Node(0, m1(1), {}), g1)
    incomplete = local_measurement(1, 6, [span("X", [1, 0, 0, 0, 0, 0])])
    with pytest.raises(MalformedTree):
        validate_tree(Node(1, incomplete, {}), g1)
    with pytest.raises(MalformedTree):
        validate_tree(Node(1, build_g1_protocol().measurement, {"nope": Leaf(())}), g1)


def test_protocol_measurements_are_complete():
    for name, builder in PROTOCOLS.items():
        ms = protocol_measurements(builder())
        assert ms, name


def _split_classes(s, ids, party):
    """Connected components of the 'locals not orthogonal' graph at one party.

    A measurement with every state inside a single outcome can only separate
    states lying in different components.
    """
    comp = {i: i for i in ids}

    def find(x):
        while comp[x] != x:
            x = comp[x]
        return x
    for a in ids:
        for b in ids:
            if a < b and dot(s.by_id(a).locals[party], s.by_id(b).locals[party]):
                comp[find(a)] = find(b)
    return {frozenset(i for i in ids if find(i) == r) for r in {find(i) for i in ids}}


def test_g2_admits_no_single_outcome_protocol():
    g2 = build_g2()
    ids = list(g2.ids)
    assert _split_classes(g2, ids, 0) == {frozenset(ids)}
    assert _split_classes(g2, ids, 1) == {frozenset(ids)}
    assert _split_classes(g2, ids, 2) == {frozenset({"phi3"}), frozenset({"phi1", "phi2", "phi4"})}
    rest = ["phi1", "phi2", "phi4"]
    for party in range(3):
        assert _split_classes(g2, rest, party) == {frozenset(rest)}
