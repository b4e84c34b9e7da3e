from nlwe.activation import (
    RelabelingMap,
    apply_relabel,
    k_measurement,
    match_sets,
    r_measurement,
    theorem3_outcome,
    verify_theorem1,
    verify_theorem2,
    verify_theorem4,
)
from nlwe.hilbert import ProductState
from nlwe.measurements import apply_outcome, is_orthogonality_preserving
from nlwe.statesets import (
    StrongTemplateParams,
    build_g1,
    build_g2,
    build_g4,
    build_shifts_upb,
    build_strong_set,
    build_tiles_upb,
)


def test_match_identity():
    t = build_tiles_upb()
    res = match_sets(t, t)
    assert res.matched
    assert res.bijection == {i: i for i in t.ids}
    assert set(res.scalars.values()) == {1}


def test_tiles_vs_shifts_no_match():
    assert not match_sets(build_tiles_upb(), build_shifts_upb()).matched


def test_scalars_and_permutation():
    t = build_tiles_upb()
    flipped = t.replace([ProductState(s.id + "x", (tuple(-x for x in s.locals[0]), s.locals[1]))
                         for s in reversed(t.states)])
    res = match_sets(flipped, t)
    assert res.matched
    assert set(res.scalars.values()) == {-1}


def test_theorem1_k1_verbatim_and_k2_relabelled():
    g1 = build_g1()
    tiles = build_tiles_upb()
    k1 = apply_outcome(g1, k_measurement(1), "K1")
    assert match_sets(k1, tiles, RelabelingMap.on_party(2, 1, {0: 0, 1: 1, 2: 2}, 3)).matched
    k2 = apply_outcome(g1, k_measurement(1), "K2")
    assert match_sets(k2, tiles, RelabelingMap.on_party(2, 1, {3: 2, 4: 0, 5: 1}, 3)).matched
    rep = verify_theorem1()
    assert rep.passed and [o.n_states for o in rep.outcomes] == [5, 5]


def test_theorem2_relabel_direction():
    g2 = build_g2()
    r = r_measurement()
    assert is_orthogonality_preserving(g2, r)
    r2 = apply_outcome(g2, r, "R2")
    shifts = build_shifts_upb()
    straight = RelabelingMap.on_party(3, 2, {2: 0, 3: 1}, 2)
    swapped = RelabelingMap.on_party(3, 2, {2: 1, 3: 0}, 2)
    assert not match_sets(r2, shifts, straight).matched
    assert match_sets(r2, shifts, swapped).matched
    assert verify_theorem2().passed


def test_theorem3_all_k1_is_template():
    out = theorem3_outcome(["K1", "K1", "K1"])
    assert len(out) == 27
    assert match_sets(out, build_strong_set(StrongTemplateParams.uniform((0, 1, 2)))).matched


def test_theorem3_mixed_outcome():
    out = theorem3_outcome(["K2", "K1", "K2"])
    target = build_strong_set(StrongTemplateParams.from_outcomes(["K2", "K1", "K2"]))
    assert match_sets(out, target).matched


def test_theorem4():
    g4 = build_g4()
    k1 = apply_outcome(g4, k_measurement(2), "K1")
    for s, t in zip(g4.states, k1.states):
        assert s.locals[:2] == t.locals[:2]
        assert all(x == 0 for x in t.locals[2][3:])
    rep = verify_theorem4()
    assert rep.passed
    assert all(len(o.certificates) == 6 for o in rep.outcomes)


def test_relabel_outside_domain():
    g1 = build_g1()
    res = match_sets(g1, build_tiles_upb(), RelabelingMap.on_party(2, 1, {0: 0, 1: 1, 2: 2}, 3))
    assert not res.matched and "outside the relabeling" in res.reason


def test_apply_relabel_dims():
    s = apply_relabel(apply_outcome(build_g1(), k_measurement(1), "K2"),
                      RelabelingMap.on_party(2, 1, {3: 2, 4: 0, 5: 1}, 3))
    assert s.spec.party_dims == (3, 3)
