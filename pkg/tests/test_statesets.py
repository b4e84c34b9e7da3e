import pytest
from hypothesis import given, settings, strategies as st

from nlwe.hilbert import ProductState, StructuralError, inner_product, ket
from nlwe.statesets import (
    StrongTemplateParams,
    build_g1,
    build_g2,
    build_g3,
    build_g4,
    build_named,
    build_shifts_upb,
    build_strong_set,
    build_tiles_upb,
    check_orthogonality,
)


@pytest.mark.parametrize("name,n,dims", [
    ("g1", 5, (3, 6)),
    ("g2", 4, (2, 2, 4)),
    ("g3", 27, (6, 6, 6)),
    ("g4", 27, (3, 3, 6)),
    ("tiles", 5, (3, 3)),
    ("shifts", 4, (2, 2, 2)),
])
def test_builtin_sets_are_orthogonal(name, n, dims):
    s = build_named(name)
    assert len(s) == n
    assert s.spec.party_dims == dims
    assert check_orthogonality(s) == []


def test_g1_details():
    g1 = build_g1()
    assert g1.spec.factorizations == (None, (2, 3))
    psi3 = g1.by_id("psi3")
    assert psi3.locals == (ket(3, "1-2"), ket(6, "0-4"))


def test_g2_details():
    g2 = build_g2()
    assert g2.by_id("phi4").locals == ((1, 1), (1, 1), (1, 1, 1, 1))
    assert g2.by_id("phi1").locals[0] == (1, 0) and g2.by_id("phi3").locals[0] == (0, 1)


def test_g3_details():
    g3 = build_g3()
    assert g3.by_id("xi5").locals == (ket(6, "0-4"),) * 3
    pm = [i for i in g3.ids if i.endswith(("+", "-"))]
    assert len(pm) == 24 and len(g3) - len(pm) == 3


def test_g4_details():
    assert build_g4().by_id("zeta10").locals == (ket(3, "1"), ket(3, "1"), ket(6, "1-5"))


def test_tiles_and_shifts_lists():
    tiles = {tuple(s.locals) for s in build_tiles_upb()}
    assert (ket(3, "0"), ket(3, "0-1")) in tiles
    assert (ket(3, "0+1+2"), ket(3, "0+1+2")) in tiles
    shifts = {tuple(s.locals) for s in build_shifts_upb()}
    assert (ket(2, "0"), ket(2, "0-1"), ket(2, "1")) in shifts


def test_duplicate_ids_rejected():
    g1 = build_g1()
    with pytest.raises(StructuralError):
        g1.replace(list(g1.states) + [g1.states[0]])


def test_check_orthogonality_reports_pair():
    g1 = build_g1()
    bad = ProductState("psi1", (ket(3, "0"), ket(6, "0+1+2+3+4+5")))
    s = g1.replace([bad] + list(g1.states[1:]))
    assert ("psi1", "psi5") in [(a, b) for a, b, _ in check_orthogonality(s)]


def test_strong_uniform_support():
    s = build_strong_set(StrongTemplateParams.uniform((0, 1, 2)))
    assert len(s) == 27
    for st_ in s:
        for v in st_.locals:
            assert all(x == 0 for i, x in enumerate(v) if i not in (0, 1, 2))


def test_strong_params_validation():
    with pytest.raises((StructuralError, ValueError)):
        StrongTemplateParams(((0, 0, 2),) * 3)
    with pytest.raises(KeyError):
        build_named("strong:0,1")
    with pytest.raises(KeyError):
        build_named("nonsense")


triples = st.tuples(st.sampled_from([0, 4]), st.sampled_from([1, 5]), st.sampled_from([2, 3]))


@settings(max_examples=30, deadline=None)
@given(triples, triples, triples)
def test_strong_template_always_orthogonal(p, q, r):
    s = build_strong_set(StrongTemplateParams((p, q, r)))
    assert len(s) == 27
    assert check_orthogonality(s) == []


def test_outcome_params():
    assert StrongTemplateParams.from_outcomes(["K1"] * 3).triples == ((0, 1, 2),) * 3
    assert StrongTemplateParams.from_outcomes(["K2", "K1", "K2"]).triples == ((4, 5, 3), (0, 1, 2), (4, 5, 3))


def test_pairwise_inner_products_symmetric():
    g4 = build_g4()
    a, b = g4.states[3], g4.states[7]
    assert inner_product(a, b) == inner_product(b, a) == 0
