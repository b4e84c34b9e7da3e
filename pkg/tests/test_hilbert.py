from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nlwe.exactla import RMatrix, dot, rank
from nlwe.hilbert import (
    DensityMatrix,
    FactorIndexMap,
    PartySpec,
    ProductState,
    StructuralError,
    densities_orthogonal,
    full_vector,
    inner_product,
    ket,
    outer_density,
    partial_trace,
    reduced_density,
)
from nlwe.statesets import build_g1, build_g3


def test_full_vector_examples():
    assert full_vector(ProductState("s", (ket(2, "0"), ket(2, "0")))) == (1, 0, 0, 0)
    assert full_vector(ProductState("s", (ket(2, "0-1"), ket(2, "1")))) == (0, 1, 0, -1)
    psi3 = build_g1().by_id("psi3")
    v = full_vector(psi3)
    assert sorted(abs(x) for x in v if x) == [1, 1, 1, 1]


def test_inner_product_examples():
    g1 = build_g1()
    assert inner_product(g1.by_id("psi1"), g1.by_id("psi5")) == 0
    assert inner_product(g1.by_id("psi5"), g1.by_id("psi5")) == 18
    g3 = build_g3()
    assert inner_product(g3.by_id("xi1+"), g3.by_id("xi1-")) == 0


def test_ket_parser():
    assert ket(3, "0+1+2") == (1, 1, 1)
    assert ket(6, "0-4") == (1, 0, 0, 0, -1, 0)
    with pytest.raises(ValueError):
        ket(2, "2")


def test_party_spec_labels_and_errors():
    spec = PartySpec((3, 6), (None, (2, 3)))
    assert spec.all_factor_labels() == ("a", "b1", "b2")
    assert spec.locate("b2") == (1, 1)
    with pytest.raises(StructuralError):
        PartySpec((3, 6), (None, (2, 2)))
    with pytest.raises(StructuralError):
        spec.locate("c1")


def test_factor_index_map_big_endian():
    f = FactorIndexMap((2, 3))
    assert f.to_multi(4) == (1, 1)
    assert f.to_index((1, 2)) == 5
    assert all(f.to_index(f.to_multi(i)) == i for i in range(6))


def test_zero_local_rejected():
    with pytest.raises(StructuralError):
        ProductState("z", ((0, 0), (1, 0)))


def test_reduced_keep_everything_is_outer_product():
    g1 = build_g1()
    s = g1.by_id("psi3")
    r = reduced_density(s, g1.spec, g1.spec.all_factor_labels())
    v = full_vector(s)
    assert r.entries == RMatrix.outer(v, v)
    assert rank(r.entries) == 1


def test_case_two_reduction():
    g3 = build_g3()
    keep = ["a1", "a2", "b1", "b2", "c1"]
    plus = reduced_density(g3.by_id("xi1+"), g3.spec, keep)
    minus = reduced_density(g3.by_id("xi1-"), g3.spec, keep)
    assert not densities_orthogonal(plus, minus)
    c1 = reduced_density(g3.by_id("xi1+"), g3.spec, ["c1"]).entries
    # 1/2 |alpha><alpha| + 1/4 I with alpha the normalised |0>+|1>
    target = RMatrix.from_rows([[Fraction(1, 2), Fraction(1, 4)], [Fraction(1, 4), Fraction(1, 2)]])
    assert c1.scale(1 / (c1.trace() / target.trace())) == target


def test_trace_preservation_on_g3():
    g3 = build_g3()
    for s in g3.states[:6]:
        for keep in (["a1"], ["b2", "c1"], ["a1", "a2", "c2"]):
            assert reduced_density(s, g3.spec, keep).trace() == s.norm2()


def test_reduced_bad_labels():
    g1 = build_g1()
    with pytest.raises(StructuralError):
        reduced_density(g1.states[0], g1.spec, [])
    with pytest.raises(StructuralError):
        reduced_density(g1.states[0], g1.spec, ["z9"])


def test_densities_orthogonal_examples():
    e0 = DensityMatrix(2, RMatrix.outer((1, 0), (1, 0)))
    e1 = DensityMatrix(2, RMatrix.outer((0, 1), (0, 1)))
    zero = DensityMatrix(2, RMatrix.zeros(2, 2))
    assert densities_orthogonal(e0, e1)
    assert densities_orthogonal(e0, zero)
    assert not densities_orthogonal(e0, e0)


vec = st.lists(st.integers(-3, 3), min_size=2, max_size=3).filter(any)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(vec, vec), min_size=2, max_size=2))
def test_inner_product_matches_full_vectors(pair):
    (a1, a2), (b1, b2) = pair
    if len(a1) != len(b1) or len(a2) != len(b2):
        return
    s, t = ProductState("s", (tuple(a1), tuple(a2))), ProductState("t", (tuple(b1), tuple(b2)))
    assert inner_product(s, t) == dot(full_vector(s), full_vector(t))


@settings(max_examples=100, deadline=None)
@given(vec, vec, vec)
def test_partial_trace_commutes_with_reduction(a, b, c):
    s = ProductState("s", (tuple(a), tuple(b), tuple(c)))
    spec = PartySpec((len(a), len(b), len(c)))
    rho = outer_density(s)
    dims = (len(a), len(b), len(c))
    assert partial_trace(rho, dims, [1]).entries == reduced_density(s, spec, ["a", "c"]).entries
    assert partial_trace(rho, dims, [0, 2]).entries == reduced_density(s, spec, ["b"]).entries
    assert partial_trace(rho, dims, [0]).trace() == rho.trace() == s.norm2()
