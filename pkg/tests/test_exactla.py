import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nlwe.exactla import (
    RMatrix,
    bareiss_echelon,
    dot,
    inverse,
    kernel_basis,
    kron,
    kron_vec,
    primitive,
    rank,
    rank_modular,
    rank_rational,
    solution_space_dim,
)
from nlwe.nonlocality import opm_constraints
from nlwe.statesets import build_shifts_upb


def int_matrices(max_rows=8, max_cols=8, lo=-5, hi=5):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def test_rank_examples():
    assert rank(RMatrix.identity(3)) == 3
    assert rank(RMatrix.zeros(4, 4)) == 0
    assert rank(RMatrix.from_rows([[1, 1, 0], [2, 2, 0]])) == 1


def test_kernel_examples():
    assert kernel_basis(RMatrix.identity(3)) == []
    (v,) = kernel_basis(RMatrix.from_rows([[1, -1]]))
    assert v[0] == v[1] != 0


def test_solution_space_examples():
    assert solution_space_dim(RMatrix.identity(5)) == 0
    assert solution_space_dim(RMatrix.zeros(3, 7)) == 7
    assert solution_space_dim(RMatrix.from_rows([[1, 2], [2, 4]])) == 1


def test_shifts_single_party_system_has_one_dim_kernel():
    s = build_shifts_upb()
    for k in range(3):
        cs = opm_constraints(s, (k,))
        assert solution_space_dim(cs.sym) == 1
        assert solution_space_dim(cs.antisym) == 0


def test_kron_and_kron_vec_agree():
    a = RMatrix.from_rows([[1, 2], [3, 4]])
    b = RMatrix.from_rows([[0, 1], [1, 0]])
    u, v = (1, 2), (3, -1)
    assert kron(a, b).apply(kron_vec(u, v)) == kron_vec(a.apply(u), b.apply(v))
    assert kron_vec((0, 1), (1, 0, 0)) == (0, 0, 0, 1, 0, 0)


def test_primitive_and_inverse():
    assert primitive((Fraction(1, 2), Fraction(-3, 4))) == (2, -3)
    assert primitive((0, -6, 9)) == (0, -2, 3)
    m = RMatrix.from_rows([[2, 1], [7, 4]])
    assert m @ inverse(m) == RMatrix.identity(2)


def test_echelon_pivots_are_columns():
    rows, piv = bareiss_echelon(RMatrix.from_rows([[0, 2, 4], [0, 1, 2], [1, 0, 1]]))
    assert len(piv) == 2 and piv == sorted(piv)
    assert all(isinstance(x, int) for r in rows for x in r)


@settings(max_examples=150, deadline=None)
@given(int_matrices())
def test_rank_plus_nullity(rows):
    m = RMatrix.from_rows(rows)
    assert rank(m) + solution_space_dim(m) == m.cols


@settings(max_examples=150, deadline=None)
@given(int_matrices())
def test_kernel_vectors_are_annihilated(rows):
    m = RMatrix.from_rows(rows)
    basis = kernel_basis(m)
    assert len(basis) == solution_space_dim(m)
    for v in basis:
        assert not any(m.apply(v))
        assert all(Fraction(x).denominator == 1 for x in v)
    if basis:
        assert rank(RMatrix.from_rows(basis)) == len(basis)


@settings(max_examples=100, deadline=None)
@given(int_matrices(), st.randoms(use_true_random=False), st.integers(-4, 4).filter(bool))
def test_rank_invariant_under_row_ops(rows, rnd, c):
    m = RMatrix.from_rows(rows)
    perm = rows[:]
    rnd.shuffle(perm)
    scaled = [[c * x for x in r] for r in perm]
    assert rank(RMatrix.from_rows(scaled)) == rank(m)
    assert rank(m.T) == rank(m)


@settings(max_examples=100, deadline=None)
@given(int_matrices(6, 6))
def test_three_rank_methods_agree(rows):
    m = RMatrix.from_rows(rows)
    assert rank(m) == rank_rational(m) == rank_modular(m)


def test_random_oracle_equivalence_200():
    rng = random.Random(7)
    for _ in range(200):
        r, c = rng.randint(1, 20), rng.randint(1, 20)
        k = rng.randint(1, min(r, c))
        a = [[rng.randint(-3, 3) for _ in range(k)] for _ in range(r)]
        b = [[rng.randint(-3, 3) for _ in range(c)] for _ in range(k)]
        m = RMatrix.from_rows([[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(c)] for i in range(r)])
        assert rank(m, "bareiss") == rank(m, "rational") == rank(m, "modular") <= k


def test_modular_survives_unlucky_prime():
    p = 2147483647
    m = RMatrix.from_rows([[p, 0], [0, 1]])
    assert rank_modular(m, primes=(p,)) == 2


def test_rational_entries():
    m = RMatrix.from_rows([[Fraction(1, 3), Fraction(2, 3)], [Fraction(1, 2), 1]])
    assert rank(m) == 1
    (v,) = kernel_basis(m)
    assert dot(v, m.row(0)) == 0


def test_unknown_method():
    with pytest.raises(ValueError):
        rank(RMatrix.identity(2), method="svd")
