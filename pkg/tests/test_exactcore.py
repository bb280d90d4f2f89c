import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from calibkit.exactcore import (Mat, Subspace, bareiss_rank, bracket, conj_invariant, meet_join,
                                matrix_constraint_space, nullspace_of_rows, ortho_complement,
                                rank_nullspace, rref, to_scalar)

small = st.integers(-3, 3)


def matrices(max_rows=5, max_cols=6):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)))


def square(n):
    return st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n).map(Mat.of)


def subspaces(ambient=6, max_vectors=4):
    vec = st.lists(small, min_size=ambient, max_size=ambient)
    return st.lists(vec, max_size=max_vectors).map(lambda vs: Subspace.span(vs, ambient))


@given(matrices())
def test_rref_is_idempotent(rows):
    ncols = len(rows[0])
    r1, p1 = rref(rows, ncols)
    r2, p2 = rref(r1, ncols)
    assert (r1, p1) == (r2, p2)
    for i, p in enumerate(p1):
        assert r1[i][p] == 1
        assert all(r1[k][p] == 0 for k in range(len(r1)) if k != i)


@given(matrices(), st.randoms(use_true_random=False))
def test_rank_matches_bareiss_on_permuted_rows(rows, rnd):
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    assert len(rref(rows, len(rows[0]))[1]) == bareiss_rank(shuffled)


@given(matrices())
def test_nullspace_annihilated_and_rank_nullity(rows):
    ncols = len(rows[0])
    rank, null = rank_nullspace(rows)
    assert rank + null.dim == ncols
    for v in null.basis:
        assert all(sum(Fraction(a) * b for a, b in zip(row, v)) == 0 for row in rows)


def test_rref_stays_exact():
    rows, _ = rref([[Fraction(1, 3), Fraction(2, 7)], [Fraction(5, 11), Fraction(1, 13)]])
    assert all(isinstance(x, Fraction) for row in rows for x in row)


def test_float_scalars_are_refused():
    with pytest.raises(TypeError):
        to_scalar(0.5)
    assert to_scalar("3/4") == Fraction(3, 4)


@given(square(3))
def test_inverse_or_singular(a):
    if bareiss_rank([list(r) for r in a.entries]) < 3:
        with pytest.raises(ZeroDivisionError):
            a.inverse()
    else:
        assert a @ a.inverse() == Mat.identity(3)


def test_unit_and_flattening_convention():
    e = Mat.unit(3, 0, 2)
    assert e[0, 2] == 1 and e.flat()[2] == 1
    assert Mat.from_flat(e.flat(), 3) == e
    assert e.apply((0, 0, 1)) == (1, 0, 0)


@given(square(3), square(3), square(3))
def test_bracket_jacobi(x, y, z):
    total = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y))
    assert total.is_zero()


@given(subspaces(), subspaces())
def test_meet_join_dimension_identity(s, t):
    meet, join = meet_join(s, t)
    assert s.dim + t.dim == meet.dim + join.dim
    assert meet <= s and meet <= t and s <= join and t <= join


@given(subspaces(), subspaces(), subspaces())
def test_modular_law(a, b, c):
    # if a <= c then a + (b meet c) = (a + b) meet c
    a = meet_join(a, c)[0]
    bc, _ = meet_join(b, c)
    left = meet_join(a, bc)[1]
    right = meet_join(meet_join(a, b)[1], c)[0]
    assert left == right


@given(subspaces())
def test_complement_involution(s):
    comp = ortho_complement(s)
    assert comp.dim + s.dim == s.ambient
    assert ortho_complement(comp) == s
    assert all(sum(x * y for x, y in zip(u, v)) == 0 for u in s.basis for v in comp.basis)


@given(subspaces())
def test_basis_independence(s):
    shuffled = list(reversed(s.basis))
    doubled = [tuple(2 * x for x in v) for v in shuffled]
    assert Subspace.span(doubled, s.ambient) == s


def test_meet_join_ambient_mismatch():
    with pytest.raises(ValueError):
        meet_join(Subspace.full(4), Subspace.full(9))


def test_conjugation_invariance_of_symmetric_matrices():
    sym = matrix_constraint_space(3, [lambda x: x - x.T])
    assert sym.dim == 6
    g = Mat.of([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    assert conj_invariant(sym, g)
    upper = Subspace.of_matrices([Mat.unit(3, 0, 1)], 3)
    assert not conj_invariant(upper, g)


def test_nullspace_of_rows_full_when_no_rows():
    assert nullspace_of_rows([], 4).dim == 4


@given(subspaces())
def test_subspace_json_roundtrip(s):
    assert Subspace.from_json(s.to_json()) == s


@given(square(3))
def test_mat_json_roundtrip(a):
    assert Mat.from_json(a.to_json()) == a


def test_identity_solution_is_unique():
    assert rank_nullspace(Mat.identity(4)) == (4, Subspace.zero(4))


def test_random_large_rank_agrees():
    rng = random.Random(7)
    rows = [[rng.randint(-2, 2) for _ in range(20)] for _ in range(15)]
    rows += [[a + b for a, b in zip(rows[0], rows[1])]]
    assert len(rref(rows)[1]) == bareiss_rank(rows)
