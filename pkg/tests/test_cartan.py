from fractions import Fraction

import pytest

from calibkit import catalog
from calibkit.cartan import (build_g2_restrainers, cartan_test, extension_rank_S,
                             g2_fiber_algebra, polar_h, polar_profile, restraining_check)
from calibkit.exactcore import Mat, Subspace, meet_join, nullspace_of_rows
from calibkit.stabilizer import is_bracket_closed, system


def linear_locus(n, equations):
    """Zero set of equations given as [(coef, row, col)] with 1-based row/col (x^row_col)."""
    rows = []
    for eq in equations:
        r = [Fraction(0)] * (n * n)
        for c, i, j in eq:
            r[(i - 1) * n + (j - 1)] += c
        rows.append(r)
    return nullspace_of_rows(rows, n * n)


def test_su3_profile(spaces, rank):
    prof = polar_profile(system("su3"), spaces("su3"))
    assert prof.h_dims == (36, 36, 35, 31, 22, 14, 8)
    assert prof.c_seq == (0, 0, 1, 5, 14, 22, 28)
    res = cartan_test(system("su3"), prof, rank("su3"))
    assert res.c_sum == 42 == res.symbol_rank and res.regular


def test_g2_profile(spaces, rank):
    prof = polar_profile(system("g2"), spaces("g2"))
    assert prof.h_dims == (49, 49, 49, 48, 44, 34, 21, 14)
    assert prof.c_seq == (0, 0, 0, 1, 5, 15, 28, 35)
    res = cartan_test(system("g2"), prof, rank("g2"))
    assert res.c_sum == 49 == res.symbol_rank and res.regular


def test_interleaved_presentation_is_not_regular(spaces, rank):
    prof = polar_profile(system("su3-star"), spaces("su3-star"))
    res = cartan_test(system("su3-star"), prof, rank("su3-star"))
    assert res.c_sum < 42
    # regression constant: deficit 4, coming from h_4
    assert (res.c_sum, res.deficit) == (38, 4)
    assert prof.h_dims == (36, 36, 35, 31, 26, 14, 8)


def test_unclaimed_profiles_are_reported(spaces, rank):
    omega = cartan_test(system("omega-only"), polar_profile(system("omega-only"), spaces("omega-only")))
    assert omega.c_sum == 20 == omega.symbol_rank
    sp = polar_profile(system("sp2sp1"), spaces("sp2sp1"))
    assert sp.h_dims == (64, 64, 64, 64, 63, 59, 49, 29, 13)
    assert sp.cartan_sum == 56 == rank("sp2sp1")


@pytest.mark.parametrize("name", ["su3", "su3-star", "g2", "omega-only"])
def test_polar_flag_structure(name, spaces, stab):
    hs = spaces(name)
    n = system(name).dim
    assert hs[n] == stab(name)
    for k in range(n):
        assert hs[k + 1] <= hs[k]
        # matrices supported in columns after k restrict to zero on R^k
        free = Subspace.of_matrices([Mat.unit(n, i, j) for i in range(n) for j in range(k, n)], n)
        assert free <= hs[k]
        assert stab(name) <= hs[k]


def test_su3_equation_lists(spaces):
    hs = spaces("su3")
    h2 = [[(1, 4, 2), (-1, 5, 1)]]
    h3 = h2 + [[(1, 5, 3), (-1, 6, 2)], [(1, 6, 1), (-1, 4, 3)],
               [(1, 1, 1), (1, 2, 2), (1, 3, 3)], [(1, 4, 1), (1, 5, 2), (1, 6, 3)]]
    # the first of the nine equations is listed as x^1_1 + x^1_1, i.e. 2 x^1_1
    h4 = h3 + [[(1, 1, 1), (1, 1, 1)], [(1, 2, 1), (1, 1, 2)], [(1, 3, 1), (1, 1, 3)],
               [(1, 1, 4), (1, 4, 1)], [(1, 2, 4), (1, 5, 1)], [(1, 3, 4), (1, 6, 1)],
               [(1, 4, 4), (-1, 1, 1)], [(1, 5, 4), (-1, 2, 1)], [(1, 6, 4), (-1, 3, 1)]]
    assert linear_locus(6, h2) == hs[2]
    assert linear_locus(6, h3) == hs[3]
    assert linear_locus(6, h4) == hs[4]


G2_H3 = [[(1, 5, 3), (-1, 6, 2), (1, 7, 1)]]
G2_H4 = G2_H3 + [[(1, 1, 1), (1, 2, 2), (1, 3, 3), (1, 4, 4)], [(1, 5, 2), (1, 6, 3), (1, 7, 4)],
                 [(1, 5, 1), (1, 6, 4), (-1, 7, 3)], [(1, 5, 4), (-1, 6, 1), (-1, 7, 2)]]
G2_H5_CLEAN = [[(1, 1, 1), (1, 2, 2), (-1, 3, 3), (-1, 4, 4)],
               [(1, 3, 1), (1, 4, 2), (1, 1, 3), (1, 2, 4)],
               [(1, 4, 1), (-1, 3, 2), (-1, 2, 3), (1, 1, 4)],
               [(1, 3, 5), (1, 6, 2), (-1, 7, 1)], [(1, 4, 5), (1, 6, 1), (1, 7, 2)], [(1, 5, 5)],
               [(2, 6, 5), (-1, 4, 1), (-1, 3, 2), (1, 2, 3), (1, 1, 4)],
               [(2, 7, 5), (1, 3, 1), (-1, 4, 2), (-1, 1, 3), (1, 2, 4)]]
G2_H5_AS_LISTED = [[(1, 1, 1), (-1, 6, 4), (1, 7, 3)], [(1, 2, 2), (-1, 6, 3), (-1, 7, 4)]]
G2_H5_REINDEXED = [[(1, 1, 5), (-1, 6, 4), (1, 7, 3)], [(1, 2, 5), (-1, 6, 3), (-1, 7, 4)]]


def test_g2_equation_lists(spaces):
    hs = spaces("g2")
    assert linear_locus(7, G2_H3) == hs[3]
    assert linear_locus(7, G2_H4) == hs[4]
    assert hs[5].dim == 34


def test_g2_h5_list_needs_two_reindexed_terms(spaces):
    hs = spaces("g2")
    # eight of the ten listed equations hold on h_5 as written
    assert hs[5] <= linear_locus(7, G2_H5_CLEAN)
    # two do not; with x^1_5 and x^2_5 in place of x^1_1 and x^2_2 the list cuts out h_5
    for eq in G2_H5_AS_LISTED:
        assert not hs[5] <= linear_locus(7, [eq])
    assert linear_locus(7, G2_H4 + G2_H5_CLEAN + G2_H5_REINDEXED) == hs[5]


def test_g2_h6_is_algebra_plus_last_column(spaces, stab):
    last_col = Subspace.of_matrices([Mat.unit(7, i, 6) for i in range(7)], 7)
    assert meet_join(stab("g2"), last_col)[1] == spaces("g2")[6]


def test_extension_ranks(spaces):
    su3 = polar_profile(system("su3"), spaces("su3"))
    ranks = [extension_rank_S(system("su3"), k, su3) for k in (3, 4, 5)]
    assert [r.r for r in ranks] == [25, 15, 6]
    assert ranks[0].dim_H == 29 and ranks[0].dim_S == 34
    g2 = polar_profile(system("g2"), spaces("g2"))
    r = [extension_rank_S(system("g2"), k, g2).r for k in (4, 5, 6)]
    assert r == [32, 21, 7]
    assert r == [42 - 10, 42 - 21, 42 - 35]
    with pytest.raises(ValueError):
        extension_rank_S(system("g2"), 7, g2)


@pytest.mark.parametrize("key,k", [("W5", 3), ("W14", 4), ("W22", 5)])
def test_su3_restraining_spaces(key, k, spaces):
    R6 = catalog.reflection(6, 3)
    v = restraining_check(catalog.get_space(key), system("su3"), k, sym=(R6,), h=spaces("su3")[k])
    assert v.transverse and v.complementary and all(v.conj_invariant) and v.ok
    assert v.w_dim + v.h_dim == 36


def test_restraining_check_detects_overlap(spaces):
    h3 = spaces("su3")[3]
    v = restraining_check(h3, system("su3"), 3, h=h3)
    assert not v.transverse and not v.ok


def test_g2_restrainers(spaces):
    ws = build_g2_restrainers(system("g2"), list(spaces("g2")[:7]))
    assert [w.dim for w in ws] == [5, 15, 28]
    assert ws[0] <= ws[1] <= ws[2]
    su2 = g2_fiber_algebra()
    assert su2.dim == 3 and is_bracket_closed(su2)
    R7 = catalog.reflection(7, 4)
    for k, W in zip((4, 5, 6), ws):
        v = restraining_check(W, system("g2"), k, sym=(R7,), sym_algebra=su2.matrices(), h=spaces("g2")[k])
        assert v.ok


def test_g2_restrainers_reject_wrong_system():
    with pytest.raises(ValueError):
        build_g2_restrainers(system("su3"))


def test_polar_h_range():
    with pytest.raises(ValueError):
        polar_h(system("su3"), 7)
