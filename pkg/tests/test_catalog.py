from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from calibkit import catalog
from calibkit.catalog import CatalogKey, UnknownKey
from calibkit.exactcore import Mat
from calibkit.exterior import AltForm, evaluate, hodge, pullback, wedge, wedge_all


def dx(*idx, n=7):
    return AltForm.dx(n, *idx)


def test_phi0_matches_factored_expression():
    sd = [dx(1, 2) + dx(3, 4), dx(1, 3) + dx(4, 2), dx(1, 4) + dx(2, 3)]
    expected = dx(5, 6, 7)
    for k, w in zip((5, 6, 7), sd):
        expected = expected - wedge(dx(k), w)
    assert catalog.phi0() == expected


def test_star_phi0_matches_factored_expression_and_hodge():
    sd = [dx(1, 2) + dx(3, 4), dx(1, 3) + dx(4, 2), dx(1, 4) + dx(2, 3)]
    expected = dx(1, 2, 3, 4)
    for pair, w in zip(((6, 7), (7, 5), (5, 6)), sd):
        expected = expected - wedge(dx(*pair), w)
    assert catalog.star_phi0() == expected
    assert hodge(catalog.phi0()) == expected


def test_phi0_wedge_star_is_seven_volume():
    assert wedge(catalog.phi0(), catalog.star_phi0()) == AltForm.volume(7).scale(7)


@given(st.lists(st.lists(st.integers(-3, 3), min_size=6, max_size=6), min_size=3, max_size=3))
def test_upsilon0_agrees_with_complex_determinant(vs):
    # Upsilon_0(v1, v2, v3) = det[z_j(v_k)] with z_j = x_j + i x_(3+j)
    z = np.array([[v[j] + 1j * v[3 + j] for v in vs] for j in range(3)])
    val = np.linalg.det(z)
    re, im = catalog.upsilon0(3)
    assert float(evaluate(re, vs)) == pytest.approx(val.real, abs=1e-9)
    assert float(evaluate(im, vs)) == pytest.approx(val.imag, abs=1e-9)


def test_upsilon0_explicit_terms():
    re, im = catalog.upsilon0(3)
    n6 = dict(n=6)
    assert re == dx(1, 2, 3, **n6) - dx(1, 5, 6, **n6) + dx(2, 4, 6, **n6) - dx(3, 4, 5, **n6)
    assert im == dx(1, 2, 6, **n6) + dx(2, 3, 4, **n6) - dx(1, 3, 5, **n6) - dx(4, 5, 6, **n6)
    # the variant listing dx^246 in the imaginary part is not the product expansion
    assert im != dx(2, 4, 6, **n6) + dx(2, 3, 4, **n6) - dx(1, 3, 5, **n6) - dx(4, 5, 6, **n6)


def test_omega0_and_volume_normalization():
    w = catalog.omega0(3)
    assert w == AltForm.from_terms(6, 2, [((1, 4), 1), ((2, 5), 1), ((3, 6), 1)])
    assert catalog.wirtinger(3, 3) == wedge_all([w, w, w]).scale(Fraction(1, 6))
    assert catalog.wirtinger(3, 1) == w
    # omega^3/3! = (1/4) Re Upsilon ∧ Im Upsilon
    re, im = catalog.upsilon0(3)
    assert wedge(re, im) == catalog.wirtinger(3, 3).scale(4)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_split_and_interleaved_presentations_agree(m):
    assert catalog.presentations_agree(m)


def test_complex_structures():
    for m in (2, 3):
        for J in (catalog.J(m), catalog.Jstar(m)):
            assert J @ J == Mat.identity(2 * m).scale(-1)
            assert (J + J.T).is_zero()
    P = catalog.interleave_permutation(3)
    assert P @ catalog.Jstar(3) @ P.T == catalog.J(3)
    found = catalog.find_conjugating_permutation(catalog.J(3), catalog.Jstar(3))
    assert found is not None and found @ catalog.Jstar(3) @ found.T == catalog.J(3)


def test_reflections_are_involutions():
    for R in (catalog.get_matrix("R6"), catalog.get_matrix("R7")):
        assert R @ R == Mat.identity(R.rows)


def test_quaternion_right_multiplication():
    R = {q: np.array(catalog._right_mult_matrix(q)) for q in "ijk"}
    for q in "ijk":
        assert (R[q] @ R[q] == -np.eye(4)).all()
        assert (R[q] + R[q].T == 0).all()
    # v i j = v k, so right multiplication composes in reverse order
    assert (R["j"] @ R["i"] == R["k"]).all()


def test_kraines_form_is_nonzero():
    k = catalog.kraines()
    assert k.degree == 4 and not k.is_zero()
    wi, wj, wk = catalog.kraines_components()
    assert all(not wedge(w, w).is_zero() for w in (wi, wj, wk))


def test_self_dual_calibration_forms():
    assert catalog.omega_cal(2) == dx(1, 2) + dx(3, 4)
    assert catalog.omega_cal(4, 4) == AltForm.from_terms(4, 2, [((1, 4), 1), ((2, 3), 1)])
    with pytest.raises(ValueError):
        catalog.omega_cal(5)


def test_restraining_space_dimensions_and_nesting():
    w5, w14, w22 = (catalog.get_space(k) for k in ("W5", "W14", "W22"))
    assert (w5.dim, w14.dim, w22.dim) == (5, 14, 22)
    assert w5 <= w14 <= w22


def test_su3_block_matches_constraint_description(stab):
    su = catalog.get_space("su(3)")
    assert su.dim == 8
    assert su == stab("su3")
    assert catalog.get_space("su_star(3)") == stab("su3-star")


def test_key_parsing_and_errors():
    assert CatalogKey.parse("omega0(3)") == CatalogKey("omega0", (3,))
    assert str(CatalogKey.parse(" wirtinger(3, 2) ")) == "wirtinger(3,2)"
    assert catalog.lookup("phi0") == catalog.phi0()
    assert catalog.lookup("R7") == catalog.reflection(7, 4)
    with pytest.raises(UnknownKey):
        catalog.lookup("bogus")
    with pytest.raises(ValueError):
        catalog.get_form("omega0(x)")
    with pytest.raises(ValueError):
        catalog.get_form("omega0")


def test_involutions_on_forms():
    R6 = catalog.get_matrix("R6")
    re, im = catalog.upsilon0(3)
    assert pullback(R6, catalog.omega0(3)) == -catalog.omega0(3)
    assert pullback(R6, re) == re and pullback(R6, im) == -im
    minus = Mat.diag([-1] * 7)
    assert pullback(minus, catalog.phi0()) == -catalog.phi0()
    assert pullback(minus, catalog.star_phi0()) == catalog.star_phi0()
