"""Named constant forms, matrices and matrix subspaces.

Keys look like ``omega0(3)``, ``phi0``, ``wirtinger(3,2)``.  Complex forms come
back as a ``(real, imaginary)`` pair of :class:`AltForm`.

Coordinates on C^m: ``z_j = x_j + i x_{m+j}`` for the split presentation and
``z_j = x_{2j-1} + i x_{2j}`` for the interleaved one.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import factorial

from .exactcore import Mat, Subspace, bracket, matrix_constraint_space
from .exterior import AltForm, pullback, wedge


class UnknownKey(KeyError):
    pass


@dataclass(frozen=True)
class CatalogKey:
    name: str
    params: tuple[int, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "CatalogKey":
        m = re.fullmatch(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\(([^)]*)\))?\s*", text)
        if not m:
            raise UnknownKey(text)
        params = ()
        if m.group(2) is not None and m.group(2).strip():
            try:
                params = tuple(int(p) for p in m.group(2).split(","))
            except ValueError as exc:
                raise ValueError(f"non-integer parameter in {text!r}") from exc
        return cls(m.group(1), params)

    def __str__(self) -> str:
        return self.name + (f"({','.join(map(str, self.params))})" if self.params else "")


def _key(key) -> CatalogKey:
    return key if isinstance(key, CatalogKey) else CatalogKey.parse(key)


def _positive(params, count, key):
    if len(params) != count or any(p < 1 for p in params):
        raise ValueError(f"{key}: expected {count} positive integer parameter(s)")
    return params


# -- forms ---------------------------------------------------------------

def complex_wedge(a: tuple[AltForm, AltForm], b: tuple[AltForm, AltForm]) -> tuple[AltForm, AltForm]:
    ar, ai = a
    br, bi = b
    return wedge(ar, br) - wedge(ai, bi), wedge(ar, bi) + wedge(ai, br)


def _holomorphic_volume(n: int, pairs: list[tuple[int, int]]) -> tuple[AltForm, AltForm]:
    out = (AltForm.dx(n, pairs[0][0]), AltForm.dx(n, pairs[0][1]))
    for re_i, im_i in pairs[1:]:
        out = complex_wedge(out, (AltForm.dx(n, re_i), AltForm.dx(n, im_i)))
    return out


def _split_pairs(m):
    return [(i, m + i) for i in range(1, m + 1)]


def _interleaved_pairs(m):
    return [(2 * i - 1, 2 * i) for i in range(1, m + 1)]


def omega0(m: int) -> AltForm:
    n = 2 * m
    return sum((AltForm.dx(n, a, b) for a, b in _split_pairs(m)), AltForm.zero(n, 2))


def upsilon0(m: int) -> tuple[AltForm, AltForm]:
    return _holomorphic_volume(2 * m, _split_pairs(m))


def omega_star(m: int) -> AltForm:
    n = 2 * m
    return sum((AltForm.dx(n, a, b) for a, b in _interleaved_pairs(m)), AltForm.zero(n, 2))


def upsilon_star(m: int) -> tuple[AltForm, AltForm]:
    return _holomorphic_volume(2 * m, _interleaved_pairs(m))


def phi0() -> AltForm:
    return AltForm.from_terms(7, 3, [
        ((5, 6, 7), 1),
        ((5, 1, 2), -1), ((5, 3, 4), -1),
        ((6, 1, 3), -1), ((6, 4, 2), -1),
        ((7, 1, 4), -1), ((7, 2, 3), -1),
    ])


def star_phi0() -> AltForm:
    return AltForm.from_terms(7, 4, [
        ((1, 2, 3, 4), 1),
        ((6, 7, 1, 2), -1), ((6, 7, 3, 4), -1),
        ((7, 5, 1, 3), -1), ((7, 5, 4, 2), -1),
        ((5, 6, 1, 4), -1), ((5, 6, 2, 3), -1),
    ])


_SD_PAIRS = {
    2: [((1, 2), 1), ((3, 4), 1)],
    3: [((1, 3), 1), ((4, 2), 1)],
    4: [((1, 4), 1), ((2, 3), 1)],
}


def omega_cal(i: int, dim: int = 7) -> AltForm:
    """The self-dual 2-forms Ω_2, Ω_3, Ω_4 on E_0 = span(e_1..e_4)."""
    if i not in _SD_PAIRS:
        raise ValueError(f"omega_cal index must be 2, 3 or 4, got {i}")
    if dim < 4:
        raise ValueError("omega_cal needs dimension at least 4")
    return AltForm.from_terms(dim, 2, _SD_PAIRS[i])


def wirtinger(m: int, p: int) -> AltForm:
    if not 0 <= p <= m:
        raise ValueError(f"wirtinger power {p} outside [0, {m}]")
    w = omega0(m)
    out = AltForm.constant(2 * m)
    for _ in range(p):
        out = wedge(out, w)
    return out.scale(Fraction(1, factorial(p)))


def _right_mult_matrix(q: str) -> list[list[int]]:
    """Matrix of v -> v*q on H = R^4 with basis (1, i, j, k)."""
    table = {  # products of basis units: (unit, q) -> (sign, unit)
        ("1", "i"): (1, "i"), ("i", "i"): (-1, "1"), ("j", "i"): (-1, "k"), ("k", "i"): (1, "j"),
        ("1", "j"): (1, "j"), ("i", "j"): (1, "k"), ("j", "j"): (-1, "1"), ("k", "j"): (-1, "i"),
        ("1", "k"): (1, "k"), ("i", "k"): (-1, "j"), ("j", "k"): (1, "i"), ("k", "k"): (-1, "1"),
    }
    units = "1ijk"
    m = [[0] * 4 for _ in range(4)]
    for col, u in enumerate(units):
        sign, w = table[(u, q)]
        m[units.index(w)][col] = sign
    return m


def kraines_components() -> tuple[AltForm, AltForm, AltForm]:
    """ω_I, ω_J, ω_K on H^2 = R^8, with ω_q(u, v) = <u, v q>."""
    out = []
    for q in "ijk":
        r = _right_mult_matrix(q)
        full = [[0] * 8 for _ in range(8)]
        for blk in (0, 4):
            for a in range(4):
                for b in range(4):
                    full[blk + a][blk + b] = r[a][b]
        # ω(e_a, e_b) = <e_a, R e_b> = R[a][b]
        terms = [((a + 1, b + 1), full[a][b]) for a in range(8) for b in range(a + 1, 8)]
        out.append(AltForm.from_terms(8, 2, terms))
    return tuple(out)


def kraines() -> AltForm:
    wi, wj, wk = kraines_components()
    return wedge(wi, wi) + wedge(wj, wj) + wedge(wk, wk)


def get_form(key):
    key = _key(key)
    name, params = key.name, key.params
    if name in ("omega0", "upsilon0", "omega_star", "upsilon_star"):
        (m,) = _positive(params, 1, key)
        return {"omega0": omega0, "upsilon0": upsilon0,
                "omega_star": omega_star, "upsilon_star": upsilon_star}[name](m)
    if name in ("re_upsilon0", "im_upsilon0"):
        (m,) = _positive(params, 1, key)
        return upsilon0(m)[0 if name.startswith("re") else 1]
    if name in ("re_upsilon_star", "im_upsilon_star"):
        (m,) = _positive(params, 1, key)
        return upsilon_star(m)[0 if name.startswith("re") else 1]
    if name == "phi0":
        _positive(params, 0, key)
        return phi0()
    if name == "star_phi0":
        _positive(params, 0, key)
        return star_phi0()
    if name == "omega_cal":
        if len(params) == 1:
            return omega_cal(params[0])
        if len(params) == 2:
            return omega_cal(params[0], params[1])
        raise ValueError(f"{key}: expected omega_cal(i) or omega_cal(i,dim)")
    if name == "wirtinger":
        if len(params) != 2 or params[0] < 1 or params[1] < 0:
            raise ValueError(f"{key}: expected wirtinger(m,p)")
        return wirtinger(*params)
    if name == "kraines":
        _positive(params, 0, key)
        return kraines()
    raise UnknownKey(str(key))


# -- matrices ------------------------------------------------------------

def J(m: int) -> Mat:
    n = 2 * m
    grid = [[0] * n for _ in range(n)]
    for i in range(m):
        grid[i][m + i] = 1
        grid[m + i][i] = -1
    return Mat.of(grid)


def Jstar(m: int) -> Mat:
    return Mat.block_diag(*([J(1)] * m))


def reflection(n: int, fixed: int) -> Mat:
    """diag(I_fixed, -I_(n-fixed))."""
    return Mat.diag([1] * fixed + [-1] * (n - fixed))


def interleave_permutation(m: int) -> Mat:
    """Permutation P with P e_(2i-1) = e_i and P e_(2i) = e_(m+i) (1-based)."""
    n = 2 * m
    grid = [[0] * n for _ in range(n)]
    for i in range(m):
        grid[i][2 * i] = 1
        grid[m + i][2 * i + 1] = 1
    return Mat.of(grid)


def find_conjugating_permutation(a: Mat, b: Mat) -> Mat | None:
    """Search for a permutation matrix P with P b P^T = a."""
    n = a.rows
    for perm in permutations(range(n)):
        grid = [[0] * n for _ in range(n)]
        for j, i in enumerate(perm):
            grid[i][j] = 1
        P = Mat.of(grid)
        if P @ b @ P.T == a:
            return P
    return None


def get_matrix(key) -> Mat:
    key = _key(key)
    name, params = key.name, key.params
    if name == "J":
        return J(*_positive(params, 1, key))
    if name == "Jstar":
        return Jstar(*_positive(params, 1, key))
    if name == "R6":
        _positive(params, 0, key)
        return reflection(6, 3)
    if name == "R7":
        _positive(params, 0, key)
        return reflection(7, 4)
    if name == "P":
        return interleave_permutation(*_positive(params, 1, key))
    raise UnknownKey(str(key))


# -- subspaces -----------------------------------------------------------

def _param_space(n: int, rows: list[list[dict[int, int]]], nparams: int) -> Subspace:
    """Span of the coefficient matrices of x_1..x_k in a parameterized matrix."""
    mats = []
    for p in range(1, nparams + 1):
        mats.append(Mat.of([[cell.get(p, 0) for cell in row] for row in rows]))
    space = Subspace.of_matrices(mats, n)
    if space.dim != nparams:
        raise AssertionError(f"parameter matrices are dependent: dim {space.dim} != {nparams}")
    return space


def _cells(table: str) -> list[list[dict[int, int]]]:
    """Parse rows like 'x5 | 0 | -x2+x7' into coefficient dicts."""
    out = []
    for line in table.strip().splitlines():
        row = []
        for cell in line.split("|"):
            d: dict[int, int] = {}
            for sign, var in re.findall(r"([+-]?)\s*x(\d+)", cell.replace(" ", "")):
                d[int(var)] = d.get(int(var), 0) + (-1 if sign == "-" else 1)
            row.append(d)
        out.append(row)
    return out


W5_LAYOUT = """
x5  | 0   | 0   | 0 | 0 | 0
0   | x5  | 0   | 0 | 0 | 0
0   | 0   | x5  | 0 | 0 | 0
x4  | x3  | -x2 | 0 | 0 | 0
-x3 | x4  | x1  | 0 | 0 | 0
x2  | -x1 | x4  | 0 | 0 | 0
"""

W14_LAYOUT = """
x5+x10  | x11    | x12    | x8      | 0 | 0
-x14    | x5+x9  | 0      | x6      | 0 | 0
-x13    | 0      | x5+x9  | x7      | 0 | 0
x4      | x3     | -x2    | x9+x10  | 0 | 0
-x3+x6  | x4-x8  | x1     | x11+x14 | 0 | 0
x2+x7   | -x1    | x4-x8  | x12+x13 | 0 | 0
"""

W22_LAYOUT = """
x5+x10      | x11         | x12         | x8          | x15     | 0
-x14+x16    | x5+x9+x17   | x18         | x6-x15      | x19     | 0
-x13        | -x21        | x5+x9+x22   | x7          | x20     | 0
x4-x19      | x3          | -x2         | x9+x10+x22  | x16     | 0
-x3+x6      | x4-x8       | x1          | x11+x14     | x17+x22 | 0
x2+x7       | -x1+x20     | x4-x8-x19   | x12+x13     | x18+x21 | 0
"""


def su_block(m: int) -> Subspace:
    """Matrices [[a, b], [-b, a]] with a skew and b traceless symmetric."""
    n = 2 * m
    mats = []
    for i in range(m):
        for j in range(i + 1, m):
            g = [[0] * n for _ in range(n)]
            g[i][j] = g[m + i][m + j] = 1
            g[j][i] = g[m + j][m + i] = -1
            mats.append(Mat.of(g))
    for i in range(m):
        for j in range(i, m):
            if i == j and i == m - 1:
                continue
            g = [[0] * n for _ in range(n)]

            def put(a, b, v):
                g[a][m + b] += v
                g[m + a][b] -= v
            if i == j:
                put(i, i, 1)
                put(m - 1, m - 1, -1)
            else:
                put(i, j, 1)
                put(j, i, 1)
            mats.append(Mat.of(g))
    return Subspace.of_matrices(mats, n)


def su_from_complex_structure(cs: Mat) -> Subspace:
    """{x skew : x cs = cs x, tr(cs x) = 0}."""
    n = cs.rows
    return matrix_constraint_space(n, [
        lambda x: x + x.T,
        lambda x: bracket(x, cs),
        lambda x: (cs @ x).trace(),
    ])


def get_space(key) -> Subspace:
    key = _key(key)
    name, params = key.name, key.params
    if name in ("W5", "W14", "W22"):
        _positive(params, 0, key)
        layout, k = {"W5": (W5_LAYOUT, 5), "W14": (W14_LAYOUT, 14), "W22": (W22_LAYOUT, 22)}[name]
        return _param_space(6, _cells(layout), k)
    if name == "su":
        return su_block(*_positive(params, 1, key))
    if name == "su_star":
        (m,) = _positive(params, 1, key)
        return su_from_complex_structure(Jstar(m))
    raise UnknownKey(str(key))


FORM_KEYS = ("omega0(m)", "upsilon0(m)", "re_upsilon0(m)", "im_upsilon0(m)", "omega_star(m)",
             "upsilon_star(m)", "re_upsilon_star(m)", "im_upsilon_star(m)", "phi0", "star_phi0",
             "omega_cal(i)", "wirtinger(m,p)", "kraines")
MATRIX_KEYS = ("J(m)", "Jstar(m)", "R6", "R7", "P(m)")
SPACE_KEYS = ("W5", "W14", "W22", "su(m)", "su_star(m)")


def lookup(key):
    """Resolve a key against forms, then matrices, then subspaces."""
    for getter in (get_form, get_matrix, get_space):
        try:
            return getter(key)
        except UnknownKey:
            continue
    raise UnknownKey(str(key))


def presentations_agree(m: int) -> bool:
    """P* of the split SU(m) forms equals the interleaved forms."""
    P = interleave_permutation(m)
    re0, im0 = upsilon0(m)
    res, ims = upsilon_star(m)
    return (pullback(P, omega0(m)) == omega_star(m)
            and pullback(P, re0) == res and pullback(P, im0) == ims)
