"""Self-dual triples on R^4, the product G2 form on R^4 + R^3, and torus metrics.

A 2-form on R^4 is held as an antisymmetric 4x4 array ``S`` with
``S[a, b] = Omega(e_a, e_b)``; entries may be floats or ``Fraction`` objects.
A coframe is a 4x4 array ``C`` whose row ``a`` is the covector ``alpha^a``.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

import gmpy2
import numpy as np

from .exactcore import Mat
from .exterior import AltForm, wedge

# Omega_1 = a^01 + a^23, Omega_2 = a^02 + a^31, Omega_3 = a^03 + a^12
_STANDARD_PAIRS = (((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2)))


class DegenerateTriple(ValueError):
    pass


def _is_exact(x) -> bool:
    # numbers.Rational covers int, Fraction and numpy integer scalars
    return isinstance(x, numbers.Rational) and not isinstance(x, (bool, np.bool_))


def _as_array(S) -> np.ndarray:
    S = np.asarray(S, dtype=object)
    if S.shape != (4, 4):
        raise ValueError("a 2-form on R^4 is a 4x4 antisymmetric array")
    exact = all(_is_exact(x) for x in S.flat)
    if exact:
        S = np.vectorize(Fraction, otypes=[object])(S)
        if (S != -S.T).any():
            raise ValueError("2-form matrix is not antisymmetric")
        return S
    S = S.astype(float)
    if np.abs(S + S.T).max() > 1e-9 * max(1.0, np.abs(S).max()):
        raise ValueError("2-form matrix is not antisymmetric")
    return 0.5 * (S - S.T)


def standard_form(i: int, coframe=None) -> np.ndarray:
    """Matrix of Omega_i (i = 1, 2, 3) built from a coframe (identity by default)."""
    C = np.eye(4, dtype=int).astype(object) if coframe is None else np.asarray(coframe)
    (a, b), (c, d) = _STANDARD_PAIRS[i - 1]
    return (np.outer(C[a], C[b]) - np.outer(C[b], C[a])
            + np.outer(C[c], C[d]) - np.outer(C[d], C[c]))


def wedge_coefficient(S, T):
    """Coefficient of dx^1234 in S ∧ T."""
    return (S[0, 1] * T[2, 3] - S[0, 2] * T[1, 3] + S[0, 3] * T[1, 2]
            + S[1, 2] * T[0, 3] - S[1, 3] * T[0, 2] + S[2, 3] * T[0, 1])


def matrix_to_form(S) -> AltForm:
    return AltForm(4, 2, {(a + 1, b + 1): Fraction(S[a, b]) for a, b in combinations(range(4), 2)})


def form_to_matrix(f: AltForm) -> np.ndarray:
    if f.dim != 4 or f.degree != 2:
        raise ValueError("expected a 2-form on R^4")
    S = np.full((4, 4), Fraction(0), dtype=object)
    for (a, b), c in f.terms.items():
        S[a - 1, b - 1], S[b - 1, a - 1] = c, -c
    return S


@dataclass(frozen=True, eq=False)
class SDTriple:
    """Three 2-forms on R^4 and the volume form phi * dx^1234 they are paired against."""
    omegas: tuple
    phi: object = 1

    def __post_init__(self):
        if len(self.omegas) != 3:
            raise ValueError("a triple has exactly three 2-forms")
        object.__setattr__(self, "omegas", tuple(_as_array(S) for S in self.omegas))
        if not self.phi:
            raise ValueError("reference volume form vanishes")

    @property
    def exact(self) -> bool:
        return all(S.dtype == object for S in self.omegas) and _is_exact(self.phi)

    @classmethod
    def standard(cls) -> "SDTriple":
        return cls(tuple(standard_form(i) for i in (1, 2, 3)), 1)

    @classmethod
    def from_forms(cls, forms, volume: AltForm | None = None) -> "SDTriple":
        phi = 1 if volume is None else volume.coefficient((1, 2, 3, 4))
        return cls(tuple(form_to_matrix(f) for f in forms), phi)

    def pulled_back(self, A) -> "SDTriple":
        """A* of each form, paired against det(A) times the old volume form."""
        A = np.asarray(A)
        dt = object if self.exact and A.dtype == object else float
        omegas = tuple(A.T.astype(dt) @ S.astype(dt) @ A.astype(dt) for S in self.omegas)
        det = _det(A) if dt is object else float(np.linalg.det(A.astype(float)))
        return SDTriple(omegas, self.phi * det)

    def to_json(self) -> dict:
        from .exactcore import scalar_to_json
        conv = scalar_to_json if self.exact else float
        return {"omegas": [[[conv(x) for x in row] for row in S] for S in self.omegas],
                "phi": conv(self.phi)}

    @classmethod
    def from_json(cls, obj: dict) -> "SDTriple":
        from .exactcore import scalar_from_json
        def conv(x):
            return float(x) if isinstance(x, float) else scalar_from_json(x)
        return cls(tuple(np.array([[conv(x) for x in row] for row in S], dtype=object)
                         for S in obj["omegas"]), conv(obj.get("phi", 1)))


def _det(A) -> object:
    from .exterior import _det as det_exact
    return det_exact([[Fraction(x) for x in row] for row in np.asarray(A)])


def sd_gram(T: SDTriple) -> np.ndarray:
    """a with Omega_i ∧ Omega_j = 2 a_ij phi dx^1234."""
    a = np.empty((3, 3), dtype=object)
    for i in range(3):
        for j in range(3):
            c = wedge_coefficient(T.omegas[i], T.omegas[j])
            a[i, j] = c / (2 * Fraction(T.phi)) if T.exact else c / (2 * float(T.phi))
    return a if T.exact else a.astype(float)


def is_positive_definite(a) -> bool:
    a = np.asarray(a)
    if a.dtype == object:
        return all(_det(a[:k, :k]) > 0 for k in range(1, len(a) + 1))
    return bool(np.all(np.linalg.eigvalsh(0.5 * (a + a.T)) > 0))


def _check_identity_gram(T: SDTriple, tol: float) -> None:
    a = sd_gram(T)
    if not is_positive_definite(a):
        raise DegenerateTriple(f"pairing matrix is not positive definite: {a.tolist()}")
    off = np.abs((a - np.eye(3)).astype(float)).max()
    if (T.exact and off != 0) or off > tol:
        raise DegenerateTriple(f"pairing matrix is not the identity (deviation {off:.3g})")


def orthonormalize_triple(T: SDTriple) -> SDTriple:
    """Replace the triple by a^(-1/2) applied to it, making the pairing matrix the identity."""
    T = SDTriple(tuple(S.astype(float) for S in T.omegas), float(T.phi))
    # a badly conditioned pairing matrix leaves roundoff after one pass, so repeat
    for _ in range(4):
        a = sd_gram(T)
        if not is_positive_definite(a):
            raise DegenerateTriple("pairing matrix is not positive definite")
        if np.abs(a - np.eye(3)).max() <= 1e-15:
            break
        w, v = np.linalg.eigh(a)
        root = v @ np.diag(w ** -0.5) @ v.T
        T = SDTriple(tuple(sum(root[i, j] * T.omegas[j] for j in range(3)) for i in range(3)), T.phi)
    return T


def _inv(M):
    if M.dtype == object:
        return np.array(Mat.of(M.tolist()).inverse().entries, dtype=object)
    return np.linalg.inv(M)


def _sqrt(x):
    if isinstance(x, Fraction):
        n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if n * n == x.numerator and d * d == x.denominator:
            return Fraction(n, d)
        return math.sqrt(x)
    return math.sqrt(x)


_SMALL_DIRECTIONS = sorted((u for u in product(range(-2, 3), repeat=4) if any(u)),
                           key=lambda u: (sum(map(abs, u)), [-x for x in u]))


def _unit_start(g) -> np.ndarray:
    """A g-unit vector; for exact g, a small integer direction with rational length if one exists."""
    if g.dtype == object:
        for u in _SMALL_DIRECTIONS:
                u = np.array([Fraction(x) for x in u], dtype=object)
                r = _sqrt(u @ g @ u)
                if isinstance(r, Fraction):
                    return u / r
    u = np.zeros(4, dtype=g.dtype)
    u[0] = 1
    return u / _sqrt(g[0, 0])


@dataclass(frozen=True, eq=False)
class Standardization:
    coframe: np.ndarray
    residuals: tuple
    metric: np.ndarray

    @property
    def max_residual(self) -> float:
        return max(self.residuals)


def coframe_residuals(T: SDTriple, coframe) -> tuple:
    """Largest entry of Omega_i minus its standard expression in the coframe, per i."""
    out = []
    for i, S in enumerate(T.omegas, start=1):
        diff = S - standard_form(i, coframe)
        out.append(float(max(abs(x) for x in diff.flat)))
    return tuple(out)


def _polish_coframe(T: SDTriple, C: np.ndarray, steps: int = 3) -> np.ndarray:
    """Gauss-Newton refinement of a float coframe against the standard identities.

    The closed-form coframe loses accuracy when the triple is badly conditioned;
    a few least-squares steps bring the residual back to roundoff.
    """
    iu = np.triu_indices(4, 1)

    def residual(D):
        return np.concatenate([(standard_form(i, D) - S)[iu] for i, S in enumerate(T.omegas, start=1)])

    def quad(D):
        return np.concatenate([standard_form(i, D)[iu] for i in (1, 2, 3)])

    r = residual(C)
    for _ in range(steps):
        # standard_form is quadratic in the coframe, so Q(C+E)-Q(C)-Q(E) is the exact derivative
        jac = np.empty((len(r), 16))
        for k in range(16):
            E = np.zeros(16)
            E[k] = 1.0
            E = E.reshape(4, 4)
            jac[:, k] = quad(C + E) - quad(C) - quad(E)
        step = np.linalg.lstsq(jac, -r, rcond=None)[0].reshape(4, 4)
        trial = C + step
        r_trial = residual(trial)
        if np.abs(r_trial).max() >= np.abs(r).max():
            break
        C, r = trial, r_trial
    return C


def standardize_sd_triple(T: SDTriple, tol: float = 1e-9) -> Standardization:
    """An oriented orthonormal coframe in which the triple takes its standard shape.

    Writing Omega_i = C^T J_i C with quaternionic J_i, the metric g = C^T C is
    recovered as +-M_2 M_3^(-1) M_1 and the complex structures as
    I_i = g^(-1) M_i; the frame is then u_0 (g-unit) and u_i = -I_i u_0.
    """
    _check_identity_gram(T, tol)
    M1, M2, M3 = T.omegas
    g = M2 @ _inv(M3) @ M1
    if not is_positive_definite(g):
        g = -g
    if not is_positive_definite(g):
        raise DegenerateTriple("triple does not determine a positive definite metric")
    ginv = _inv(g)
    u0 = _unit_start(g)
    if isinstance(u0[0], float) and g.dtype == object:
        g, ginv, M1, M2, M3 = (x.astype(float) for x in (g, ginv, M1, M2, M3))
        u0 = u0.astype(float)
    frame = np.column_stack([u0] + [-(ginv @ M) @ u0 for M in (M1, M2, M3)])
    C = _inv(frame)
    if C.dtype != object:
        C = _polish_coframe(T, C)
    res = coframe_residuals(T, C)
    if max(res) > tol:
        raise DegenerateTriple(f"recovered coframe fails the standard identities (residual {max(res):.3g})")
    return Standardization(C, res, g)


# -- the product G2 structure --------------------------------------------------

def _lift(S) -> AltForm:
    return AltForm(7, 2, {(a + 1, b + 1): Fraction(S[a, b]) for a, b in combinations(range(4), 2)})


@dataclass(frozen=True)
class G2Structure:
    phibar: AltForm
    star_phibar: AltForm


def build_g2_structure(T: SDTriple) -> G2Structure:
    """phibar = dy^123 - sum dy^i ∧ Omega_i with x in slots 1-4 and y in slots 5-7."""
    if not T.exact:
        raise TypeError("build_g2_structure needs an exact (rational) triple")
    _check_identity_gram(T, 0.0)
    dy = {i: AltForm.dx(7, 4 + i) for i in (1, 2, 3)}
    om = [_lift(S) for S in T.omegas]
    phibar = AltForm.dx(7, 5, 6, 7)
    for i in range(3):
        phibar = phibar - wedge(dy[i + 1], om[i])
    vol = AltForm(7, 4, {(1, 2, 3, 4): Fraction(T.phi)})
    star = vol
    for (j, k), o in zip(((2, 3), (3, 1), (1, 2)), om):
        star = star - wedge(wedge(dy[j], dy[k]), o)
    return G2Structure(phibar, star)


def g2_witness(T: SDTriple) -> Mat:
    """u in GL(7) with pullback(u, phi_0) = phibar, namely diag(C, I_3)."""
    C = standardize_sd_triple(T).coframe
    if C.dtype != object:
        raise DegenerateTriple("coframe is not rational, so no exact witness exists")
    return Mat.block_diag(Mat.of(C.tolist()), Mat.identity(3))


# -- torus metrics -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TorusMetric:
    m: int
    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g)
        if g.shape != (self.m, self.m):
            raise ValueError(f"metric must be {self.m}x{self.m}")
        exact = all(_is_exact(x) for x in g.flat)
        g = np.vectorize(Fraction, otypes=[object])(g) if exact else g.astype(float)
        if not (g == g.T).all():
            raise ValueError("metric is not symmetric")
        if not is_positive_definite(g):
            raise ValueError("metric is not positive definite")
        object.__setattr__(self, "g", g)

    @property
    def exact(self) -> bool:
        return self.g.dtype == object


def rational_root(x: Fraction, k: int) -> Fraction:
    """Exact k-th root of a positive rational; ValueError if it is irrational."""
    if x <= 0:
        raise ValueError("root of a non-positive number")
    rn, ok_n = gmpy2.iroot(gmpy2.mpz(x.numerator), k)
    rd, ok_d = gmpy2.iroot(gmpy2.mpz(x.denominator), k)
    if not (ok_n and ok_d):
        raise ValueError(f"{x} has no rational {k}-th root")
    return Fraction(int(rn), int(rd))


@dataclass(frozen=True, eq=False)
class TorusRoundTrip:
    h: np.ndarray
    g_back: np.ndarray
    exact: bool
    divergence_ok: bool

    def error(self, g) -> float:
        return float(np.abs((self.g_back - np.asarray(g)).astype(float)).max())


def torus_metric_roundtrip(G: TorusMetric) -> TorusRoundTrip:
    """h = det(g)^(1/2) g^(-1), then g_back = det(h)^(1/(m-2)) h^(-1)."""
    m = G.m
    if m < 3:
        raise ValueError("the exponent 1/(m-2) is undefined for m < 3")
    if G.exact:
        h = rational_root(_det(G.g), 2) * _inv(G.g)
        g_back = rational_root(_det(h), m - 2) * _inv(h)
    else:
        h = np.sqrt(np.linalg.det(G.g)) * np.linalg.inv(G.g)
        g_back = np.linalg.det(h) ** (1.0 / (m - 2)) * np.linalg.inv(h)
    # h is constant, so the divergence condition holds identically
    return TorusRoundTrip(h, g_back, G.exact, True)
