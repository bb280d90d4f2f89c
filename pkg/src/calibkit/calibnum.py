"""Floating-point certification of calibrations and calibrated planes.

Frames are stored as ``(p, n)`` arrays of row vectors.  Forms are converted to
dense antisymmetric tensors ``T[i1, ..., ip] = a(e_i1, ..., e_ip)`` so that
evaluation and gradients are plain tensor contractions.

Random streams come from the counter-based Philox generator; per-restart
streams are spawned from one :class:`numpy.random.SeedSequence`, so a run with
more restarts extends (never reshuffles) a run with fewer.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np
import scipy.linalg

from .exactcore import Subspace
from .exterior import AltForm, _sort_sign

ORTHO_TOL = 1e-12


def philox(seed) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def split_streams(seed: int, count: int) -> list[np.random.Generator]:
    return [philox(s) for s in np.random.SeedSequence(seed).spawn(count)]


# -- frames ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Frame:
    vectors: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        object.__setattr__(self, "vectors", v)
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        resid = np.abs(v @ v.T - np.eye(v.shape[0])).max() if v.size else 0.0
        if resid > ORTHO_TOL:
            raise ValueError(f"frame is not orthonormal (Gram residual {resid:.2e})")

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    @property
    def p(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def orthonormalized(cls, vectors, orientation: int = 1) -> "Frame":
        """Gram-Schmidt of the given vectors, keeping the orientation they induce."""
        v = np.asarray(vectors, dtype=float)
        q, r = np.linalg.qr(v.T)
        q = q * np.sign(np.diag(r))
        return cls(q.T, orientation)

    @classmethod
    def coordinate(cls, n: int, idx, orientation: int = 1) -> "Frame":
        """Frame (e_i for i in idx), 1-based."""
        return cls(np.eye(n)[[i - 1 for i in idx]], orientation)

    def transformed(self, g: np.ndarray) -> "Frame":
        return Frame(self.vectors @ np.asarray(g).T, self.orientation)

    def flipped(self) -> "Frame":
        return Frame(self.vectors, -self.orientation)

    def to_json(self) -> dict:
        return {"n": self.n, "p": self.p, "vectors": self.vectors.tolist(),
                "orientation": self.orientation}

    @classmethod
    def from_json(cls, obj: dict) -> "Frame":
        f = cls(np.array(obj["vectors"], dtype=float), int(obj.get("orientation", 1)))
        if ("n" in obj and obj["n"] != f.n) or ("p" in obj and obj["p"] != f.p):
            raise ValueError("declared frame shape disagrees with vectors")
        return f


# -- dense tensors -----------------------------------------------------------

@lru_cache(maxsize=None)
def _perm_signs(p: int):
    return [(perm, _sort_sign(perm)[0]) for perm in permutations(range(p))]


def to_tensor(a: AltForm) -> np.ndarray:
    T = np.zeros((a.dim,) * a.degree)
    for idx, c in a.terms.items():
        for perm, sign in _perm_signs(a.degree):
            T[tuple(idx[k] - 1 for k in perm)] = sign * float(c)
    return T


def _contract(T: np.ndarray, vecs: list[np.ndarray], skip: int | None = None) -> np.ndarray:
    """Batched contraction of T with vecs (each (B, n)), leaving slot ``skip`` open."""
    p = T.ndim
    letters = string.ascii_lowercase[:p]
    ops, subs = [T], [letters]
    for s in range(p):
        if s == skip:
            continue
        ops.append(vecs[s])
        subs.append("z" + letters[s])
    out = "z" + (letters[skip] if skip is not None else "")
    return np.einsum(",".join(subs) + "->" + out, *ops, optimize=True)


def eval_tensor(T: np.ndarray, frames: np.ndarray) -> np.ndarray:
    """Values on a batch of frames of shape (B, p, n)."""
    frames = np.asarray(frames)
    if frames.ndim == 2:
        return _contract(T, list(frames[None].transpose(1, 0, 2)))[0]
    return _contract(T, list(frames.transpose(1, 0, 2)))


def evaluate_float(a: AltForm | np.ndarray, vectors) -> float:
    T = a if isinstance(a, np.ndarray) else to_tensor(a)
    return float(eval_tensor(T, np.asarray(vectors, dtype=float)))


def pullback_tensor(g: np.ndarray, T: np.ndarray) -> np.ndarray:
    """(g* T)[j..] = T(g e_j1, ...)."""
    out = T
    for axis in range(T.ndim):
        out = np.moveaxis(np.tensordot(out, g, axes=([axis], [0])), -1, axis)
    return out


def random_frames(n: int, p: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthonormal p-frames, shape (count, p, n)."""
    z = rng.standard_normal((count, n, p))
    q, r = np.linalg.qr(z)
    q = q * np.sign(np.einsum("bii->bi", r))[:, None, :]
    return q.transpose(0, 2, 1)


def max_random_value(a: AltForm, count: int = 100_000, seed: int = 0, chunk: int = 20_000) -> float:
    """Largest value of ``a`` over ``count`` random orthonormal frames."""
    T = to_tensor(a)
    rng = philox(seed)
    best = -np.inf
    done = 0
    while done < count:
        m = min(chunk, count - done)
        vals = eval_tensor(T, random_frames(a.dim, a.degree, m, rng))
        best = max(best, float(np.max(np.abs(vals))))
        done += m
    return best


# -- comass ------------------------------------------------------------------

@dataclass(frozen=True)
class ComassConfig:
    samples: int = 200          # independent restarts
    iterations: int = 500
    seed: int = 0
    initial_step: float = 0.5
    max_halvings: int = 40
    grad_tol: float = 1e-11


@dataclass(frozen=True, eq=False)
class ComassResult:
    estimate: float
    argmax_frame: Frame
    samples: int
    iterations: int
    seed: int
    converged: bool


def _riemannian_grad(T: np.ndarray, V: np.ndarray) -> np.ndarray:
    vecs = list(V.transpose(1, 0, 2))
    G = np.stack([_contract(T, vecs, skip=s) for s in range(T.ndim)], axis=1)  # (B, p, n)
    # project onto the tangent space of the Stiefel manifold at V
    VG = np.einsum("bin,bjn->bij", V, G)
    sym = 0.5 * (VG + VG.transpose(0, 2, 1))
    return G - np.einsum("bij,bjn->bin", sym, V)


def _retract(V: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(V.transpose(0, 2, 1))
    q = q * np.sign(np.einsum("bii->bi", r))[:, None, :]
    return q.transpose(0, 2, 1)


def _ascend(T: np.ndarray, V: np.ndarray, cfg: ComassConfig) -> tuple[np.ndarray, np.ndarray, int, bool]:
    """Projected gradient ascent with backtracking, vectorized over restarts."""
    f = eval_tensor(T, V)
    active = np.ones(len(V), dtype=bool)
    it = 0
    for it in range(1, cfg.iterations + 1):
        idx = np.flatnonzero(active)
        if not idx.size:
            break
        Va, fa = V[idx], f[idx]
        xi = _riemannian_grad(T, Va)
        gnorm2 = np.einsum("bpn,bpn->b", xi, xi)
        step = np.full(idx.size, cfg.initial_step)
        accepted = np.zeros(idx.size, dtype=bool)
        newV, newf = Va.copy(), fa.copy()
        for _ in range(cfg.max_halvings):
            pending = ~accepted
            if not pending.any():
                break
            cand = _retract(Va[pending] + step[pending, None, None] * xi[pending])
            fc = eval_tensor(T, cand)
            ok = fc > fa[pending] + 1e-4 * step[pending] * gnorm2[pending]
            sel = np.flatnonzero(pending)[ok]
            newV[sel], newf[sel] = cand[ok], fc[ok]
            accepted[sel] = True
            step[pending] *= 0.5
        V[idx], f[idx] = newV, newf
        stalled = (~accepted) | (gnorm2 < cfg.grad_tol ** 2)
        active[idx[stalled]] = False
    return V, f, it, not active.any()


def comass_estimate(a: AltForm, p: int | None = None, cfg: ComassConfig = ComassConfig()) -> ComassResult:
    """Lower bound for the comass: best value of ``a`` over ascended orthonormal frames."""
    p = a.degree if p is None else p
    if p != a.degree:
        raise ValueError(f"p={p} does not match form degree {a.degree}")
    T = to_tensor(a)
    streams = split_streams(cfg.seed, cfg.samples)
    V = np.concatenate([random_frames(a.dim, p, 1, rng) for rng in streams])
    f0 = eval_tensor(T, V)
    V[f0 < 0, 0] *= -1  # flip orientation so every start has a nonnegative value
    V, f, iters, converged = _ascend(T, V, cfg)
    best = int(np.argmax(f))
    frame = Frame(V[best])
    return ComassResult(float(eval_tensor(T, frame.vectors)), frame, cfg.samples, iters,
                        cfg.seed, converged)


# -- calibrated planes ----------------------------------------------------------

def calibrated_orientation(a: AltForm, E: Frame, tol: float = 1e-9) -> int:
    """+1 or -1 if E is calibrated in that orientation of its vectors, else 0."""
    v = evaluate_float(a, E.vectors)
    if abs(v - 1) <= tol:
        return 1
    if abs(v + 1) <= tol:
        return -1
    return 0


def is_calibrated_plane(a: AltForm, E: Frame, tol: float = 1e-9) -> bool:
    if E.p != a.degree or E.n != a.dim:
        raise ValueError("frame shape does not match the form")
    return abs(evaluate_float(a, E.vectors) - E.orientation) <= tol


@dataclass(frozen=True)
class SLVerdict:
    is_lagrangian: bool
    is_special: bool
    phase: complex | None
    note: str = ""


def sl_predicate(E: Frame, tol: float = 1e-9) -> SLVerdict:
    """Lagrangian test, phase λ(E) with ι*Υ = λ Ω_E, and the special condition."""
    from . import catalog
    if E.n != 6 or E.p != 3:
        raise ValueError("sl_predicate expects a 3-frame in R^6")
    W = to_tensor(catalog.omega0(3))
    vs = E.vectors
    omega_max = max(abs(vs[i] @ W @ vs[j]) for i in range(3) for j in range(i + 1, 3))
    if omega_max > tol:
        return SLVerdict(False, False, None, "not Lagrangian: phase undefined")
    re, im = catalog.upsilon0(3)
    lam = complex(evaluate_float(re, vs), evaluate_float(im, vs)) * E.orientation
    if abs(abs(lam) - 1) > tol:
        return SLVerdict(True, False, lam, f"|phase| = {abs(lam):.12f} differs from 1")
    return SLVerdict(True, abs(lam - 1) <= tol, lam)


def hodge4(beta: np.ndarray, orientation: int = 1) -> np.ndarray:
    """Hodge star of a 2-form on an oriented orthonormal 4-frame (antisymmetric 4x4)."""
    eps = np.zeros((4, 4, 4, 4))
    for perm, sign in _perm_signs(4):
        eps[perm] = sign
    return orientation * 0.5 * np.einsum("abcd,cd->ab", eps, beta)


def form2_norm(beta: np.ndarray) -> float:
    return float(np.sqrt(0.5 * np.sum(beta * beta)))


class NotCoassociative(ValueError):
    pass


def coassoc_normal_iso(E: Frame, v, tol: float = 1e-9) -> np.ndarray:
    """The 2-form -ι_E*(v ⌟ φ_0), as an antisymmetric 4x4 array in E's frame."""
    from . import catalog
    if E.n != 7 or E.p != 4:
        raise ValueError("coassoc_normal_iso expects a 4-frame in R^7")
    v = np.asarray(v, dtype=float)
    P = to_tensor(catalog.phi0())
    vs = E.vectors
    restricted = np.einsum("abc,ia,jb,kc->ijk", P, vs, vs, vs)
    if np.abs(restricted).max() > tol:
        raise NotCoassociative(f"φ_0 restricts to E with size {np.abs(restricted).max():.2e}")
    if np.abs(vs @ v).max() > tol:
        raise ValueError("v is not orthogonal to E")
    return -np.einsum("abc,a,ib,jc->ij", P, v, vs, vs)


def normal_complement(E: Frame) -> np.ndarray:
    """Orthonormal basis (rows) of the orthogonal complement of E."""
    _, _, vt = np.linalg.svd(E.vectors)
    return vt[E.p:]


@dataclass(frozen=True, eq=False)
class NormalIsoReport:
    images: list
    self_dual_residual: float
    norms: list
    rank: int


def normal_iso_family(E: Frame, tol: float = 1e-9) -> NormalIsoReport:
    imgs = [coassoc_normal_iso(E, u, tol) for u in normal_complement(E)]
    resid = max(float(np.abs(hodge4(b, E.orientation) - b).max()) for b in imgs)
    flat = np.array([b[np.triu_indices(4, 1)] for b in imgs])
    rank = int(np.linalg.matrix_rank(flat, tol=1e-8))
    return NormalIsoReport(imgs, resid, [form2_norm(b) for b in imgs], rank)


# -- group sampling ----------------------------------------------------------------

def algebra_matrices(algebra: Subspace) -> np.ndarray:
    n = int(round(algebra.ambient ** 0.5))
    return np.array([[float(c) for c in row] for row in algebra.basis]).reshape(-1, n, n)


def sample_group(algebra: Subspace, seed: int = 0, coefficients=None) -> np.ndarray:
    """exp of an algebra element with coefficients uniform in [-1, 1]."""
    basis = algebra_matrices(algebra)
    if coefficients is None:
        coefficients = philox(seed).uniform(-1.0, 1.0, size=len(basis))
    x = np.tensordot(np.asarray(coefficients, dtype=float), basis, axes=1)
    return scipy.linalg.expm(x)


def unitary_to_real(A: np.ndarray) -> np.ndarray:
    """Real 2m x 2m matrix of A acting on C^m with z = x + i y."""
    A = np.asarray(A, dtype=complex)
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


def random_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
