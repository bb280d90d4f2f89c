"""Verification suites: named collections of checks with machine-readable reports."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from . import __version__, calibnum, catalog, models
from .cartan import (build_g2_restrainers, cartan_test, extension_rank_S, polar_profile,
                     polar_spaces, restraining_check)
from .exactcore import Mat
from .exterior import AltForm, hodge, pullback
from .stabilizer import is_bracket_closed, stab_algebra, strong_admissibility, symbol_rank, system

SUITES = ("su3", "g2", "comass", "models")
SUITE_CHOICES = SUITES + ("all",)
PLUMBING = "plumbing"

IM_UPSILON_NOTE = ("im_upsilon0: the commonly printed expansion of Im (dx1+i dx4)(dx2+i dx5)(dx3+i dx6) "
                   "lists dx^246 where the product gives dx^126; the computed expansion is used")
SYMBOL_NOTE = ("symbol rank: the codimension of the integral elements at a flat point is read as the rank "
               "of the linearized closure map X -> (sum_k dx^k ∧ X(e_k)·alpha) over the generators")
PHASE_NOTE = ("phase convention: the Lagrangian phase of an oriented frame is Upsilon_0(v1, v2, v3) "
              "times the frame's orientation flag, so the standard R^3 has phase +1")
VOLUME_NOTE = ("volume normalization: a triple is paired against phi dx^1234 and phi is reported "
               "as volume_scale rather than rescaled away")


@dataclass
class Check:
    id: str
    anchor: str
    status: str
    expected: object
    observed: object
    seed: int | None = None
    runtime_ms: float = 0.0


@dataclass
class SuiteReport:
    suite: str
    status: str
    version: str
    timestamp: str
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        return asdict(self)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    return x


class _Collector:
    def __init__(self, seed: int | None = None):
        self.checks: list[Check] = []
        self.notes: list[str] = []
        self.seed = seed

    def note(self, text: str) -> None:
        if text not in self.notes:
            self.notes.append(text)

    def add(self, id: str, anchor: str, expected, compute: Callable[[], object],
            passes: Callable[[object], bool] | None = None, stochastic: bool = False) -> None:
        start = time.perf_counter()
        try:
            observed = compute()
            ok = passes(observed) if passes else observed == expected
        except Exception as exc:  # a crashing check is a failing check
            observed, ok = f"error: {type(exc).__name__}: {exc}", False
        ms = round((time.perf_counter() - start) * 1000, 3)
        self.checks.append(Check(id, anchor, "pass" if ok else "fail", _jsonable(expected),
                                 _jsonable(observed), self.seed if stochastic else None, ms))


# -- cached exact computations ---------------------------------------------------

@lru_cache(maxsize=None)
def _stab(name):
    return stab_algebra(system(name))


@lru_cache(maxsize=None)
def _spaces(name):
    return tuple(polar_spaces(system(name)))


@lru_cache(maxsize=None)
def _profile(name):
    return polar_profile(system(name), _spaces(name))


@lru_cache(maxsize=None)
def _rank(name):
    return symbol_rank(system(name))


def _form(n, terms) -> AltForm:
    return AltForm.from_terms(n, len(terms[0][0]), terms)


# reference expansions, written out term by term
PRINTED_RE_UPSILON = [((1, 2, 3), 1), ((1, 5, 6), -1), ((2, 4, 6), 1), ((3, 4, 5), -1)]
PRINTED_IM_UPSILON = [((2, 4, 6), 1), ((2, 3, 4), 1), ((1, 3, 5), -1), ((4, 5, 6), -1)]
EXPANDED_IM_UPSILON = [((1, 2, 6), 1), ((2, 3, 4), 1), ((1, 3, 5), -1), ((4, 5, 6), -1)]
PRINTED_STAR_PHI = [((1, 2, 3, 4), 1), ((1, 2, 6, 7), -1), ((1, 3, 5, 7), 1), ((1, 4, 5, 6), -1),
                    ((2, 3, 5, 6), -1), ((2, 4, 5, 7), -1), ((3, 4, 6, 7), -1)]

SU3_H = (36, 36, 35, 31, 22, 14, 8)
SU3_C = (0, 0, 1, 5, 14, 22, 28)
SU3_STAR_CARTAN_SUM = 38
G2_H = (49, 49, 49, 48, 44, 34, 21, 14)
G2_C = (0, 0, 0, 1, 5, 15, 28, 35)


def _restrain_su3(key, k):
    W = catalog.get_space(key)
    v = restraining_check(W, system("su3"), k, sym=(catalog.reflection(6, 3),), h=_spaces("su3")[k])
    return [v.w_dim, v.h_dim, v.meet_dim, v.complementary, all(v.conj_invariant)]


def suite_su3(c: _Collector) -> None:
    c.add("su3.stab.dim", "the stabilizer of (omega_0, Re Upsilon_0, Im Upsilon_0) is su(3)", 8,
          lambda: _stab("su3").dim)
    c.add("su3.stab.bracket_closed", "the stabilizer is a Lie subalgebra", True,
          lambda: is_bracket_closed(_stab("su3")))
    c.add("su3.stab.omega_only", "the stabilizer of omega_0 alone is sp(6,R)", 21,
          lambda: _stab("omega-only").dim)
    c.add("su3.polar.h_dims", "polar spaces of the canonical flag", list(SU3_H),
          lambda: list(_profile("su3").h_dims))
    c.add("su3.polar.c_seq", "polar codimensions c_k = 36 - dim h_k", list(SU3_C),
          lambda: list(_profile("su3").c_seq))
    c.add("su3.cartan.sum", "c_0 + ... + c_5 equals the symbol rank", 42,
          lambda: _profile("su3").cartan_sum)
    c.add("su3.symbol.rank", "closure conditions impose 6 (15 - 8) = 42 equations", 42,
          lambda: _rank("su3"))
    c.add("su3.cartan.regular", "Cartan's test holds with equality", True,
          lambda: cartan_test(system("su3"), _profile("su3"), _rank("su3")).regular)
    c.add("su3.admissible", "SU(3) is strongly admissible", True,
          lambda: strong_admissibility(system("su3"), _stab("su3"), _rank("su3")).strongly_admissible)
    c.add("su3.star.cartan_sum", "the interleaved presentation is not regular (sum below 42)",
          SU3_STAR_CARTAN_SUM, lambda: _profile("su3-star").cartan_sum)
    c.add("su3.star.presentations_agree", "the permutation P carries split forms to interleaved forms",
          True, lambda: catalog.presentations_agree(3))
    for key, k in (("W5", 3), ("W14", 4), ("W22", 5)):
        w = int(key[1:])
        c.add(f"su3.restrain.{key}", f"{key} is an R-invariant complement of h_{k}",
              [w, 36 - w, 0, True, True], lambda key=key, k=k: _restrain_su3(key, k))
    c.add("su3.extension.r", "extension ranks of E_3, E_4, E_5 in S", [25, 15, 6],
          lambda: [extension_rank_S(system("su3"), k, _profile("su3")).r for k in (3, 4, 5)])
    c.add("su3.extension.dim_h3", "dim H(E_3) = 29", 29,
          lambda: extension_rank_S(system("su3"), 3, _profile("su3")).dim_H)
    re, im = catalog.upsilon0(3)
    c.add("su3.golden.re_upsilon", "Re Upsilon_0 term by term", True,
          lambda: re == _form(6, PRINTED_RE_UPSILON))
    c.add("su3.golden.im_upsilon", "Im Upsilon_0 from the product expansion", True,
          lambda: im == _form(6, EXPANDED_IM_UPSILON) and im != _form(6, PRINTED_IM_UPSILON))
    c.note(IM_UPSILON_NOTE)
    c.note(SYMBOL_NOTE)
    R6 = catalog.reflection(6, 3)
    c.add("su3.involution.R6", "R*omega = -omega and R*Upsilon = conjugate Upsilon", True,
          lambda: (pullback(R6, catalog.omega0(3)) == -catalog.omega0(3)
                   and pullback(R6, re) == re and pullback(R6, im) == -im))


def _g2_restrainer_dims():
    ws = build_g2_restrainers(system("g2"), list(_spaces("g2")[:7]))
    return [w.dim for w in ws]


def suite_g2(c: _Collector) -> None:
    c.note(SYMBOL_NOTE)
    c.add("g2.stab.dim", "the stabilizer of (phi_0, *phi_0) is g2", 14, lambda: _stab("g2").dim)
    c.add("g2.stab.phi_only", "phi_0 alone already has stabilizer g2", 14, lambda: _stab("g2-phi").dim)
    c.add("g2.stab.bracket_closed", "the stabilizer is a Lie subalgebra", True,
          lambda: is_bracket_closed(_stab("g2")))
    c.add("g2.polar.h_dims", "polar spaces of the canonical flag", list(G2_H),
          lambda: list(_profile("g2").h_dims))
    c.add("g2.polar.c_seq", "polar codimensions c_k = 49 - dim h_k", list(G2_C),
          lambda: list(_profile("g2").c_seq))
    c.add("g2.cartan.sum", "c_0 + ... + c_6 equals the symbol rank", 49,
          lambda: _profile("g2").cartan_sum)
    c.add("g2.symbol.rank", "49 = 7 (21 - 14)", 49, lambda: _rank("g2"))
    c.add("g2.cartan.regular", "Cartan's test holds with equality", True,
          lambda: cartan_test(system("g2"), _profile("g2"), _rank("g2")).regular)
    c.add("g2.admissible", "G2 is strongly admissible", True,
          lambda: strong_admissibility(system("g2"), _stab("g2"), _rank("g2")).strongly_admissible)
    c.add("g2.restrain.dims", "restraining spaces complementary to h_4, h_5, h_6", [5, 15, 28],
          _g2_restrainer_dims)
    c.add("g2.extension.r", "extension ranks 32 = 42-10, 21 = 42-21, 7 = 42-35", [32, 21, 7],
          lambda: [extension_rank_S(system("g2"), k, _profile("g2")).r for k in (4, 5, 6)])
    c.add("g2.golden.star_phi", "hodge(phi_0) equals *phi_0 term by term", True,
          lambda: hodge(catalog.phi0()) == _form(7, PRINTED_STAR_PHI))
    minus = Mat.diag([-1] * 7)
    c.add("g2.involution.minus_identity", "-I_7 negates phi_0 and fixes *phi_0", True,
          lambda: (pullback(minus, catalog.phi0()) == -catalog.phi0()
                   and pullback(minus, catalog.star_phi0()) == catalog.star_phi0()))
    c.add("g2.sp2sp1.stab.dim", "the stabilizer of the Kraines form is sp(2)+sp(1)", 13,
          lambda: _stab("sp2sp1").dim)
    c.add("g2.sp2sp1.stab.bracket_closed", "the Sp(2)Sp(1) stabilizer is a Lie subalgebra", True,
          lambda: is_bracket_closed(_stab("sp2sp1")))

    def sp_verdict():
        v = strong_admissibility(system("sp2sp1"), _stab("sp2sp1"), _rank("sp2sp1"))
        return [v.symbol_rank, v.expected_rank, v.strongly_admissible]
    c.add("g2.sp2sp1.admissible", "Sp(2)Sp(1) is not strongly admissible (rank at most 56 < 120)",
          [56, 120, False], sp_verdict,
          passes=lambda o: o[0] <= 56 and o[1] == 120 and o[2] is False)


# -- stochastic suite ------------------------------------------------------------

CALIBRATIONS = ("omega0(3)", "wirtinger(3,2)", "re_upsilon0(3)", "phi0", "star_phi0")
BOUND_TOL = 1e-9
COMASS_LOW = 1 - 1e-3
PLANE_TOL = 1e-9


def _plane_checks(c: _Collector, seed: int, samples: int) -> None:
    rng_seeds = np.random.SeedSequence(seed).spawn(4)
    su3 = _stab("su3")
    g2 = _stab("g2")
    E3 = calibnum.Frame.coordinate(6, (1, 2, 3))
    E0 = calibnum.Frame.coordinate(7, (1, 2, 3, 4))

    def special_lagrangian():
        worst, ok = 0.0, True
        for s in rng_seeds[0].generate_state(samples):
            A = calibnum.sample_group(su3, int(s))
            v = calibnum.sl_predicate(E3.transformed(A), PLANE_TOL)
            ok &= v.is_lagrangian and v.is_special
            worst = max(worst, abs(v.phase - 1) if v.phase is not None else np.inf)
        return [bool(ok), worst]
    c.add("comass.plane.special_lagrangian", "SU(3)-images of R^3 are special Lagrangian",
          [True, 0.0], special_lagrangian, passes=lambda o: o[0] and o[1] <= PLANE_TOL, stochastic=True)

    def unitary_phase():
        rng = calibnum.philox(rng_seeds[1])
        worst_abs, worst_det = 0.0, 0.0
        for _ in range(samples):
            A = calibnum.random_unitary(3, rng)
            v = calibnum.sl_predicate(E3.transformed(calibnum.unitary_to_real(A)), PLANE_TOL)
            worst_abs = max(worst_abs, abs(abs(v.phase) - 1))
            worst_det = max(worst_det, abs(v.phase - np.linalg.det(A)))
        return [worst_abs, worst_det]
    c.add("comass.plane.unitary_phase", "unitary images are Lagrangian with phase det A",
          [0.0, 0.0], unitary_phase, passes=lambda o: max(o) <= PLANE_TOL, stochastic=True)

    def coassociative():
        worst_phi, worst_vol, worst_sd, worst_norm, min_rank = 0.0, 0.0, 0.0, 0.0, 3
        P = calibnum.to_tensor(catalog.phi0())
        star = catalog.star_phi0()
        for s in rng_seeds[2].generate_state(samples):
            g = calibnum.sample_group(g2, int(s))
            E = E0.transformed(g)
            vs = E.vectors
            worst_phi = max(worst_phi, float(np.abs(np.einsum("abc,ia,jb,kc->ijk", P, vs, vs, vs)).max()))
            worst_vol = max(worst_vol, abs(calibnum.evaluate_float(star, vs) - 1))
            rep = calibnum.normal_iso_family(E)
            worst_sd = max(worst_sd, rep.self_dual_residual)
            worst_norm = max(worst_norm, max(abs(x - np.sqrt(2)) for x in rep.norms))
            min_rank = min(min_rank, rep.rank)
        return [worst_phi, worst_vol, worst_sd, worst_norm, min_rank]
    c.add("comass.plane.coassociative", "G2-images of E_0 are coassociative; normal map is self-dual, norm sqrt 2, rank 3",
          [0.0, 0.0, 0.0, 0.0, 3], coassociative,
          passes=lambda o: max(o[:4]) <= PLANE_TOL and o[4] == 3, stochastic=True)


def suite_comass(c: _Collector, frames: int = 100_000, samples: int = 100,
                 cfg: calibnum.ComassConfig | None = None) -> None:
    seed = c.seed
    cfg = cfg or calibnum.ComassConfig(seed=seed)
    c.note(PHASE_NOTE)
    for key in CALIBRATIONS:
        a = catalog.get_form(key)
        c.add(f"comass.bound.{key}", f"{key} is at most 1 on every orthonormal frame", 1.0,
              lambda a=a: calibnum.max_random_value(a, frames, seed),
              passes=lambda o: o <= 1 + BOUND_TOL, stochastic=True)
        c.add(f"comass.estimate.{key}", f"the comass of {key} is 1", 1.0,
              lambda a=a: calibnum.comass_estimate(a, a.degree, cfg).estimate,
              passes=lambda o: COMASS_LOW <= o <= 1 + BOUND_TOL, stochastic=True)
    _plane_checks(c, seed, samples)


# -- models suite ----------------------------------------------------------------

def _random_triple_roundtrip(seed: int, count: int = 100) -> float:
    rng = calibnum.philox(seed)
    std = models.SDTriple.standard()
    worst = 0.0
    for _ in range(count):
        A = rng.standard_normal((4, 4))
        if np.linalg.det(A) < 0:
            A[0] *= -1
        # mix the triple by a random positive matrix, then re-orthonormalize
        B = rng.standard_normal((3, 3))
        if np.linalg.det(B) < 0:  # a reversing mix yields the opposite-handed triple
            B[0] *= -1
        T = std.pulled_back(A)
        T = models.SDTriple(tuple(sum(B[i, j] * T.omegas[j] for j in range(3)) for i in range(3)), T.phi)
        T = models.orthonormalize_triple(T)
        st = models.standardize_sd_triple(T)
        worst = max(worst, max(models.coframe_residuals(T, st.coframe)))
    return worst


def _random_spd_square_det(m: int, rng: np.random.Generator) -> np.ndarray:
    """L L^T for an integer unit-triangular L times a square diagonal, so det is a square."""
    while True:
        L = np.tril(rng.integers(-3, 4, (m, m)), -1) + np.eye(m, dtype=int)
        d = rng.integers(1, 4, m) ** 2
        g = (L * d) @ L.T
        return np.vectorize(Fraction, otypes=[object])(g)


def _torus_exact(seed: int):
    rng = calibnum.philox(seed)
    out = []
    for m in (3, 4, 5):
        g = _random_spd_square_det(m, rng)
        r = models.torus_metric_roundtrip(models.TorusMetric(m, g))
        out.append(bool((r.g_back == g).all()))
    return out


def _torus_m2_rejected():
    try:
        models.torus_metric_roundtrip(models.TorusMetric(2, np.eye(2, dtype=int)))
    except ValueError:
        return True
    return False


def _degenerate_rejected():
    T = models.SDTriple((models.standard_form(1), models.standard_form(2),
                         models.standard_form(3) * np.sqrt(0.5)), 1.0)
    try:
        models.standardize_sd_triple(T)
    except models.DegenerateTriple:
        return True
    return False


def suite_models(c: _Collector) -> None:
    std = models.SDTriple.standard()
    c.note(VOLUME_NOTE)
    c.add("models.sd.json_roundtrip", PLUMBING, True,
          lambda: all((a == b).all() for a, b in zip(models.SDTriple.from_json(std.to_json()).omegas, std.omegas)))
    c.add("models.sd.gram_standard", "the standard triple pairs to the identity", True,
          lambda: bool((models.sd_gram(std) == np.eye(3)).all()))
    c.add("models.sd.roundtrip", "standardization reproduces the three identities on 100 random triples",
          0.0, lambda: _random_triple_roundtrip(c.seed), passes=lambda o: o < 1e-9, stochastic=True)
    c.add("models.sd.degenerate", "a triple with pairing diag(1,1,1/2) is rejected", True,
          _degenerate_rejected)
    G = models.build_g2_structure(std)
    c.add("models.g2.phibar_is_phi0", "for the standard triple phibar is phi_0 in these slots", True,
          lambda: G.phibar == catalog.phi0())
    c.add("models.g2.hodge", "hodge(phibar) = star_phibar", True, lambda: hodge(G.phibar) == G.star_phibar)
    c.add("models.g2.stab", "phibar has a 14-dimensional stabilizer", 14,
          lambda: stab_algebra(system("g2-phi").__class__(7, (G.phibar,))).dim)
    c.add("models.g2.witness", "pullback(diag(C, I_3), phi_0) = phibar", True,
          lambda: pullback(models.g2_witness(std), catalog.phi0()) == G.phibar)
    c.add("models.torus.exact", "g -> h -> g is exact for rational metrics with square determinant",
          [True, True, True], lambda: _torus_exact(c.seed), stochastic=True)
    c.add("models.torus.m2_rejected", "the correspondence needs m >= 3", True, _torus_m2_rejected)


_RUNNERS = {"su3": suite_su3, "g2": suite_g2, "comass": suite_comass, "models": suite_models}


def run_suite(name: str, seed: int = 0, full: bool = False, **options) -> SuiteReport:
    """Run one suite (or ``all``) and collect its report."""
    if name not in SUITE_CHOICES:
        raise ValueError(f"unknown suite {name!r}; expected one of {', '.join(SUITE_CHOICES)}")
    names = [n for n in SUITES if full or n != "comass"] if name == "all" else [name]
    c = _Collector(seed)
    for n in names:
        if n == "comass":
            suite_comass(c, **options)
        else:
            _RUNNERS[n](c)
    c.checks.sort(key=lambda ch: ch.id)
    status = "pass" if all(ch.status == "pass" for ch in c.checks) else "fail"
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return SuiteReport(name, status, __version__, stamp, c.checks, c.notes)


def emit_report(r: SuiteReport, fmt: str = "table") -> str:
    if fmt == "json":
        return json.dumps(r.to_json(), indent=2, sort_keys=False)
    if fmt != "table":
        raise ValueError(f"unknown format {fmt!r}")
    rows = [("id", "status", "expected", "observed", "ms")]
    for ch in r.checks:
        flag = ch.status.upper() if ch.status == "pass" else "FAIL <<"
        rows.append((ch.id, flag, json.dumps(ch.expected), json.dumps(ch.observed), f"{ch.runtime_ms:.0f}"))
    widths = [min(max(len(row[i]) for row in rows), 60) for i in range(5)]
    lines = ["  ".join(cell[:60].ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.append(f"suite {r.suite}: {r.status} ({sum(ch.status == 'pass' for ch in r.checks)}/{len(r.checks)} checks)")
    lines.extend(f"note: {n}" for n in r.notes)
    return "\n".join(lines)
