"""``calibkit`` command line: inspect catalog objects and run verification suites."""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, calibnum, catalog, models
from .cartan import (build_g2_restrainers, cartan_test, extension_rank_S, polar_h, polar_profile,
                     polar_spaces, restraining_check)
from .exactcore import Mat, Subspace, scalar_to_json
from .exterior import AltForm
from .stabilizer import (SYSTEM_NAMES, NotOrthogonal, is_bracket_closed, stab_algebra,
                         strong_admissibility, symbol_rank, system)
from .suites import SUITE_CHOICES, emit_report, run_suite


class UsageError(Exception):
    pass


def _emit(obj, as_json: bool, lines=None) -> None:
    if as_json or lines is None:
        print(json.dumps(obj, indent=2))
    else:
        print("\n".join(lines))


def _load_json(text_or_path: str):
    """Parse inline JSON, or the JSON file it names."""
    p = Path(text_or_path)
    try:
        text = p.read_text() if p.exists() else text_or_path
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {text_or_path!r}: {exc}") from exc


def _scalar(x):
    return float(x) if isinstance(x, float) else Fraction(x)


def _to_json(obj):
    if isinstance(obj, (AltForm, Mat, Subspace)):
        return obj.to_json()
    if isinstance(obj, tuple):
        return {"re": obj[0].to_json(), "im": obj[1].to_json()}
    raise TypeError(type(obj))


# -- subcommands ------------------------------------------------------------------

def cmd_dump(args) -> int:
    try:
        obj = catalog.lookup(args.name)
    except (catalog.UnknownKey, ValueError) as exc:
        raise UsageError(f"unknown catalog key {args.name!r} ({exc})") from exc
    _emit(_to_json(obj), True)
    return 0


def cmd_stab(args) -> int:
    F = system(args.system)
    g = stab_algebra(F)
    rank = symbol_rank(F)
    try:
        v = strong_admissibility(F, g, rank)
        verdict = {"strongly_admissible": v.strongly_admissible, "expected_rank": v.expected_rank,
                   "kernel_dim": v.kernel_dim, "expected_kernel_dim": v.expected_kernel_dim}
    except NotOrthogonal as exc:
        verdict = {"strongly_admissible": None, "reason": str(exc)}
    out = {"system": args.system, "dim": g.dim, "bracket_closed": is_bracket_closed(g),
           "symbol_rank": rank, "verdict": verdict, "basis": g.to_json()["basis"]}
    lines = [f"system {args.system}: stabilizer dimension {g.dim}",
             f"bracket closed: {out['bracket_closed']}",
             f"symbol rank: {rank}",
             f"verdict: {json.dumps(verdict)}"]
    _emit(out, args.json, lines)
    return 0


def cmd_polar(args) -> int:
    F = system(args.system)
    n = F.dim
    if args.k is not None:
        if not 0 <= args.k <= n:
            raise UsageError(f"--k must lie in [0, {n}]")
        h = polar_h(F, args.k)
        out = {"system": args.system, "k": args.k, "h_dim": h.dim, "c": n * n - h.dim}
        if args.k < n:
            r = extension_rank_S(F, args.k)
            out.update(dim_H=r.dim_H, r=r.r)
        _emit(out, args.json, [f"{k}: {v}" for k, v in out.items()])
        return 0
    profile = polar_profile(F, polar_spaces(F))
    result = cartan_test(F, profile)
    ext = [extension_rank_S(F, k, profile) for k in range(n)]
    out = {"system": args.system, "h_dims": list(profile.h_dims), "c_seq": list(profile.c_seq),
           "cartan_sum": result.c_sum, "symbol_rank": result.symbol_rank, "regular": result.regular,
           "extension_ranks": [{"k": e.k, "dim_H": e.dim_H, "r": e.r} for e in ext]}
    lines = [f"h_dims: {out['h_dims']}", f"c_seq: {out['c_seq']}",
             f"cartan sum {result.c_sum} vs symbol rank {result.symbol_rank}: "
             + ("regular" if result.regular else f"not regular (deficit {result.deficit})"),
             "extension ranks: " + ", ".join(f"r(E_{e.k}) = {e.r}" for e in ext)]
    _emit(out, args.json, lines)
    return 0


def cmd_restrain(args) -> int:
    F = system(args.system)
    rows = []
    if args.system == "su3":
        R6 = catalog.reflection(6, 3)
        for key, k in (("W5", 3), ("W14", 4), ("W22", 5)):
            v = restraining_check(catalog.get_space(key), F, k, sym=(R6,))
            rows.append({"space": key, "k": k, "dim": v.w_dim, "h_dim": v.h_dim, "meet_dim": v.meet_dim,
                         "complementary": v.complementary, "invariant": all(v.conj_invariant), "ok": v.ok})
    elif args.system == "g2":
        spaces = [polar_h(F, k) for k in range(7)]
        ws = build_g2_restrainers(F, spaces)
        for k, W in zip((4, 5, 6), ws):
            v = restraining_check(W, F, k, sym=(catalog.reflection(7, 4),), h=spaces[k])
            rows.append({"space": f"W_{k}", "k": k, "dim": W.dim, "h_dim": v.h_dim, "meet_dim": v.meet_dim,
                         "complementary": v.complementary, "invariant": all(v.conj_invariant), "ok": v.ok})
    else:
        raise UsageError("restrain supports --system su3 or g2")
    ok = all(r["ok"] for r in rows)
    _emit({"system": args.system, "spaces": rows, "ok": ok}, args.json,
          [json.dumps(r) for r in rows] + [f"all checks: {'pass' if ok else 'fail'}"])
    return 0 if ok else 1


def cmd_comass(args) -> int:
    try:
        a = catalog.get_form(args.form)
    except (catalog.UnknownKey, ValueError) as exc:
        raise UsageError(f"unknown form {args.form!r} ({exc})") from exc
    if isinstance(a, tuple):
        raise UsageError("comass needs a real form; use re_/im_ keys for complex forms")
    p = a.degree if args.p is None else args.p
    if p != a.degree:
        raise UsageError(f"--p {p} does not match the degree {a.degree} of {args.form}")
    cfg = calibnum.ComassConfig(samples=args.samples, iterations=args.iters, seed=_seed(args))
    r = calibnum.comass_estimate(a, p, cfg)
    out = {"form": args.form, "p": p, "estimate": r.estimate, "argmax_frame": r.argmax_frame.to_json(),
           "samples": r.samples, "iterations": r.iterations, "seed": r.seed, "converged": r.converged}
    _emit(out, args.json, [f"comass({args.form}) >= {r.estimate:.15f}",
                           f"samples {r.samples}, iterations {r.iterations}, seed {r.seed}, "
                           f"converged {r.converged}"])
    return 0


def cmd_plane(args) -> int:
    E = calibnum.Frame.from_json(_load_json(args.frame))
    if args.check == "sl":
        v = calibnum.sl_predicate(E, args.tol)
        phase = None if v.phase is None else [v.phase.real, v.phase.imag]
        orient = calibnum.calibrated_orientation(catalog.upsilon0(3)[0], E, args.tol) if v.is_lagrangian else 0
        out = {"is_lagrangian": v.is_lagrangian, "is_special": v.is_special, "phase": phase,
               "calibrated_orientation": orient, "note": v.note,
               "convention": "phase is Upsilon_0(v1, v2, v3) times the frame orientation"}
        _emit(out, True)
        return 0
    try:
        rep = calibnum.normal_iso_family(E, args.tol)
    except calibnum.NotCoassociative as exc:
        _emit({"is_coassociative": False, "reason": str(exc)}, True)
        return 1
    out = {"is_coassociative": True,
           "calibrated_orientation": calibnum.calibrated_orientation(catalog.star_phi0(), E, args.tol),
           "normal_images": [b.tolist() for b in rep.images],
           "self_dual_residual": rep.self_dual_residual, "norms": rep.norms, "rank": rep.rank}
    _emit(out, True)
    return 0


def _triple_from_json(obj) -> models.SDTriple:
    if "forms" in obj:
        forms = [AltForm.from_json(f) for f in obj["forms"]]
        vol = AltForm.from_json(obj["volume"]) if "volume" in obj else None
        return models.SDTriple.from_forms(forms, vol)
    return models.SDTriple.from_json(obj)


def cmd_sdtriple(args) -> int:
    T = _triple_from_json(_load_json(args.input))
    gram = models.sd_gram(T)
    st = models.standardize_sd_triple(T)
    conv = scalar_to_json if st.coframe.dtype == object else float
    _emit({"gram": [[conv(x) for x in row] for row in gram],
           "coframe": [[conv(x) for x in row] for row in st.coframe],
           "residuals": list(st.residuals), "volume_scale": conv(T.phi)}, True)
    return 0


def cmd_g2build(args) -> int:
    T = _triple_from_json(_load_json(args.input))
    G = models.build_g2_structure(T)
    _emit({"phibar": G.phibar.to_json(), "star_phibar": G.star_phibar.to_json()}, True)
    return 0


def cmd_torus(args) -> int:
    raw = _load_json(args.g)
    g = np.array([[_scalar(x) for x in row] for row in raw], dtype=object)
    m = args.m if args.m is not None else len(g)
    if g.shape != (m, m):
        raise UsageError(f"metric is {g.shape[0]}x{g.shape[1]} but --m is {m}")
    r = models.torus_metric_roundtrip(models.TorusMetric(m, g))
    conv = scalar_to_json if r.exact else float
    _emit({"m": m, "h": [[conv(x) for x in row] for row in r.h],
           "g_back": [[conv(x) for x in row] for row in r.g_back],
           "exact": r.exact, "roundtrip_error": r.error(models.TorusMetric(m, g).g),
           "divergence_ok": r.divergence_ok}, True)
    return 0


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("CALIBKIT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"CALIBKIT_SEED must be an integer, got {env!r}") from exc


def cmd_verify(args) -> int:
    report = run_suite(args.suite, seed=_seed(args), full=args.full)
    text = emit_report(report, args.format)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0 if report.passed else 1


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="calibkit", description=__doc__)
    ap.add_argument("--version", action="version", version=f"calibkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dump", help="print a catalog object as JSON")
    p.add_argument("--name", required=True)
    p.set_defaults(func=cmd_dump)

    p = sub.add_parser("stab", help="stabilizer algebra, symbol rank and admissibility")
    p.add_argument("--system", required=True, choices=SYSTEM_NAMES)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stab)

    p = sub.add_parser("polar", help="polar spaces, Cartan's test and extension ranks")
    p.add_argument("--system", required=True, choices=SYSTEM_NAMES)
    p.add_argument("--k", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_polar)

    p = sub.add_parser("restrain", help="restraining spaces and their checks")
    p.add_argument("--system", required=True, choices=("su3", "g2"))
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_restrain)

    p = sub.add_parser("comass", help="estimate the comass of a catalog form")
    p.add_argument("--form", required=True)
    p.add_argument("--p", type=int)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--seed", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_comass)

    p = sub.add_parser("plane", help="special Lagrangian or coassociative plane checks")
    p.add_argument("--check", required=True, choices=("sl", "coassoc"))
    p.add_argument("--frame", required=True, help="frame JSON (file or inline)")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_plane)

    p = sub.add_parser("sdtriple", help="standardize a self-dual triple")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_sdtriple)

    p = sub.add_parser("g2build", help="product G2 forms from a self-dual triple")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_g2build)

    p = sub.add_parser("torus", help="torus metric round trip g -> h -> g")
    p.add_argument("--g", required=True, help="metric as a JSON matrix (file or inline)")
    p.add_argument("--m", type=int)
    p.set_defaults(func=cmd_torus)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", required=True, choices=SUITE_CHOICES)
    p.add_argument("--full", action="store_true", help="include the comass suite in 'all'")
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"calibkit: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"calibkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
