"""Infinitesimal stabilizers of form systems and the symbol rank at flat points."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from . import catalog
from .exactcore import Mat, Subspace, bracket, nullspace_of_rows, rank_nullspace
from .exterior import AltForm, inf_action, wedge


@dataclass(frozen=True)
class FormSystem:
    dim: int
    generators: tuple[AltForm, ...]
    name: str = ""

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ValueError("a form system needs at least one generator")
        if any(g.dim != self.dim for g in gens):
            raise ValueError("all generators must share the system dimension")
        object.__setattr__(self, "generators", gens)


SYSTEM_NAMES = ("su3", "su3-star", "g2", "g2-phi", "sp2sp1", "omega-only")


def system(name: str) -> FormSystem:
    """Catalog form systems by name."""
    if name == "su3":
        re, im = catalog.upsilon0(3)
        return FormSystem(6, (catalog.omega0(3), re, im), name)
    if name == "su3-star":
        re, im = catalog.upsilon_star(3)
        return FormSystem(6, (catalog.omega_star(3), re, im), name)
    if name == "g2":
        return FormSystem(7, (catalog.phi0(), catalog.star_phi0()), name)
    if name == "g2-phi":
        return FormSystem(7, (catalog.phi0(),), name)
    if name == "sp2sp1":
        return FormSystem(8, (catalog.kraines(),), name)
    if name == "omega-only":
        return FormSystem(6, (catalog.omega0(3),), name)
    raise KeyError(f"unknown system {name!r}; expected one of {', '.join(SYSTEM_NAMES)}")


def _units(n: int) -> list[Mat]:
    return [Mat.unit(n, i, j) for i in range(n) for j in range(n)]


def action_rows(F: FormSystem, transform=None) -> list[list[Fraction]]:
    """Rows of the linear map x -> (transform(x . a))_a on flattened M_n.

    ``transform`` post-processes each action image (e.g. a restriction); it
    must be linear.
    """
    n = F.dim
    units = _units(n)
    rows = []
    for a in F.generators:
        images = []
        for u in units:
            img = inf_action(u, a)
            images.append(transform(img) if transform else img)
        keys = sorted({k for img in images for k in img.terms})
        for k in keys:
            rows.append([img.terms.get(k, Fraction(0)) for img in images])
    return rows


def stab_algebra(F: FormSystem) -> Subspace:
    """{x in M_n : x . a = 0 for every generator a}."""
    return nullspace_of_rows(action_rows(F), F.dim * F.dim)


def is_bracket_closed(space: Subspace) -> bool:
    mats = space.matrices()
    for i, x in enumerate(mats):
        for y in mats[i + 1:]:
            if not space.contains(bracket(x, y).flat()):
                return False
    return True


def is_skew(space: Subspace) -> bool:
    return all((x + x.T).is_zero() for x in space.matrices())


# -- symbol map ----------------------------------------------------------
# Φ(X) = sum_k dx^k ∧ (X(e_k) . a) for X in Hom(R^n, M_n); column (k, i, j)
# is the X with X(e_k) = E_ij and X(e_l) = 0 otherwise.

def _symbol_column_chunk(args) -> list[dict]:
    F, cols = args
    n = F.dim
    out = []
    for (k, i, j) in cols:
        x = Mat.unit(n, i, j)
        dxk = AltForm.dx(n, k + 1)
        col = {}
        for g, a in enumerate(F.generators):
            img = wedge(dxk, inf_action(x, a))
            for idx, c in img.terms.items():
                col[(g, idx)] = c
        out.append(col)
    return out


def symbol_columns(F: FormSystem, workers: int = 1, chunks: int | None = None) -> list[dict]:
    """Columns of Φ as sparse dicts keyed by (generator, index tuple).

    The column set is partitioned into ``chunks`` pieces, assembled with
    ``workers`` processes; the result does not depend on either.
    """
    n = F.dim
    cols = [(k, i, j) for k in range(n) for i in range(n) for j in range(n)]
    chunks = chunks or max(1, workers)
    size = -(-len(cols) // chunks)
    parts = [(F, cols[s:s + size]) for s in range(0, len(cols), size)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pieces = list(pool.map(_symbol_column_chunk, parts))
    else:
        pieces = [_symbol_column_chunk(p) for p in parts]
    return [c for piece in pieces for c in piece]


def symbol_matrix(F: FormSystem, workers: int = 1, chunks: int | None = None) -> list[list[Fraction]]:
    cols = symbol_columns(F, workers, chunks)
    keys = []
    for g, a in enumerate(F.generators):
        keys.extend((g, idx) for idx in combinations(range(1, F.dim + 1), a.degree + 1))
    rows = [[c.get(key, Fraction(0)) for c in cols] for key in keys]
    return [r for r in rows if any(r)]


def symbol_rank(F: FormSystem, workers: int = 1) -> int:
    rows = symbol_matrix(F, workers)
    return rank_nullspace(rows)[0] if rows else 0


def symbol_apply(F: FormSystem, X: Sequence[Mat]) -> list[AltForm]:
    """Φ(X) generator by generator, for X given as the list (X(e_1), ..., X(e_n))."""
    n = F.dim
    out = []
    for a in F.generators:
        total = AltForm.zero(n, min(a.degree + 1, n))
        for k, xk in enumerate(X):
            total = total + wedge(AltForm.dx(n, k + 1), inf_action(xk, a))
        out.append(total)
    return out


@dataclass(frozen=True)
class AdmissibilityVerdict:
    system: str
    n: int
    g_dim: int
    symbol_rank: int
    expected_rank: int          # n (n(n-1)/2 - dim g)
    kernel_dim: int
    expected_kernel_dim: int    # n dim g + n^2 (n+1)/2
    strongly_admissible: bool

    @property
    def kernel_matches(self) -> bool:
        return self.kernel_dim == self.expected_kernel_dim


class NotOrthogonal(ValueError):
    """The stabilizer algebra is not contained in so(n)."""


def strong_admissibility(F: FormSystem, g: Subspace | None = None, rank: int | None = None) -> AdmissibilityVerdict:
    g = stab_algebra(F) if g is None else g
    if not is_skew(g):
        raise NotOrthogonal(f"stabilizer of {F.name or 'system'} is not contained in so({F.dim})")
    n = F.dim
    rank = symbol_rank(F) if rank is None else rank
    expected = n * (n * (n - 1) // 2 - g.dim)
    return AdmissibilityVerdict(
        system=F.name, n=n, g_dim=g.dim, symbol_rank=rank, expected_rank=expected,
        kernel_dim=n ** 3 - rank,
        expected_kernel_dim=n * g.dim + n * n * (n + 1) // 2,
        strongly_admissible=(rank == expected),
    )
