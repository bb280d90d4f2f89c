"""Polar spaces of the canonical flag, Cartan's test, and restraining subspaces."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .exactcore import (Mat, Subspace, bracket_invariant, conj_invariant, meet_join,
                        nullspace_of_rows, ortho_complement)
from .exterior import restrict
from .stabilizer import FormSystem, stab_algebra, symbol_rank


@dataclass(frozen=True)
class PolarProfile:
    n: int
    h_dims: tuple[int, ...]
    c_seq: tuple[int, ...]
    g_dim: int

    @property
    def cartan_sum(self) -> int:
        """c_0 + ... + c_(n-1)."""
        return sum(self.c_seq[:-1])


def polar_h(F: FormSystem, k: int) -> Subspace:
    """h_k = {x : the restriction of x . a to R^k vanishes for every generator a}."""
    n = F.dim
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside [0, {n}]")
    from .stabilizer import action_rows
    rows = action_rows(F, transform=lambda form: restrict(form, k))
    return nullspace_of_rows(rows, n * n)


def polar_spaces(F: FormSystem) -> list[Subspace]:
    return [polar_h(F, k) for k in range(F.dim + 1)]


def polar_profile(F: FormSystem, spaces: Sequence[Subspace] | None = None) -> PolarProfile:
    spaces = polar_spaces(F) if spaces is None else spaces
    n = F.dim
    h = tuple(s.dim for s in spaces)
    return PolarProfile(n=n, h_dims=h, c_seq=tuple(n * n - d for d in h),
                        g_dim=stab_algebra(F).dim)


@dataclass(frozen=True)
class CartanResult:
    profile: PolarProfile
    symbol_rank: int

    @property
    def c_sum(self) -> int:
        return self.profile.cartan_sum

    @property
    def regular(self) -> bool:
        """Cartan's test holds with equality: the presentation is regular."""
        return self.c_sum == self.symbol_rank

    @property
    def deficit(self) -> int:
        return self.symbol_rank - self.c_sum


def cartan_test(F: FormSystem, profile: PolarProfile | None = None, rank: int | None = None) -> CartanResult:
    profile = polar_profile(F) if profile is None else profile
    rank = symbol_rank(F) if rank is None else rank
    return CartanResult(profile, rank)


@dataclass(frozen=True)
class ExtensionRank:
    k: int
    dim_S: int
    dim_H: int
    r: int


def extension_rank_S(F: FormSystem, k: int, profile: PolarProfile | None = None) -> ExtensionRank:
    """Extension rank of the k-th canonical-flag element on S = F/G."""
    n = F.dim
    if not 0 <= k < n:
        raise ValueError(f"k={k} outside [0, {n})")
    profile = polar_profile(F) if profile is None else profile
    dim_S = n + n * n - profile.g_dim
    dim_H = dim_S - profile.c_seq[k]
    return ExtensionRank(k=k, dim_S=dim_S, dim_H=dim_H, r=dim_H - k - 1)


@dataclass(frozen=True)
class RestrainingVerdict:
    k: int
    w_dim: int
    h_dim: int
    ambient: int
    meet_dim: int
    conj_invariant: tuple[bool, ...] = ()
    bracket_invariant: bool = True

    @property
    def transverse(self) -> bool:
        return self.meet_dim == 0

    @property
    def complementary(self) -> bool:
        return self.w_dim + self.h_dim == self.ambient

    @property
    def ok(self) -> bool:
        return self.transverse and self.complementary and all(self.conj_invariant) and self.bracket_invariant


def restraining_check(W: Subspace, F: FormSystem, k: int, sym: Sequence[Mat] = (),
                      sym_algebra: Sequence[Mat] = (), h: Subspace | None = None) -> RestrainingVerdict:
    """Check W against h_k: zero meet, complementary dimension, and invariance.

    ``sym`` are group elements (conjugation invariance); ``sym_algebra`` are
    Lie algebra elements (bracket invariance).
    """
    h = polar_h(F, k) if h is None else h
    meet, _ = meet_join(W, h)
    return RestrainingVerdict(
        k=k, w_dim=W.dim, h_dim=h.dim, ambient=F.dim * F.dim, meet_dim=meet.dim,
        conj_invariant=tuple(conj_invariant(W, g) for g in sym),
        bracket_invariant=bracket_invariant(W, sym_algebra),
    )


class InvarianceFailure(RuntimeError):
    pass


def g2_fiber_algebra() -> Subspace:
    """The su(2) inside g2 fixing phi0, dx^5, dx^6 and dx^7."""
    from . import catalog
    from .exterior import AltForm
    F = FormSystem(7, (catalog.phi0(),) + tuple(AltForm.dx(7, i) for i in (5, 6, 7)))
    return stab_algebra(F)


def build_g2_restrainers(F: FormSystem, spaces: Sequence[Subspace] | None = None) -> tuple[Subspace, Subspace, Subspace]:
    """Trace-orthogonal complements of h_4, h_5, h_6 for the G2 system."""
    from .catalog import reflection
    if F.dim != 7:
        raise ValueError("build_g2_restrainers needs the G2 system on R^7")
    spaces = spaces or [polar_h(F, k) for k in range(7)]
    ws = tuple(ortho_complement(spaces[k]) for k in (4, 5, 6))
    R7 = reflection(7, 4)
    su2 = g2_fiber_algebra().matrices()
    for k, W in zip((4, 5, 6), ws):
        if not conj_invariant(W, R7):
            raise InvarianceFailure(f"complement of h_{k} is not R-invariant")
        if not bracket_invariant(W, su2):
            raise InvarianceFailure(f"complement of h_{k} is not su(2)-invariant")
    if not (ws[0] <= ws[1] <= ws[2]):
        raise InvarianceFailure("restraining spaces are not nested")
    return ws
