"""Constant-coefficient exterior algebra on R^n with exact coefficients.

Forms are sparse: a map from strictly increasing 1-based index tuples to
nonzero rationals.  ``dx^I`` evaluated on ``(e_I1, ..., e_Ip)`` is 1.

The pullback convention is ``(A* a)(v_1, ..., v_p) = a(A v_1, ..., A v_p)`` and
the infinitesimal action is its derivative along ``exp(t x)`` at ``t = 0``::

    (x . a)(v_1, ..., v_p) = sum_i a(v_1, ..., x v_i, ..., v_p)

With this sign ``x -> x . (-)`` is an anti-homomorphism of Lie algebras:
``[x, y] . a = -(x . (y . a) - y . (x . a))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Iterable, Mapping, Sequence

from .exactcore import Mat, rref, scalar_from_json, scalar_to_json, to_scalar

Vec = tuple  # tuple of Fractions; length is the ambient dimension


def basis_vector(n: int, i: int) -> Vec:
    """The standard basis vector e_i (1-based)."""
    return tuple(Fraction(int(k == i - 1)) for k in range(n))


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``idx`` and the sorted tuple; 0 on repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign, tuple(sorted(idx))


@dataclass(frozen=True)
class AltForm:
    dim: int
    degree: int
    terms: Mapping[tuple[int, ...], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.degree <= self.dim:
            raise ValueError(f"degree {self.degree} outside [0, {self.dim}]")
        clean = {}
        for idx, c in self.terms.items():
            idx = tuple(idx)
            if len(idx) != self.degree:
                raise ValueError(f"index tuple {idx} does not have length {self.degree}")
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index tuple {idx} is not strictly increasing")
            if idx and not (1 <= idx[0] and idx[-1] <= self.dim):
                raise ValueError(f"index tuple {idx} out of range for dimension {self.dim}")
            c = to_scalar(c)
            if c:
                clean[idx] = c
        object.__setattr__(self, "terms", clean)

    # construction ---------------------------------------------------------

    @classmethod
    def from_terms(cls, dim: int, degree: int, terms: Iterable[tuple[Sequence[int], object]]) -> "AltForm":
        """Build from possibly unsorted index tuples, e.g. ``((4, 2), 1)`` means ``-dx^24``."""
        acc: dict[tuple[int, ...], Fraction] = {}
        for idx, c in terms:
            sign, key = _sort_sign(idx)
            if sign:
                acc[key] = acc.get(key, Fraction(0)) + sign * to_scalar(c)
        return cls(dim, degree, acc)

    @classmethod
    def dx(cls, dim: int, *idx: int) -> "AltForm":
        return cls.from_terms(dim, len(idx), [(idx, 1)])

    @classmethod
    def zero(cls, dim: int, degree: int) -> "AltForm":
        return cls(dim, degree, {})

    @classmethod
    def constant(cls, dim: int, c=1) -> "AltForm":
        return cls(dim, 0, {(): c})

    @classmethod
    def volume(cls, dim: int) -> "AltForm":
        return cls(dim, dim, {tuple(range(1, dim + 1)): 1})

    # arithmetic -----------------------------------------------------------

    def _compatible(self, other: "AltForm") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if self.degree != other.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "AltForm") -> "AltForm":
        self._compatible(other)
        acc = dict(self.terms)
        for k, v in other.terms.items():
            acc[k] = acc.get(k, Fraction(0)) + v
        return AltForm(self.dim, self.degree, acc)

    def __neg__(self) -> "AltForm":
        return AltForm(self.dim, self.degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "AltForm") -> "AltForm":
        return self + (-other)

    def scale(self, c) -> "AltForm":
        c = to_scalar(c)
        return AltForm(self.dim, self.degree, {k: c * v for k, v in self.terms.items()})

    def __rmul__(self, c) -> "AltForm":
        return self.scale(c)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, idx: Sequence[int]) -> Fraction:
        sign, key = _sort_sign(idx)
        return sign * self.terms.get(key, Fraction(0))

    def coefficient_vector(self) -> list[Fraction]:
        """Coefficients in lexicographic order of increasing index tuples."""
        return [self.terms.get(idx, Fraction(0))
                for idx in combinations(range(1, self.dim + 1), self.degree)]

    def __repr__(self) -> str:
        if not self.terms:
            return f"AltForm(dim={self.dim}, degree={self.degree}, 0)"
        parts = []
        for idx in sorted(self.terms):
            c = self.terms[idx]
            name = "dx^" + "".join(map(str, idx)) if idx else "1"
            parts.append(f"{c}*{name}")
        return f"AltForm(dim={self.dim}: " + " + ".join(parts) + ")"

    # json -----------------------------------------------------------------

    def to_json(self) -> dict:
        return {"dim": self.dim, "degree": self.degree,
                "terms": [{"idx": list(k), "coef": scalar_to_json(self.terms[k])}
                          for k in sorted(self.terms)]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "AltForm":
        return cls(obj["dim"], obj["degree"],
                   {tuple(t["idx"]): scalar_from_json(t["coef"]) for t in obj["terms"]})


def _check_dims(a: AltForm, b: AltForm) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


def wedge(a: AltForm, b: AltForm) -> AltForm:
    _check_dims(a, b)
    deg = a.degree + b.degree
    if deg > a.dim:
        return AltForm.zero(a.dim, a.dim)
    acc: dict[tuple[int, ...], Fraction] = {}
    for i, c in a.terms.items():
        for j, d in b.terms.items():
            sign, key = _sort_sign(i + j)
            if sign:
                acc[key] = acc.get(key, Fraction(0)) + sign * c * d
    return AltForm(a.dim, deg, acc)


def wedge_all(forms: Sequence[AltForm]) -> AltForm:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def interior(v: Sequence, a: AltForm) -> AltForm:
    """Contraction v ⌟ a into the first slot."""
    if len(v) != a.dim:
        raise ValueError(f"vector of length {len(v)} against form of dimension {a.dim}")
    if a.degree == 0:
        return AltForm.zero(a.dim, 0)
    v = [to_scalar(x) for x in v]
    acc: dict[tuple[int, ...], Fraction] = {}
    for idx, c in a.terms.items():
        for s, i in enumerate(idx):
            if v[i - 1]:
                key = idx[:s] + idx[s + 1:]
                acc[key] = acc.get(key, Fraction(0)) + (-1) ** s * v[i - 1] * c
    return AltForm(a.dim, a.degree - 1, acc)


def _det(m: list[list[Fraction]]) -> Fraction:
    n = len(m)
    if n == 0:
        return Fraction(1)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    m = [list(r) for r in m]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        p = m[c][c]
        det *= p
        for r in range(c + 1, n):
            if m[r][c]:
                f = m[r][c] / p
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return det


def pullback(A: Mat, a: AltForm) -> AltForm:
    """A* a, where (A* a)(v_1..v_p) = a(A v_1, ..., A v_p)."""
    if A.rows != a.dim or A.cols != a.dim:
        raise ValueError(f"matrix {A.rows}x{A.cols} against form of dimension {a.dim}")
    p = a.degree
    if p == 0:
        return a
    acc: dict[tuple[int, ...], Fraction] = {}
    for cols in combinations(range(a.dim), p):
        total = Fraction(0)
        for idx, c in a.terms.items():
            minor = [[A.entries[i - 1][j] for j in cols] for i in idx]
            d = _det(minor)
            if d:
                total += c * d
        if total:
            acc[tuple(j + 1 for j in cols)] = total
    return AltForm(a.dim, p, acc)


def hodge(a: AltForm) -> AltForm:
    """Hodge star for the Euclidean metric with dx^1 ∧ ... ∧ dx^n positive."""
    n = a.dim
    full = set(range(1, n + 1))
    acc = {}
    for idx, c in a.terms.items():
        comp = tuple(sorted(full - set(idx)))
        sign, _ = _sort_sign(idx + comp)
        acc[comp] = sign * c
    return AltForm(n, n - a.degree, acc)


def restrict(a: AltForm, k: int) -> AltForm:
    """Pullback to R^k along the inclusion of the first k coordinates."""
    if not 0 <= k <= a.dim:
        raise ValueError(f"cannot restrict a form on R^{a.dim} to R^{k}")
    if a.degree > k:
        return AltForm.zero(k, k)
    return AltForm(k, a.degree, {i: c for i, c in a.terms.items() if not i or i[-1] <= k})


def inf_action(x: Mat, a: AltForm) -> AltForm:
    """Derivative at t=0 of pullback(exp(t x), a)."""
    n = a.dim
    if x.rows != n or x.cols != n:
        raise ValueError(f"matrix {x.rows}x{x.cols} against form of dimension {n}")
    acc: dict[tuple[int, ...], Fraction] = {}
    # x . dx^k = sum_j x[k][j] dx^j, extended as a derivation
    for idx, c in a.terms.items():
        for s, k in enumerate(idx):
            row = x.entries[k - 1]
            for j in range(1, n + 1):
                xkj = row[j - 1]
                if not xkj:
                    continue
                sign, key = _sort_sign(idx[:s] + (j,) + idx[s + 1:])
                if sign:
                    acc[key] = acc.get(key, Fraction(0)) + sign * xkj * c
    return AltForm(n, a.degree, acc)


def evaluate(a: AltForm, vs: Sequence[Sequence]) -> Fraction:
    """Multilinear evaluation a(v_1, ..., v_p)."""
    if len(vs) != a.degree:
        raise ValueError(f"form of degree {a.degree} evaluated on {len(vs)} vectors")
    for v in vs:
        if len(v) != a.dim:
            raise ValueError("vector length does not match form dimension")
    vs = [[to_scalar(x) for x in v] for v in vs]
    total = Fraction(0)
    for idx, c in a.terms.items():
        total += c * _det([[v[i - 1] for v in vs] for i in idx])
    return total


def brute_force_evaluate(a: AltForm, vs: Sequence[Sequence]) -> Fraction:
    """Evaluation by summing over permutations; slow, used as an oracle."""
    total = Fraction(0)
    for idx, c in a.terms.items():
        for perm in permutations(range(len(idx))):
            sign, _ = _sort_sign(perm)
            prod = Fraction(sign)
            for slot, k in enumerate(perm):
                prod *= to_scalar(vs[slot][idx[k] - 1])
                if not prod:
                    break
            total += c * prod
    return total


def forms_span_rank(forms: Sequence[AltForm]) -> int:
    rows = [f.coefficient_vector() for f in forms]
    return len(rref(rows)[0]) if rows else 0
