"""
Vector-valued weight 1/2 forms, the index 1 fold/unfold, and the plus-space basis.

A :class:`VectorValuedForm` of index m has components F_r (r mod 2m) with
F_r = sum_D C(D, r) q^{D/4m}, D = r^2 mod 4m.  For m = 1 the fold
F_0(4 tau) + F_1(4 tau) identifies such forms with scalar forms whose
coefficients vanish off exponents 0, 1 mod 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Mapping, Optional

import sympy

from .qseries import (
    PrecisionError,
    QSeries,
    as_rational,
    eta_quotient,
    hauptmodul_t4,
    klein_j,
    theta,
    theta_nullwert,
)


class FormValidationError(ValueError):
    """Input data violates a support or symmetry invariant."""


class UnsupportedIndexError(ValueError):
    pass


class PlusSupportError(FormValidationError):
    pass


class NoSuchBasisElement(ValueError):
    pass


class VectorValuedForm:
    """Components r mod 2|m| of a weight 1/2 form of index m and level N."""

    __slots__ = ("index", "level", "_comp")

    def __init__(self, index: int, components: Mapping[int, QSeries], level: int = 1, check: bool = True):
        if index == 0:
            raise ValueError("index must be nonzero")
        if level < 1:
            raise ValueError("level must be positive")
        self.index = index
        self.level = level
        n = 2 * abs(index)
        comp: dict[int, QSeries] = {}
        for r, s in components.items():
            rr = int(r) % n
            if rr in comp:
                raise FormValidationError(f"component {rr} given twice")
            comp[rr] = s
        trunc = [s.truncation for s in comp.values() if s.truncation is not None]
        T = min(trunc) if trunc else None
        for r in range(n):
            if r not in comp:
                comp[r] = QSeries.zero(T)
        self._comp = comp
        if check:
            self.validate()

    # -- invariants -------------------------------------------------------

    def validate(self) -> None:
        m = self.index
        four_m = 4 * abs(m)
        for r, s in self._comp.items():
            target = Fraction(r * r, 4 * m)
            for e, _ in s.items():
                if (e - target).denominator != 1:
                    raise FormValidationError(
                        f"component {r}: exponent {e} is not congruent to r^2/4m = {target} mod 1")
        sign = 1 if m > 0 else -1
        n = 2 * abs(m)
        for r in range(n):
            a, b = self._comp[r], self._comp[(-r) % n]
            if not a.agrees(b.scale(sign)):
                raise FormValidationError(f"symmetry violated: component {(-r) % n} != sign(m) * component {r}")
        _ = four_m

    # -- access -----------------------------------------------------------

    def component(self, r: int) -> QSeries:
        return self._comp[int(r) % (2 * abs(self.index))]

    __getitem__ = component

    @property
    def components(self) -> dict[int, QSeries]:
        return dict(self._comp)

    @property
    def truncation(self) -> Optional[Fraction]:
        ts = [s.truncation for s in self._comp.values() if s.truncation is not None]
        return min(ts) if ts else None

    def coefficient(self, D: int, r: int):
        """C(D, r): the coefficient of q^{D/4m} in component r (0 if D != r^2 mod 4m)."""
        m = self.index
        if (D - r * r) % (4 * m):
            return 0
        return self.component(r).coeff(Fraction(D, 4 * m))

    def coefficients(self) -> Iterator[tuple[int, int, object]]:
        """All stored (D, r, C(D, r)) with r in 0..2|m|-1."""
        m = self.index
        for r in sorted(self._comp):
            for e, c in self._comp[r].items():
                yield int(e * 4 * m), r, c

    def principal_part(self) -> list[tuple[int, int, object]]:
        return [(D, r, c) for D, r, c in self.coefficients() if D < 0]

    def truncate(self, T) -> "VectorValuedForm":
        return VectorValuedForm(self.index, {r: s.truncate(T) for r, s in self._comp.items()}, self.level, False)

    def scale(self, c) -> "VectorValuedForm":
        return VectorValuedForm(self.index, {r: s.scale(c) for r, s in self._comp.items()}, self.level, False)

    def __add__(self, other: "VectorValuedForm") -> "VectorValuedForm":
        if not isinstance(other, VectorValuedForm):
            return NotImplemented
        if other.index != self.index:
            raise ValueError("index mismatch")
        return VectorValuedForm(self.index, {r: s + other._comp[r] for r, s in self._comp.items()},
                                math.lcm(self.level, other.level), False)

    def __sub__(self, other: "VectorValuedForm") -> "VectorValuedForm":
        return self + other.scale(-1)

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def agrees(self, other: "VectorValuedForm") -> bool:
        return self.index == other.index and all(self._comp[r].agrees(other._comp[r]) for r in self._comp)

    def __eq__(self, other):
        if not isinstance(other, VectorValuedForm):
            return NotImplemented
        return self.index == other.index and self._comp == other._comp

    def __repr__(self):
        body = ", ".join(f"{r}: {s!r}" for r, s in sorted(self._comp.items()))
        return f"VectorValuedForm(m={self.index}, N={self.level}, {{{body}}})"


def theta_nullwert_vector(m: int, prec) -> VectorValuedForm:
    """theta^0_m = (theta^0_{m,r})_r."""
    return VectorValuedForm(m, {r: theta_nullwert(m, r, prec) for r in range(2 * m)})


# ---------------------------------------------------------------------------
# fold / unfold


def kohnen_fold(F: VectorValuedForm) -> QSeries:
    """F_0(4 tau) + F_1(4 tau) for an index 1 form."""
    if F.index != 1:
        raise UnsupportedIndexError(f"fold is only defined for index 1, got {F.index}")
    return F[0].rescale(4) + F[1].rescale(4)


def check_plus_support(f: QSeries) -> None:
    for e, c in f.items():
        if e.denominator != 1:
            raise PlusSupportError(f"non-integral exponent {e}")
        if e % 4 in (2, 3):
            raise PlusSupportError(f"coefficient of q^{e} is {c}, but {e} = {e % 4} mod 4")


def kohnen_unfold(f: QSeries, level: int = 1) -> VectorValuedForm:
    """Inverse of kohnen_fold on plus-space supported series."""
    check_plus_support(f)
    T = f.truncation
    T4 = None if T is None else T / 4
    comps = {0: {}, 1: {}}
    for e, c in f.items():
        comps[int(e % 4)][e / 4] = c
    return VectorValuedForm(1, {r: QSeries(d, T4, 4) for r, d in comps.items()}, level)


# ---------------------------------------------------------------------------
# plus-space basis


@dataclass(frozen=True)
class PlusForm:
    """f_D = q^{-D} + O(q) in the plus space (f_0 = theta)."""

    D: int
    series: QSeries

    def __post_init__(self):
        check_plus_support(self.series)

    def coeff(self, n: int):
        return self.series.coeff(n)

    def unfold(self) -> VectorValuedForm:
        return kohnen_unfold(self.series)


def _solve_rational(rows: list[list], rhs: list) -> list[Fraction]:
    A = sympy.Matrix(rows)
    b = sympy.Matrix(rhs)
    try:
        sol, params = A.gauss_jordan_solve(b)
    except ValueError as exc:
        raise PrecisionError("no solution in the search space") from exc
    if params.shape[0]:
        raise PrecisionError("solution not unique; enlarge the solve window")
    return [as_rational(Fraction(int(x.p), int(x.q))) for x in sol]


def _seed_f3(prec: int, B: int, window: int, retries: int = 3) -> QSeries:
    """f_3 as theta * (polynomial in t4 of degree 3 + polynomial in 1/(t4 + 16))."""
    for _ in range(retries + 1):
        P = max(prec, window) + 1
        th = theta(P + 4)
        t = hauptmodul_t4(P + 3)
        s = eta_quotient([(1, 8), (4, 16), (2, -24)], P)  # 1/(t4 + 16)
        gens = [(th * t ** a).truncate(P) for a in range(4)]
        sb = QSeries({0: 1})
        for _b in range(B):
            sb = (sb * s).truncate(P)
            gens.append((th * sb).truncate(P))
        rows, rhs = [], []
        for e in range(-3, window):
            if e <= 0 or e % 4 in (2, 3):
                rows.append([g.coeff(e) for g in gens])
                rhs.append(1 if e == -3 else 0)
        try:
            x = _solve_rational(rows, rhs)
        except PrecisionError:
            B, window = B + 2, window * 2
            continue
        f = QSeries.zero(P)
        for g, c in zip(gens, x):
            if c:
                f = f + g.scale(c)
        f = f.truncate(prec)
        try:
            check_plus_support(f)
        except PlusSupportError:
            B, window = B + 2, window * 2
            continue
        return f
    raise PrecisionError("plus-space solve did not verify; increase prec")


@lru_cache(maxsize=32)
def _plus_basis(dmax: int, prec: int) -> tuple[PlusForm, ...]:
    steps = dmax // 4 + 1
    P = prec + 4 * steps + dmax + 4
    B = math.ceil(dmax / 4) + 2
    window = 4 * dmax + 40
    basis: dict[int, QSeries] = {0: theta(P)}
    if dmax >= 3:
        basis[3] = _seed_f3(P, B, window)
    j4 = klein_j(Fraction(P + dmax + 8, 4) + 1).rescale(4)
    for D in range(4, dmax + 1):
        if D % 4 not in (0, 3):
            continue
        g = basis[D - 4] * j4
        for e, c in list(g.items()):
            if e > 0:
                break
            if e == -D:
                continue
            g = g - basis[int(-e)].scale(c)
        basis[D] = g
    out = []
    for D in sorted(basis):
        f = basis[D].truncate(prec)
        check_plus_support(f)
        items = list(f.items())
        if not items or items[0] != (Fraction(-D), 1):
            raise PrecisionError(f"leading term of f_{D} is not q^-{D}")
        if D > 0 and any(e <= 0 and e != -D for e, _ in items):
            raise PrecisionError(f"echelon shape of f_{D} not verified")
        out.append(PlusForm(D, f))
    return tuple(out)


def plus_basis(dmax: int, prec: int) -> list[PlusForm]:
    """The echelon family f_D, D = 0, 3 mod 4, D <= dmax, known below q^prec."""
    if dmax < 0:
        raise ValueError("dmax must be nonnegative")
    if prec < 1:
        raise PrecisionError("prec must be at least 1")
    return list(_plus_basis(int(dmax), int(prec)))


def plus_basis_element(D: int, prec: int) -> PlusForm:
    if D < 0 or D % 4 not in (0, 3):
        raise NoSuchBasisElement(f"no basis element f_{D}: need D >= 0 and D = 0, 3 mod 4")
    return plus_basis(D, prec)[-1]


def f0(prec: int) -> QSeries:
    """f_0 = q^{-3} - 248 q + 26752 q^4 - ... (the basis element f_3)."""
    return plus_basis_element(3, prec).series


def zagier_F2(prec) -> VectorValuedForm:
    """The index 1 form with principal part q^{-3/4} in component 1 (unfold of f_0)."""
    return kohnen_unfold(f0(4 * math.ceil(Fraction(prec)) + 4)).truncate(prec)
