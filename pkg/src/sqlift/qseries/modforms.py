"""Eta quotients, theta-nullwerte and the classical level 1 / level 4 forms."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from sympy import divisor_sigma

from .series import EmptySeriesError, Exponent, QSeries, power_product


def _spec(spec: Iterable[tuple]) -> list[tuple[Fraction, int]]:
    out = []
    for s, e in spec:
        s = Fraction(s)
        if s <= 0:
            raise ValueError("eta scales must be positive")
        if int(e) != e:
            raise ValueError("eta exponents must be integers")
        out.append((s, int(e)))
    return out


def eta_quotient(spec: Iterable[tuple], prec: Exponent) -> QSeries:
    """prod_k eta(s_k tau)^{e_k}, known below q^prec.

    Each factor is q^{s/24} prod_{n>0} (1 - q^{sn}); scales may be rational.
    """
    spec = _spec(spec)
    prec = Fraction(prec)
    lead = sum((s * e for s, e in spec), Fraction(0)) / 24
    if prec <= lead:
        raise EmptySeriesError(f"prec {prec} does not exceed the leading exponent {lead}")
    L = 1
    for s, _ in spec:
        L = math.lcm(L, s.denominator)
    M = math.lcm(lead.denominator, L)  # exponents are lead + k/L
    n_units = math.ceil((prec - lead) * L)
    exps: dict[int, int] = {}
    for s, e in spec:
        w = int(s * L)
        for k in range(w, n_units, w):
            exps[k] = exps.get(k, 0) + e
    P = power_product(exps, n_units)
    return QSeries({lead + Fraction(k, L): c for k, c in enumerate(P) if c}, prec, M)


def theta_nullwert(m: int, r: int, prec: Exponent) -> QSeries:
    """sum_{s = r mod 2m} q^{s^2/4m}."""
    if m <= 0:
        raise ValueError("theta-nullwert needs positive index")
    prec = Fraction(prec)
    terms: dict[Fraction, int] = {}
    bound = math.isqrt(max(int(4 * m * prec), 0)) + 2 * m + 1
    r0 = r % (2 * m)
    for s in range(r0 - 2 * m * (bound // (2 * m) + 1), bound + 1, 2 * m):
        e = Fraction(s * s, 4 * m)
        if e < prec:
            terms[e] = terms.get(e, 0) + 1
    return QSeries(terms, prec, 4 * m)


def theta(prec: Exponent) -> QSeries:
    """theta(tau) = sum_n q^{n^2} (the r = 0 theta-nullwert of index 1)."""
    return theta_nullwert(1, 0, prec)


@lru_cache(maxsize=32)
def _eisenstein(k: int, prec: int) -> QSeries:
    const = {4: 240, 6: -504}[k]
    terms = {0: 1}
    for n in range(1, prec):
        terms[n] = const * int(divisor_sigma(n, k - 1))
    return QSeries(terms, prec)


def eisenstein_E4(prec: int) -> QSeries:
    return _eisenstein(4, int(prec))


def eisenstein_E6(prec: int) -> QSeries:
    return _eisenstein(6, int(prec))


def delta(prec: Exponent) -> QSeries:
    return eta_quotient([(1, 24)], prec)


@lru_cache(maxsize=32)
def _klein_j(prec: int) -> QSeries:
    inv_delta = delta(prec + 3).inverse()  # known below prec + 1
    return (eisenstein_E4(prec + 2) ** 3 * inv_delta).truncate(prec)


def klein_j(prec: Exponent) -> QSeries:
    """j = E4^3/Delta = q^-1 + 744 + 196884 q + ..., known below q^prec."""
    p = math.ceil(Fraction(prec))
    return _klein_j(p).truncate(prec)


def klein_j_via_E6(prec: Exponent) -> QSeries:
    """Independent route j = E6^2/Delta + 1728."""
    p = math.ceil(Fraction(prec))
    inv_delta = delta(p + 3).inverse()
    return (eisenstein_E6(p + 2) ** 2 * inv_delta + 1728).truncate(prec)


def capital_J(prec: Exponent) -> QSeries:
    """J = j - 744."""
    return klein_j(prec) - 744


def hauptmodul_t4(prec: Exponent) -> QSeries:
    """t4 = eta(tau)^8/eta(4 tau)^8, a Hauptmodul for Gamma0(4)."""
    return eta_quotient([(1, 8), (4, -8)], prec)
