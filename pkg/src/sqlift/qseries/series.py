"""
Truncated Laurent series in q with exponents in a lattice (1/M)Z.

A :class:`QSeries` stores a sparse table of nonzero coefficients together
with a truncation order T: every exponent below T is known exactly, the
coefficients at exponents >= T are unknown.  ``truncation=None`` marks an
exact finite expression (a Laurent polynomial).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

from .numbers import (
    CyclotomicElement,
    DomainError,
    QuadraticElement,
    RationalLike,
    as_rational,
    is_zero,
    normalize,
    root_of_unity,
)

Exponent = Union[int, Fraction]


class PrecisionError(ValueError):
    """A computation needs more terms than the inputs provide."""


class EmptySeriesError(PrecisionError):
    """The requested truncation leaves no known coefficients."""


def _frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def _min_trunc(*ts: Optional[Fraction]) -> Optional[Fraction]:
    known = [t for t in ts if t is not None]
    return min(known) if known else None


def _add_trunc(t: Optional[Fraction], v: Fraction) -> Optional[Fraction]:
    return None if t is None else t + v


class QSeries:
    """Sparse truncated Laurent series  sum_e c_e q^e  with e in (1/M)Z."""

    __slots__ = ("_M", "_c", "_T")

    def __init__(
        self,
        terms: Mapping[Exponent, object] | Iterable[tuple[Exponent, object]] = (),
        truncation: Optional[Exponent] = None,
        denom: int = 1,
    ):
        items = terms.items() if isinstance(terms, Mapping) else terms
        T = None if truncation is None else _frac(truncation)
        parsed: list[tuple[Fraction, object]] = []
        M = int(denom)
        if M < 1:
            raise ValueError("denominator lattice must be positive")
        for e, c in items:
            if type(e) is not int:
                e = _frac(e)
                M = math.lcm(M, e.denominator)
            parsed.append((e, c))
        lim = None if T is None else math.ceil(T * M)
        coeffs: dict[int, object] = {}
        for e, c in parsed:
            k = e * M if type(e) is int else int(e * M)
            if lim is not None and k >= lim:
                continue
            prev = coeffs.get(k)
            coeffs[k] = c if prev is None else prev + c
        self._M = M
        self._c = {k: (c if type(c) is int else normalize(c)) for k, c in coeffs.items()
                   if (c != 0 if type(c) is int else not is_zero(c))}
        self._T = T

    @classmethod
    def _make(cls, M: int, coeffs: dict[int, object], T: Optional[Fraction]) -> "QSeries":
        obj = object.__new__(cls)
        obj._M = M
        lim = None if T is None else math.ceil(T * M)
        obj._c = {k: (c if type(c) is int else normalize(c)) for k, c in coeffs.items()
                  if (lim is None or k < lim) and (c != 0 if type(c) is int else not is_zero(c))}
        obj._T = T
        return obj

    @classmethod
    def monomial(cls, e: Exponent = 0, c: object = 1, truncation: Optional[Exponent] = None) -> "QSeries":
        return cls({e: c}, truncation)

    @classmethod
    def zero(cls, truncation: Optional[Exponent] = None) -> "QSeries":
        return cls({}, truncation)

    # -- accessors --------------------------------------------------------

    @property
    def denom_lattice(self) -> int:
        return self._M

    @property
    def truncation(self) -> Optional[Fraction]:
        return self._T

    def __len__(self) -> int:
        return len(self._c)

    def items(self) -> Iterator[tuple[Fraction, object]]:
        """Nonzero terms (exponent, coefficient) in increasing exponent order."""
        M = self._M
        for k in sorted(self._c):
            yield Fraction(k, M), self._c[k]

    def exponents(self) -> list[Fraction]:
        return [e for e, _ in self.items()]

    def coeff(self, e: Exponent):
        """Coefficient of q^e; raises PrecisionError beyond the truncation."""
        e = _frac(e)
        if self._T is not None and e >= self._T:
            raise PrecisionError(f"coefficient of q^{e} is beyond the truncation order {self._T}")
        k = e * self._M
        if k.denominator != 1:
            return 0
        return self._c.get(int(k), 0)

    __getitem__ = coeff

    def is_zero(self) -> bool:
        return not self._c

    def valuation(self) -> Optional[Fraction]:
        if not self._c:
            return None
        return Fraction(min(self._c), self._M)

    def leading_coefficient(self):
        if not self._c:
            raise PrecisionError("zero series has no leading coefficient")
        return self._c[min(self._c)]

    def coefficient_domain(self) -> str:
        kinds = {type(c).__name__ for c in self._c.values()}
        if "CyclotomicElement" in kinds:
            return "cyclotomic"
        if "QuadraticElement" in kinds:
            return "quadratic"
        return "rational"

    def with_lattice(self, M: int) -> "QSeries":
        """Re-key over (1/M)Z; M must be a multiple of the current lattice."""
        if M == self._M:
            return self
        if M % self._M:
            raise ValueError(f"lattice {M} is not a multiple of {self._M}")
        f = M // self._M
        out = object.__new__(QSeries)
        out._M = M
        out._c = {k * f: c for k, c in self._c.items()}
        out._T = self._T
        return out

    def compact(self) -> "QSeries":
        """The same series over the smallest lattice containing its exponents."""
        g = self._M
        for k in self._c:
            g = math.gcd(g, k)
            if g == 1:
                return self
        if g <= 1:
            return self
        out = object.__new__(QSeries)
        out._M = self._M // g
        out._c = {k // g: c for k, c in self._c.items()}
        out._T = self._T
        return out

    # -- arithmetic -------------------------------------------------------

    @staticmethod
    def _common(a: "QSeries", b: "QSeries") -> tuple["QSeries", "QSeries", int]:
        M = math.lcm(a._M, b._M)
        return a.with_lattice(M), b.with_lattice(M), M

    def _coerce(self, other) -> "QSeries":
        if isinstance(other, QSeries):
            return other
        if isinstance(other, (int, Fraction, CyclotomicElement, QuadraticElement)):
            return QSeries({0: other})
        raise DomainError(f"cannot combine QSeries with {type(other).__name__}")

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except DomainError:
            return NotImplemented
        a, b, M = QSeries._common(self, other)
        out = dict(a._c)
        for k, c in b._c.items():
            out[k] = out[k] + c if k in out else c
        return QSeries._make(M, out, _min_trunc(a._T, b._T))

    __radd__ = __add__

    def __neg__(self):
        return QSeries._make(self._M, {k: -c for k, c in self._c.items()}, self._T)

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except DomainError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "QSeries":
        if is_zero(c):
            return QSeries._make(self._M, {}, self._T)
        return QSeries._make(self._M, {k: v * c for k, v in self._c.items()}, self._T)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CyclotomicElement, QuadraticElement)):
            return self.scale(other)
        if not isinstance(other, QSeries):
            return NotImplemented
        return series_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, CyclotomicElement, QuadraticElement)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        if isinstance(other, (CyclotomicElement, QuadraticElement)):
            return self.scale(other.inverse())
        if isinstance(other, QSeries):
            return series_mul(self, other.inverse())
        return NotImplemented

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QSeries({0: 1})
        base = self
        while n:
            if n & 1:
                result = series_mul(result, base)
            n >>= 1
            if n:
                base = series_mul(base, base)
        return result

    def shift(self, e: Exponent) -> "QSeries":
        """Multiply by q^e."""
        e = _frac(e)
        M = math.lcm(self._M, e.denominator)
        a = self.with_lattice(M)
        s = int(e * M)
        return QSeries._make(M, {k + s: c for k, c in a._c.items()}, _add_trunc(a._T, e))

    def truncate(self, T: Exponent) -> "QSeries":
        T = _frac(T)
        if self._T is not None:
            T = min(T, self._T)
        return QSeries._make(self._M, self._c, T)

    def inverse(self) -> "QSeries":
        """Multiplicative inverse; exact series are inverted only if monomial."""
        if not self._c:
            raise ZeroDivisionError("inverse of the zero series")
        k0 = min(self._c)
        c0 = self._c[k0]
        if self._T is None:
            if len(self._c) == 1:
                return QSeries._make(self._M, {-k0: _inv(c0)}, None)
            raise PrecisionError("inverse of an exact non-monomial series needs a truncation; call truncate() first")
        M = self._M
        lim_units = self._T * M - k0  # known units above valuation
        n_terms = math.ceil(lim_units)
        inv0 = _inv(c0)
        a = sorted((k - k0, c) for k, c in self._c.items() if k != k0)
        b = [0] * n_terms
        if n_terms:
            b[0] = inv0
        for n in range(1, n_terms):
            s = 0
            for k, c in a:
                if k > n:
                    break
                bk = b[n - k]
                if not is_zero(bk):
                    s = s + c * bk
            b[n] = -(s * inv0) if not is_zero(s) else 0
        T = self._T - 2 * Fraction(k0, M)
        return QSeries._make(M, {n - k0: c for n, c in enumerate(b) if not is_zero(c)}, T)

    # -- transformations --------------------------------------------------

    def rescale(self, factor: Exponent, twist: Exponent = 0) -> "QSeries":
        """Substitute tau -> factor*tau + twist: c q^e becomes c e(e*twist) q^(factor*e)."""
        s = _frac(factor)
        if s <= 0:
            raise ValueError("rescale factor must be positive")
        beta = _frac(twist)
        Mq = self._M * s.denominator
        g = math.gcd(s.numerator, Mq)
        M_new = Mq // g
        out: dict[int, object] = {}
        for k, c in self._c.items():
            e = Fraction(k, self._M)
            if beta:
                c = c * root_of_unity(e * beta)
            out[int(e * s * M_new)] = c
        return QSeries._make(M_new, out, None if self._T is None else self._T * s)

    def map_coefficients(self, f: Callable[[object], object]) -> "QSeries":
        return QSeries._make(self._M, {k: f(c) for k, c in self._c.items()}, self._T)

    def restrict(self, pred: Callable[[Fraction], bool]) -> "QSeries":
        """Keep only the terms whose exponent satisfies pred."""
        M = self._M
        return QSeries._make(M, {k: c for k, c in self._c.items() if pred(Fraction(k, M))}, self._T)

    def exp(self, prec: Optional[Exponent] = None) -> "QSeries":
        return series_exp(self, prec)

    def log(self, prec: Optional[Exponent] = None) -> "QSeries":
        return series_log(self, prec)

    # -- comparison -------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, CyclotomicElement, QuadraticElement)):
            other = QSeries({0: other}, self._T)
        if not isinstance(other, QSeries):
            return NotImplemented
        if self._T != other._T:
            return False
        a, b, _ = QSeries._common(self, other)
        return a._c == b._c

    def __hash__(self):
        return hash((self._T, tuple(self.items())))

    def agrees(self, other: "QSeries", upto: Optional[Exponent] = None) -> bool:
        """True when both series coincide below their common truncation (and upto)."""
        if not isinstance(other, QSeries):
            other = self._coerce(other)
        T = _min_trunc(self._T, other._T, None if upto is None else _frac(upto))
        a, b, M = QSeries._common(self, other)
        keys = set(a._c) | set(b._c)
        for k in keys:
            if T is not None and Fraction(k, M) >= T:
                continue
            if a._c.get(k, 0) != b._c.get(k, 0):
                return False
        return True

    def first_difference(self, other: "QSeries") -> Optional[Fraction]:
        """Smallest exponent below the common truncation where the series differ."""
        T = _min_trunc(self._T, other._T)
        a, b, M = QSeries._common(self, other)
        for k in sorted(set(a._c) | set(b._c)):
            e = Fraction(k, M)
            if T is not None and e >= T:
                break
            if a._c.get(k, 0) != b._c.get(k, 0):
                return e
        return None

    # -- display / serialization -------------------------------------------

    def __repr__(self):
        parts = []
        for e, c in self.items():
            cs = str(c)
            if e == 0:
                parts.append(cs)
            else:
                parts.append(f"{cs}*q^{e}" if c != 1 else f"q^{e}")
        if self._T is not None:
            parts.append(f"O(q^{self._T})")
        return " + ".join(parts) if parts else "0"

    def to_json(self) -> dict:
        from .io import series_to_json

        return series_to_json(self)

    @classmethod
    def from_json(cls, data: dict) -> "QSeries":
        from .io import series_from_json

        return series_from_json(data)


def _inv(c):
    if isinstance(c, (int, Fraction)):
        return as_rational(Fraction(1) / c)
    return c.inverse()


def series_mul(a: QSeries, b: QSeries) -> QSeries:
    """Cauchy product; truncation min(T_a + val_b, T_b + val_a)."""
    a, b, M = QSeries._common(a, b)
    va, vb = a.valuation(), b.valuation()
    if va is None or vb is None:
        T = _min_trunc(a._T, b._T)
        return QSeries._make(M, {}, T)
    T = _min_trunc(_add_trunc(a._T, vb), _add_trunc(b._T, va))
    lim = None if T is None else math.ceil(T * M)
    bi = sorted(b._c.items())
    out: dict[int, object] = {}
    get = out.get
    for ka, ca in sorted(a._c.items()):
        for kb, cb in bi:
            k = ka + kb
            if lim is not None and k >= lim:
                break
            prev = get(k)
            out[k] = ca * cb if prev is None else prev + ca * cb
    return QSeries._make(M, out, T)


def _needs_prec(a: QSeries, prec: Optional[Exponent], what: str) -> Fraction:
    T = a.truncation
    if prec is not None:
        T = _frac(prec) if T is None else min(T, _frac(prec))
    if T is None:
        raise PrecisionError(f"{what} of an exact series needs an explicit prec")
    return T


def series_exp(a: QSeries, prec: Optional[Exponent] = None) -> QSeries:
    """Formal exponential of a series with only positive exponents."""
    T = _needs_prec(a, prec, "exp")
    M = a.denom_lattice
    terms = sorted(a._c.items())
    if terms and terms[0][0] <= 0:
        raise ValueError("series_exp needs all exponents > 0 (formal exponential diverges)")
    n_terms = max(math.ceil(T * M), 0)
    E: list = [0] * n_terms
    if n_terms:
        E[0] = 1
    weighted = [(k, k * c) for k, c in terms]
    for n in range(1, n_terms):
        s = 0
        for k, kc in weighted:
            if k > n:
                break
            en = E[n - k]
            if not is_zero(en):
                s = s + kc * en
        E[n] = s * Fraction(1, n) if not is_zero(s) else 0
    return QSeries._make(M, {n: c for n, c in enumerate(E)}, T)


def series_log(a: QSeries, prec: Optional[Exponent] = None) -> QSeries:
    """Formal logarithm of a series 1 + (positive exponents)."""
    T = _needs_prec(a, prec, "log")
    M = a.denom_lattice
    c = a._c
    if not c or min(c) != 0 or c[0] != 1:
        raise ValueError("series_log needs leading term 1*q^0")
    if any(k < 0 for k in c):
        raise ValueError("series_log needs leading term 1*q^0")
    n_terms = max(math.ceil(T * M), 0)
    A = sorted((k, v) for k, v in c.items() if k > 0)
    L: list = [0] * n_terms
    for n in range(1, n_terms):
        s = n * c.get(n, 0)
        for k, v in A:
            if k >= n:
                break
            lk = L[n - k]
            if not is_zero(lk):
                s = s - (n - k) * lk * v
        L[n] = s * Fraction(1, n) if not is_zero(s) else 0
    return QSeries._make(M, {n: v for n, v in enumerate(L)}, T)


def power_product(exponents: Mapping[int, int], prec_units: int) -> list[int]:
    """Coefficients of prod_w (1 - x^w)^{e_w} for x-exponents 0..prec_units-1.

    Uses the logarithmic-derivative recurrence
    n P_n = sum_{k=1}^n c_k P_{n-k},  c_k = -sum_{w | k} w e_w,
    which stays in the integers when all e_w are integers.
    """
    c = [0] * prec_units
    for w, e in exponents.items():
        if not e or w >= prec_units:
            continue
        for k in range(w, prec_units, w):
            c[k] -= w * e
    P = [0] * prec_units
    if prec_units:
        P[0] = 1
    nz = [k for k in range(1, prec_units) if c[k]]
    for n in range(1, prec_units):
        s = 0
        for k in nz:
            if k > n:
                break
            s += c[k] * P[n - k]
        q, r = divmod(s, n)
        if r:
            raise ArithmeticError("non-integral coefficient in power_product")
        P[n] = q
    return P
