"""
Exact coefficient domains.

Three kinds of exact numbers appear as q-series coefficients:

* rationals, represented by :class:`fractions.Fraction` (or plain ``int``
  when integral, which keeps the hot loops fast);
* elements of a cyclotomic field ``Q(zeta_n)``, see :class:`CyclotomicElement`;
* elements of a real quadratic field ``Q(sqrt(D1))``, see
  :class:`QuadraticElement`.

Rationals embed into both towers.  Mixing a cyclotomic and a quadratic
number raises :class:`DomainError`; use :meth:`QuadraticElement.to_cyclotomic`
when an explicit embedding is wanted.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Iterable, Mapping, Union

import mpmath
import sympy
from sympy.functions.combinatorial.numbers import kronecker_symbol as _kronecker

Rational = Fraction
RationalLike = Union[int, Fraction]


def kronecker_symbol(d: int, a: int) -> int:
    """Kronecker symbol (d|a) as a Python int."""
    return int(_kronecker(int(d), int(a)))


class DomainError(TypeError):
    """Raised when two coefficients have no common exact domain."""


def as_rational(x) -> RationalLike:
    """Normalize an int/Fraction/str to ``int`` when integral, else ``Fraction``."""
    if isinstance(x, bool):
        raise DomainError("booleans are not numbers here")
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        x = Fraction(x)
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    raise DomainError(f"not a rational: {x!r}")


def normalize(x):
    """Collapse a coefficient to the smallest domain that holds it."""
    if isinstance(x, (int, Fraction)):
        return as_rational(x)
    if isinstance(x, (CyclotomicElement, QuadraticElement)):
        return x.to_rational() if x.is_rational() else x
    raise DomainError(f"unsupported coefficient type {type(x).__name__}")


def is_zero(x) -> bool:
    if isinstance(x, (int, Fraction)):
        return x == 0
    return x.is_zero()


# ---------------------------------------------------------------------------
# cyclotomic fields


@lru_cache(maxsize=None)
def euler_phi(n: int) -> int:
    return int(sympy.totient(n))


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients of the n-th cyclotomic polynomial, low degree first."""
    x = sympy.Symbol("x")
    coeffs = sympy.Poly(sympy.cyclotomic_poly(n, x), x).all_coeffs()
    return tuple(int(c) for c in reversed(coeffs))


@lru_cache(maxsize=None)
def _power_table(n: int) -> tuple[tuple[int, ...], ...]:
    """Row k holds zeta_n^k written in the basis 1, zeta, ..., zeta^(phi-1)."""
    phi = euler_phi(n)
    cyc = cyclotomic_polynomial(n)
    rows = []
    cur = [0] * phi
    cur[0] = 1
    for _ in range(n):
        rows.append(tuple(cur))
        # multiply by x and reduce the overflowing x^phi
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            for i in range(phi):
                cur[i] -= top * cyc[i]
    return tuple(rows)


def _reduce(n: int, cyclic: Mapping[int, RationalLike]) -> tuple:
    """Reduce sum c_k zeta_n^k (k taken mod n) to the power basis."""
    phi = euler_phi(n)
    table = _power_table(n)
    out = [0] * phi
    for k, c in cyclic.items():
        if not c:
            continue
        row = table[k % n]
        for i, r in enumerate(row):
            if r:
                out[i] += r * c
    return tuple(as_rational(c) for c in out)


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class CyclotomicElement:
    """An element sum_k coeffs[k] * e(k/n) of Q(zeta_n), zeta_n = e(1/n).

    The stored coefficients are those of the unique representative of
    degree < phi(n) modulo the n-th cyclotomic polynomial, so equality is
    coefficientwise after embedding both sides in a common field.
    """

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: Mapping[int, RationalLike] | Iterable[RationalLike]):
        if order < 1:
            raise ValueError("order must be positive")
        if not isinstance(coeffs, Mapping):
            coeffs = dict(enumerate(coeffs))
        cyclic: dict[int, RationalLike] = {}
        for k, c in coeffs.items():
            c = as_rational(c)
            if c:
                kk = int(k) % order
                cyclic[kk] = cyclic.get(kk, 0) + c
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", _reduce(order, cyclic))

    def __setattr__(self, name, value):
        raise AttributeError("CyclotomicElement is immutable")

    @classmethod
    def _raw(cls, order: int, coeffs: tuple) -> "CyclotomicElement":
        obj = object.__new__(cls)
        object.__setattr__(obj, "order", order)
        object.__setattr__(obj, "coeffs", coeffs)
        return obj

    @classmethod
    def root(cls, n: int, k: int = 1) -> "CyclotomicElement":
        """zeta_n^k."""
        return cls(n, {k: 1})

    @classmethod
    def from_rational(cls, x: RationalLike, n: int = 1) -> "CyclotomicElement":
        return cls(n, {0: x})

    # -- structure --------------------------------------------------------

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_rational(self) -> RationalLike:
        if not self.is_rational():
            raise DomainError(f"{self!r} is not rational")
        return self.coeffs[0] if self.coeffs else 0

    def embed(self, n: int) -> "CyclotomicElement":
        """The same number viewed in Q(zeta_n); requires order | n."""
        if n == self.order:
            return self
        if n % self.order:
            raise DomainError(f"Q(zeta_{self.order}) does not embed in Q(zeta_{n})")
        step = n // self.order
        return CyclotomicElement(n, {k * step: c for k, c in enumerate(self.coeffs) if c})

    def galois(self, a: int) -> "CyclotomicElement":
        """Image under zeta -> zeta^a, gcd(a, n) = 1."""
        if gcd(a, self.order) != 1:
            raise ValueError("not a Galois automorphism")
        return CyclotomicElement(self.order, {k * a: c for k, c in enumerate(self.coeffs) if c})

    def conjugate(self) -> "CyclotomicElement":
        return self.galois(-1)

    def norm(self) -> RationalLike:
        """Field norm down to Q."""
        n = self.order
        prod = CyclotomicElement(n, {0: 1})
        for a in range(1, n + 1):
            if gcd(a, n) == 1:
                prod = prod * self.galois(a)
        return prod.to_rational()

    def inverse(self) -> "CyclotomicElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        n = self.order
        other = CyclotomicElement(n, {0: 1})
        for a in range(2, n + 1):
            if gcd(a, n) == 1:
                other = other * self.galois(a)
        nm = (self * other).to_rational()
        return other / nm

    def normalized_trace(self) -> Fraction:
        """Tr(x)/phi(n); independent of the field the element is viewed in."""
        n = self.order
        total = Fraction(0)
        for k, c in enumerate(self.coeffs):
            if c:
                g = gcd(k, n)
                total += c * Fraction(int(sympy.mobius(n // g)), euler_phi(n // g))
        return total

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, CyclotomicElement):
            if other.order == self.order:
                return self, other
            n = _lcm(self.order, other.order)
            return self.embed(n), other.embed(n)
        if isinstance(other, (int, Fraction)):
            return self, CyclotomicElement(self.order, {0: other})
        if isinstance(other, QuadraticElement):
            raise DomainError("cannot mix cyclotomic and quadratic coefficients")
        return None

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return self
            c = list(self.coeffs)
            c[0] = as_rational(c[0] + other)
            return CyclotomicElement._raw(self.order, tuple(c))
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return CyclotomicElement._raw(a.order, tuple(as_rational(x + y) for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicElement._raw(self.order, tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CyclotomicElement._raw(self.order, tuple(as_rational(x * other) for x in self.coeffs))
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        n = a.order
        cyclic: dict[int, RationalLike] = {}
        for i, x in enumerate(a.coeffs):
            if not x:
                continue
            for j, y in enumerate(b.coeffs):
                if y:
                    k = (i + j) % n
                    cyclic[k] = cyclic.get(k, 0) + x * y
        return CyclotomicElement._raw(n, _reduce(n, cyclic))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division by zero")
            return self * (Fraction(1) / other)
        if isinstance(other, CyclotomicElement):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = CyclotomicElement(self.order, {0: 1})
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # -- comparison -------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.to_rational() == other
        if isinstance(other, CyclotomicElement):
            a, b = self._coerce(other)
            return a.coeffs == b.coeffs
        if isinstance(other, QuadraticElement):
            return other.is_rational() and self == other.to_rational()
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self.to_rational())
        return hash(("cyclotomic", self.normalized_trace()))

    def __bool__(self):
        return not self.is_zero()

    def to_mpc(self) -> mpmath.mpc:
        n = self.order
        total = mpmath.mpc(0)
        for k, c in enumerate(self.coeffs):
            if c:
                c = Fraction(c)
                total += mpmath.mpf(c.numerator) / c.denominator * mpmath.expjpi(mpmath.mpf(2 * k) / n)
        return total

    def __complex__(self):
        return complex(self.to_mpc())

    def __repr__(self):
        terms = [f"{c}*z{self.order}^{k}" if k else str(c) for k, c in enumerate(self.coeffs) if c]
        return "(" + (" + ".join(terms) or "0") + ")"


def root_of_unity(angle: RationalLike) -> CyclotomicElement | int:
    """e(angle) as an exact number (returns an int for +-1)."""
    angle = Fraction(angle)
    n = angle.denominator
    if n <= 2:
        return 1 if angle.numerator % 2 == 0 or n == 1 else -1
    return CyclotomicElement.root(n, angle.numerator % n)


def gauss_sum(p: int) -> CyclotomicElement:
    """sum_{a mod p} (a|p) e(a/p) for an odd prime p."""
    return CyclotomicElement(p, {a: kronecker_symbol(a, p) for a in range(1, p)})


@lru_cache(maxsize=None)
def _sqrt_prime(p: int) -> CyclotomicElement:
    if p == 2:
        return CyclotomicElement(8, {1: 1, 7: 1})
    g = gauss_sum(p)
    if p % 4 == 1:
        return g
    return -(CyclotomicElement.root(4, 1) * g)


def sqrt_rational(x: RationalLike) -> CyclotomicElement | RationalLike:
    """The positive square root of a nonnegative rational, exactly.

    Square-free parts are written with quadratic Gauss sums, so the result
    lives in a cyclotomic field (or is rational when x is a square).
    """
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative argument")
    if x == 0:
        return 0
    num = x.numerator * x.denominator
    outer = Fraction(1, x.denominator)
    core = 1
    for p, e in sympy.factorint(num).items():
        outer *= p ** (e // 2)
        if e % 2:
            core *= p
    if core == 1:
        return as_rational(outer)
    result: CyclotomicElement | int = 1
    for p in sympy.factorint(core):
        result = _sqrt_prime(p) * result
    return result * outer


def is_fundamental_discriminant(d: int) -> bool:
    if d == 1:
        return True
    if d % 4 == 1:
        return sympy.ntheory.factor_.core(abs(d)) == abs(d)
    if d % 4 == 0:
        q = d // 4
        return q % 4 in (2, 3) and sympy.ntheory.factor_.core(abs(q)) == abs(q)
    return False


# ---------------------------------------------------------------------------
# real quadratic fields


class QuadraticElement:
    """a + b*sqrt(D1) with rational a, b and D1 > 1 a fundamental discriminant."""

    __slots__ = ("a", "b", "D1")

    def __init__(self, a: RationalLike, b: RationalLike, D1: int):
        if D1 <= 1 or not is_fundamental_discriminant(D1):
            raise ValueError(f"D1={D1} is not a positive fundamental discriminant > 1")
        object.__setattr__(self, "a", as_rational(a))
        object.__setattr__(self, "b", as_rational(b))
        object.__setattr__(self, "D1", D1)

    def __setattr__(self, name, value):
        raise AttributeError("QuadraticElement is immutable")

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def to_rational(self) -> RationalLike:
        if self.b:
            raise DomainError(f"{self!r} is not rational")
        return self.a

    def conjugate(self) -> "QuadraticElement":
        return QuadraticElement(self.a, -self.b, self.D1)

    def to_cyclotomic(self) -> CyclotomicElement:
        """Embed via the Gauss sum sqrt(D1) = sum_a (D1|a) e(a/D1)."""
        g = CyclotomicElement(self.D1, {a: kronecker_symbol(self.D1, a) for a in range(1, self.D1)})
        return g * self.b + self.a

    def _coerce(self, other):
        if isinstance(other, QuadraticElement):
            if other.D1 != self.D1:
                raise DomainError(f"Q(sqrt {self.D1}) and Q(sqrt {other.D1}) are not compatible")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticElement(other, 0, self.D1)
        if isinstance(other, CyclotomicElement):
            raise DomainError("cannot mix cyclotomic and quadratic coefficients")
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticElement(self.a + o.a, self.b + o.b, self.D1)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticElement(-self.a, -self.b, self.D1)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuadraticElement(self.a * other, self.b * other, self.D1)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticElement(self.a * o.a + self.D1 * self.b * o.b, self.a * o.b + self.b * o.a, self.D1)

    __rmul__ = __mul__

    def inverse(self) -> "QuadraticElement":
        nm = self.a * self.a - self.D1 * self.b * self.b
        if nm == 0:
            raise ZeroDivisionError("inverse of zero")
        return QuadraticElement(Fraction(self.a) / nm, -Fraction(self.b) / nm, self.D1)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, QuadraticElement):
            return (self.a, self.b, self.D1) == (other.a, other.b, other.D1) or (
                self.b == 0 and other.b == 0 and self.a == other.a)
        if isinstance(other, CyclotomicElement):
            return self.is_rational() and other == self.a
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.D1))

    def __bool__(self):
        return not self.is_zero()

    def to_mpc(self) -> mpmath.mpc:
        a = mpmath.mpf(Fraction(self.a).numerator) / Fraction(self.a).denominator
        b = mpmath.mpf(Fraction(self.b).numerator) / Fraction(self.b).denominator
        return mpmath.mpc(a + b * mpmath.sqrt(self.D1))

    def __repr__(self):
        return f"({self.a} + {self.b}*sqrt({self.D1}))"


def to_mpc(c) -> mpmath.mpc:
    """Numeric value of any exact coefficient at the current mpmath precision."""
    if isinstance(c, int):
        return mpmath.mpc(c)
    if isinstance(c, Fraction):
        return mpmath.mpc(mpmath.mpf(c.numerator) / c.denominator)
    return c.to_mpc()


def isqrt_exact(n: int) -> int | None:
    r = isqrt(n)
    return r if r * r == n else None
