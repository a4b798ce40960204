"""
Binary quadratic forms, genus characters, twisted Heegner divisors and traces of singular moduli.

Only the level one case is implemented for divisors and traces: CM points
are SL2(Z)-classes of positive definite forms [A, B, C], and singular moduli
are values of J = j - 744 computed from its q-expansion after reduction to
the standard fundamental domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import mpmath
from sympy import divisors

from .qseries import PrecisionError, capital_J, is_fundamental_discriminant, klein_j, required_truncation
from .qseries.numbers import kronecker_symbol
from .qseries.numeric import GUARD_DIGITS
from .weil import CMPoint


class UnsupportedLevel(ValueError):
    pass


class GenusCharacterError(AssertionError):
    pass


class UntrustedInversion(ArithmeticError):
    pass


def kronecker(D: int, a: int) -> int:
    """The Kronecker symbol (D | a)."""
    return kronecker_symbol(D, a)


def _is_disc(d: int) -> bool:
    return d % 4 in (0, 1)


# ---------------------------------------------------------------------------
# forms


@dataclass(frozen=True, order=True)
class BQF:
    """[A, B, C] = A x^2 + B x y + C y^2."""

    A: int
    B: int
    C: int

    @property
    def disc(self) -> int:
        return self.B * self.B - 4 * self.A * self.C

    def __call__(self, x, y=1):
        return self.A * x * x + self.B * x * y + self.C * y * y

    def act(self, gamma) -> "BQF":
        """Right action: (Q gamma)(x, y) = Q(a x + b y, c x + d y)."""
        (a, b), (c, d) = gamma
        A, B, C = self.A, self.B, self.C
        return BQF(A * a * a + B * a * c + C * c * c,
                   2 * A * a * b + B * (a * d + b * c) + 2 * C * c * d,
                   A * b * b + B * b * d + C * d * d)

    def is_reduced(self) -> bool:
        A, B, C = self.A, self.B, self.C
        if not (abs(B) <= A <= C):
            return False
        if B < 0 and (abs(B) == A or A == C):
            return False
        return True

    def reduce(self) -> tuple["BQF", tuple]:
        """The reduced form equivalent to a positive definite form, with gamma such that self.act(gamma) is it."""
        if self.disc >= 0 or self.A <= 0:
            raise ValueError("reduction needs a positive definite form")
        Q = self
        g = ((1, 0), (0, 1))
        while True:
            A, B, C = Q.A, Q.B, Q.C
            if abs(B) > A or B == -A:
                # translate: B -> B + 2 A k into (-A, A]
                k = _translate(A, B)
                t = ((1, k), (0, 1))
            elif A > C or (A == C and B < 0):
                t = ((0, -1), (1, 0))
            else:
                return Q, g
            Q = Q.act(t)
            g = _mul(g, t)

    def stabilizer_order(self) -> int:
        """|PSL2(Z)_Q| for a reduced form: 3 for a[1,1,1], 2 for a[1,0,1], else 1."""
        R, _ = self.reduce()
        if R.A == R.B == R.C:
            return 3
        if R.B == 0 and R.A == R.C:
            return 2
        return 1

    def content(self) -> int:
        return math.gcd(self.A, self.B, self.C)

    def point(self) -> CMPoint:
        return CMPoint.from_quadratic(self.A, self.B, self.C)

    def __str__(self):
        return f"[{self.A},{self.B},{self.C}]"


def _translate(A: int, B: int) -> int:
    """k with B + 2 A k in (-A, A]."""
    return math.floor(Fraction(A - B, 2 * A))


def _mul(g, h):
    (a, b), (c, d) = g
    (e, f), (x, y) = h
    return ((a * e + b * x, a * f + b * y), (c * e + d * x, c * f + d * y))


@lru_cache(maxsize=None)
def _reduced(D: int) -> tuple[BQF, ...]:
    out = []
    A = 1
    while 3 * A * A <= -D:
        for B in range(-A + 1, A + 1):
            if (B * B - D) % (4 * A):
                continue
            C = (B * B - D) // (4 * A)
            Q = BQF(A, B, C)
            if C >= A and Q.is_reduced():
                out.append(Q)
        A += 1
    return tuple(sorted(out, key=lambda q: (q.A, abs(q.B), q.B, q.C)))


def reduce_forms(D: int) -> list[BQF]:
    """One reduced representative per SL2(Z)-class of discriminant D < 0 (imprimitive forms included)."""
    if D >= 0:
        raise ValueError("discriminant must be negative")
    if not _is_disc(D):
        raise ValueError(f"{D} is not 0 or 1 mod 4")
    return list(_reduced(D))


def genus_character(m: int, D1: int, Q: BQF) -> int:
    """chi^{(m)}_{D1}([A m, B, C]) = (D1'|A m')(D1''|C m'') over admissible factorizations."""
    if Q.A % m:
        raise ValueError(f"{Q} does not have A = 0 mod {m}")
    if D1 <= 0 or not is_fundamental_discriminant(D1):
        raise ValueError(f"D1 = {D1} must be a positive fundamental discriminant")
    A = Q.A // m
    values = set()
    for d in divisors(D1):
        for d1 in (int(d), -int(d)):
            d2 = D1 // d1
            if not (_is_disc(d1) and _is_disc(d2)):
                continue
            for m1 in divisors(m):
                m1 = int(m1)
                m2 = m // m1
                if math.gcd(d1, A * m1) == 1 and math.gcd(d2, Q.C * m2) == 1:
                    values.add(kronecker(d1, A * m1) * kronecker(d2, Q.C * m2))
    if len(values) > 1:
        raise GenusCharacterError(f"genus character of {Q} depends on the factorization: {values}")
    return values.pop() if values else 0


def cm_point(Q: BQF) -> CMPoint:
    """The root of Q(x, 1) in H; exact (A, B, C) data with a numeric rendering."""
    if Q.disc >= 0:
        raise ValueError(f"{Q} is not definite")
    if Q.A <= 0:
        raise ValueError(f"{Q} needs A > 0")
    return CMPoint(Q.A, Q.B, Q.C)


# ---------------------------------------------------------------------------
# singular moduli


def reduce_point(z: mpmath.mpc) -> mpmath.mpc:
    """Move z into |Re z| <= 1/2, |z| >= 1 by translations and inversions."""
    for _ in range(10000):
        z = mpmath.mpc(z.real - mpmath.nint(z.real), z.imag)
        if abs(z) < 1 - mpmath.mpf(10) ** (-mpmath.mp.dps + 5):
            z = -1 / z
        else:
            return z
    raise ArithmeticError("reduction to the fundamental domain did not terminate")


@lru_cache(maxsize=8)
def _J_coeffs(T: int) -> tuple[int, ...]:
    """Coefficients of q^-1, q^0, ..., q^(T-1) in J."""
    s = capital_J(T)
    return tuple(int(s.coeff(k)) for k in range(-1, T))


def _ambiguous(P: CMPoint) -> bool:
    R, _ = BQF(P.A, P.B, P.C).reduce()
    return R.B == 0 or R.B == R.A or R.A == R.C


def J_at(alpha, digits: int = 60, real_check: bool = True) -> mpmath.mpc:
    """J(alpha) = j(alpha) - 744 with a certified truncation of the q-expansion."""
    return _J_or_j(alpha, digits, real_check, 0)


def j_at(alpha, digits: int = 60, real_check: bool = True) -> mpmath.mpc:
    """j(alpha) evaluated from its q-expansion after reduction to the fundamental domain.

    CM points of ambiguous classes (where j is real) are checked to have an
    imaginary part below 10^-(digits-5) relative to |j|.
    """
    return _J_or_j(alpha, digits, real_check, 744)


def _J_or_j(alpha, digits: int, real_check: bool, const: int) -> mpmath.mpc:
    P = alpha if isinstance(alpha, CMPoint) else None
    with mpmath.workdps(digits + GUARD_DIGITS):
        z = P.to_mpc(digits) if P is not None else mpmath.mpc(alpha)
        if z.imag <= 0:
            raise ValueError("j needs Im(alpha) > 0")
        z = reduce_point(z)
        T = required_truncation(float(z.imag), digits + GUARD_DIGITS)
        coeffs = _J_coeffs(T)
        q = mpmath.exp(2j * mpmath.pi * z)
        total = mpmath.mpc(0)
        for c in reversed(coeffs):  # Horner in q, starting from q^-1
            total = total * q + c
        total = total / q + const
        if P is not None and real_check and _ambiguous(P):
            if abs(total.imag) > mpmath.mpf(10) ** (-(digits - 5)) * max(1, abs(total)):
                raise PrecisionError(f"j at the CM point {P} has imaginary residue {mpmath.nstr(total.imag, 5)}")
            total = mpmath.mpc(total.real, 0)
        return +total


# ---------------------------------------------------------------------------
# twisted Heegner divisors


@dataclass(frozen=True)
class HeegnerTerm:
    form: BQF
    point: CMPoint
    weight: Fraction


@dataclass(frozen=True)
class HeegnerDivisor:
    terms: tuple[HeegnerTerm, ...]

    def total_weight(self) -> Fraction:
        return sum((t.weight for t in self.terms), Fraction(0))

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def to_json(self) -> list[dict]:
        return [{"form": [t.form.A, t.form.B, t.form.C], "point": str(t.point), "weight": str(t.weight)}
                for t in self.terms]


def _check_params(m: int, D1: int, r1: int, D: int) -> None:
    if m != 1:
        raise UnsupportedLevel("twisted Heegner divisors are implemented for m = 1 only")
    if D1 <= 1 or not is_fundamental_discriminant(D1):
        raise ValueError(f"D1 = {D1} must be a fundamental discriminant > 1")
    if (D1 - r1 * r1) % (4 * m):
        raise ValueError(f"D1 = {D1} is not r1^2 mod {4 * m}")
    if D >= 0:
        raise ValueError("D must be negative")


def twisted_divisor(m: int, D1: int, r1: int, D: int, r: int, multiplier: int = 1) -> HeegnerDivisor:
    """sum over Q in Q^{(1)}_{D D1, r r1} / SL2(Z) of multiplier chi_{D1}(Q) [alpha_Q] / |stabilizer|."""
    _check_params(m, D1, r1, D)
    if (D - r * r) % (4 * m):
        raise ValueError(f"D = {D} is not r^2 mod {4 * m}")
    if multiplier == 0:
        return HeegnerDivisor(())
    terms = []
    for Q in reduce_forms(D * D1):
        if (Q.B - r * r1) % (2 * m):
            continue
        chi = genus_character(m, D1, Q)
        if chi:
            w = Fraction(multiplier * chi, Q.stabilizer_order())
            terms.append(HeegnerTerm(Q, cm_point(Q), w))
    div = HeegnerDivisor(tuple(terms))
    if is_fundamental_discriminant(D * D1) and div.total_weight() != 0:
        raise GenusCharacterError(f"genus character does not sum to 0 over discriminant {D * D1}")
    return div


DivisorSpec = Sequence[tuple[int, int, int]]  # (D, r, multiplier)


def divisor_from_spec(D1: int, r1: int, spec: DivisorSpec) -> HeegnerDivisor:
    terms = []
    for D, r, mult in spec:
        terms.extend(twisted_divisor(1, D1, r1, D, r, mult).terms)
    return HeegnerDivisor(tuple(terms))


@dataclass(frozen=True)
class NumericValue:
    value: mpmath.mpf
    bound: mpmath.mpf
    digits: int

    def __str__(self):
        return f"{mpmath.nstr(self.value, self.digits)} ± {mpmath.nstr(self.bound, 3)}"

    def to_json(self) -> dict:
        return {"value": mpmath.nstr(self.value, self.digits), "bound": mpmath.nstr(self.bound, 3)}


def trace_singular_moduli(D1: int, r1: int, spec: DivisorSpec, digits: int = 60) -> NumericValue:
    """(1/sqrt(D1)) sum over the divisor of weight * J(alpha_Q)."""
    div = divisor_from_spec(D1, r1, spec)
    with mpmath.workdps(digits + GUARD_DIGITS):
        total = mpmath.mpf(0)
        scale = mpmath.mpf(0)
        for t in div:
            J = J_at(t.point, digits)
            total += mpmath.mpf(t.weight.numerator) / t.weight.denominator * J.real
            scale += abs(t.weight) * (1 + abs(J))
        val = total / mpmath.sqrt(D1)
        bound = scale * mpmath.mpf(10) ** (-(digits - GUARD_DIGITS))
        return NumericValue(+val, bound, digits)


def _hecke_J_sum(alpha: CMPoint, n: int, digits: int) -> mpmath.mpc:
    """sum_{ad = n} sum_{b mod d} J((a alpha + b)/d)."""
    with mpmath.workdps(digits + GUARD_DIGITS):
        z = alpha.to_mpc(digits + GUARD_DIGITS)
        total = mpmath.mpc(0)
        for d in divisors(n):
            d = int(d)
            a = n // d
            for b in range(d):
                total += J_at((a * z + b) / d, digits, False)
        return total


def invert_coefficients(D1: int, r1: int, spec: DivisorSpec, nmax: int, digits: int = 60,
                        threshold: float = 1e-3) -> dict[int, dict]:
    """Recover C(D1 n^2, r1 n) for n = 1..nmax from Hecke-translated J-values.

    sqrt(D1) sum_{ad=n} a (D1|d) C(D1 a^2, r1 a) = sum_Q w_Q sum_{ad=n} sum_{b mod d} J((a alpha_Q + b)/d)
    """
    div = divisor_from_spec(D1, r1, spec)
    out: dict[int, dict] = {}
    known: dict[int, int] = {}
    with mpmath.workdps(digits + GUARD_DIGITS):
        sq = mpmath.sqrt(D1)
        for n in range(1, nmax + 1):
            rhs = mpmath.mpc(0)
            for t in div:
                rhs += mpmath.mpf(t.weight.numerator) / t.weight.denominator * _hecke_J_sum(t.point, n, digits)
            s = rhs.real / sq
            for d in divisors(n):
                d = int(d)
                a = n // d
                if a < n:
                    s -= a * kronecker(D1, d) * known[a]
            val = s / n
            rounded = int(mpmath.nint(val))
            residue = abs(val - rounded)
            if residue > threshold:
                raise UntrustedInversion(f"n = {n}: value {mpmath.nstr(val, 15)} is {mpmath.nstr(residue, 3)} "
                                         "from an integer")
            known[n] = rounded
            out[n] = {"D": D1 * n * n, "r": r1 * n, "C": rounded, "residue": float(residue),
                      "value": mpmath.nstr(val, digits)}
    return out


# ---------------------------------------------------------------------------
# replication


@dataclass
class ReplicationReport:
    alpha: CMPoint
    prec: int
    ok: bool
    max_residual: float
    first_failure: Optional[int]
    lhs: list
    rhs: list

    def to_json(self) -> dict:
        return {"alpha": str(self.alpha), "prec": self.prec, "ok": self.ok, "max_residual": self.max_residual,
                "first_failure": self.first_failure,
                "coefficients": [{"n": n - 1, "lhs": mpmath.nstr(a, 20), "rhs": mpmath.nstr(b, 20)}
                                 for n, (a, b) in enumerate(zip(self.lhs, self.rhs))]}


def _numeric_exp(a: list) -> list:
    """Coefficients of exp(sum_{k>=1} a[k] x^k) up to len(a)."""
    n = len(a)
    E = [mpmath.mpc(0)] * n
    E[0] = mpmath.mpc(1)
    for k in range(1, n):
        s = mpmath.mpc(0)
        for i in range(1, k + 1):
            s += i * a[i] * E[k - i]
        E[k] = s / k
    return E


def replication_check(alpha: CMPoint, prec: int = 5, digits: int = 40,
                      tol: Optional[float] = None) -> ReplicationReport:
    """Compare J(tau) - J(alpha) with q^-1 exp(-sum_n sum_{ad=n} sum_b J((a alpha + b)/d) q^n / n) through q^prec."""
    tol = 10.0 ** (-(digits - 10)) if tol is None else tol
    with mpmath.workdps(digits + GUARD_DIGITS):
        Jq = klein_j(prec + 1)
        Ja = J_at(alpha, digits, False)
        # coefficients of q^{-1}, q^0, ..., q^prec
        lhs = [mpmath.mpc(Jq.coeff(k)) for k in range(-1, prec + 1)]
        lhs[1] = lhs[1] - 744 - Ja
        a = [mpmath.mpc(0)] + [-_hecke_J_sum(alpha, n, digits) / n for n in range(1, prec + 2)]
        rhs = _numeric_exp(a)[:prec + 2]
        worst = 0.0
        first = None
        for k, (x, y) in enumerate(zip(lhs, rhs)):
            res = float(abs(x - y) / max(1, abs(x)))
            worst = max(worst, res)
            if res > tol and first is None:
                first = k - 1
        return ReplicationReport(alpha, prec, first is None, worst, first, lhs, rhs)


def forms_of_disc(D: int) -> list[CMPoint]:
    return [cm_point(Q) for Q in reduce_forms(D)]


__all__ = [
    "BQF", "GenusCharacterError", "HeegnerDivisor", "HeegnerTerm", "NumericValue", "ReplicationReport",
    "UnsupportedLevel", "UntrustedInversion", "J_at", "cm_point", "divisor_from_spec", "genus_character",
    "invert_coefficients", "j_at", "kronecker", "reduce_forms", "reduce_point", "replication_check",
    "trace_singular_moduli", "twisted_divisor",
]
