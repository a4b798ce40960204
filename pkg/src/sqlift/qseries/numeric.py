"""High-precision numeric evaluation of q-series.

Numbers are :class:`mpmath.mpc` values computed at ``digits`` decimal
digits (plus guard digits).  Truncated series are only evaluated when the
coefficient bound |c(n)| <= exp(4 pi sqrt(n)) guarantees that the unknown
tail is below 10^-(digits-10).
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

from .numbers import to_mpc
from .series import PrecisionError, QSeries

GUARD_DIGITS = 10


def tail_bound(T: Fraction, y: float, lattice: int = 1) -> float:
    """Upper bound for sum over exponents e >= T of exp(4 pi sqrt(e)) |q|^e, Im(tau) = y."""
    n0 = max(math.floor(T), 0)
    total = 0.0
    n = n0
    while True:
        term = math.exp(4 * math.pi * math.sqrt(n + 1) - 2 * math.pi * y * n)
        total += term
        if n > n0 + 10 and term < total * 1e-18:
            break
        n += 1
        if n > n0 + 10**6:
            return math.inf
    return lattice * total


def required_truncation(y: float, digits: int, lattice: int = 1) -> int:
    """Smallest integer truncation whose tail bound is below 10^-(digits-10)."""
    if y <= 0:
        raise ValueError("Im(tau) must be positive")
    target = 10.0 ** (-(digits - GUARD_DIGITS))
    T = 1
    while tail_bound(Fraction(T), y, lattice) >= target:
        T += 1 if T < 64 else T // 8
    return T


def evaluate(a: QSeries, tau, digits: int = 30) -> mpmath.mpc:
    """Sum c_e e(e tau) over the stored terms, after checking the tail bound."""
    with mpmath.workdps(digits + GUARD_DIGITS):
        tau = mpmath.mpc(tau)
        if tau.imag <= 0:
            raise ValueError("evaluate needs Im(tau) > 0")
        if a.truncation is not None:
            y = float(tau.imag)
            bound = tail_bound(a.truncation, y, a.denom_lattice)
            if bound >= 10.0 ** (-(digits - GUARD_DIGITS)):
                need = required_truncation(y, digits, a.denom_lattice)
                raise PrecisionError(
                    f"truncation {a.truncation} too small for {digits} digits at Im(tau)={y:.4g}; "
                    f"need truncation >= {need}")
        terms = [(to_mpc(c), mpmath.mpf(e.numerator) / e.denominator) for e, c in a.items()]
        # large terms cancel when Im(tau) is small, so carry their size in extra digits
        decay = -2 * mpmath.pi * tau.imag
        peak = max((mpmath.log10(abs(c)) + e * decay / mpmath.ln(10) for c, e in terms if c), default=0)
        extra = max(0, int(mpmath.ceil(peak)))
    with mpmath.workdps(digits + GUARD_DIGITS + extra):
        q_arg = 2j * mpmath.pi * mpmath.mpc(tau)
        total = mpmath.mpc(0)
        for e, c in a.items():
            total += to_mpc(c) * mpmath.exp(q_arg * mpmath.mpf(e.numerator) / e.denominator)
    with mpmath.workdps(digits + GUARD_DIGITS):
        return +total
