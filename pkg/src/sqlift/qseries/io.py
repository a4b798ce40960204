"""JSON encoding of exact coefficients and q-series."""

from __future__ import annotations

from fractions import Fraction

from .numbers import CyclotomicElement, DomainError, QuadraticElement, as_rational
from .series import QSeries


def rational_to_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def coeff_to_json(c):
    if isinstance(c, (int, Fraction)):
        return rational_to_str(c)
    if isinstance(c, QuadraticElement):
        return {"a": rational_to_str(c.a), "b": rational_to_str(c.b), "D1": c.D1}
    if isinstance(c, CyclotomicElement):
        return {"order": c.order, "coeffs": {str(k): rational_to_str(v) for k, v in enumerate(c.coeffs) if v}}
    raise DomainError(f"cannot serialize {type(c).__name__}")


def coeff_from_json(obj):
    if isinstance(obj, bool):
        raise DomainError("boolean is not a coefficient")
    if isinstance(obj, (int, str)):
        return as_rational(Fraction(obj))
    if isinstance(obj, dict):
        if "D1" in obj:
            return QuadraticElement(Fraction(obj["a"]), Fraction(obj["b"]), int(obj["D1"]))
        if "order" in obj:
            return CyclotomicElement(int(obj["order"]), {int(k): Fraction(v) for k, v in obj["coeffs"].items()})
    raise DomainError(f"unrecognized coefficient encoding: {obj!r}")


def series_to_json(s: QSeries) -> dict:
    return {
        "denom_lattice": s.denom_lattice,
        "truncation": None if s.truncation is None else rational_to_str(s.truncation),
        "terms": [[rational_to_str(e), coeff_to_json(c)] for e, c in s.items()],
    }


def series_from_json(data: dict) -> QSeries:
    T = data.get("truncation")
    return QSeries(
        [(Fraction(e), coeff_from_json(c)) for e, c in data.get("terms", [])],
        None if T is None else Fraction(T),
        int(data.get("denom_lattice", 1)),
    )
