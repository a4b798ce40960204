"""Exact arithmetic kernel: number domains, truncated q-series and classical forms."""

from .io import coeff_from_json, coeff_to_json, rational_to_str, series_from_json, series_to_json
from .modforms import (
    capital_J,
    delta,
    eisenstein_E4,
    eisenstein_E6,
    eta_quotient,
    hauptmodul_t4,
    klein_j,
    klein_j_via_E6,
    theta,
    theta_nullwert,
)
from .numbers import (
    CyclotomicElement,
    DomainError,
    QuadraticElement,
    Rational,
    as_rational,
    is_fundamental_discriminant,
    root_of_unity,
    sqrt_rational,
    to_mpc,
)
from .numeric import evaluate, required_truncation, tail_bound
from .series import (
    EmptySeriesError,
    PrecisionError,
    QSeries,
    power_product,
    series_exp,
    series_log,
    series_mul,
)


def rescale(a: QSeries, factor, twist=0) -> QSeries:
    """tau -> factor*tau + twist on a q-series (twist is the angle of the root of unity)."""
    return a.rescale(factor, twist)


__all__ = [
    "CyclotomicElement", "DomainError", "EmptySeriesError", "PrecisionError", "QSeries",
    "QuadraticElement", "Rational", "as_rational", "capital_J", "coeff_from_json", "coeff_to_json",
    "delta", "eisenstein_E4", "eisenstein_E6", "eta_quotient", "evaluate", "hauptmodul_t4",
    "is_fundamental_discriminant", "klein_j", "klein_j_via_E6", "power_product", "rational_to_str",
    "required_truncation", "rescale", "root_of_unity", "series_exp", "series_from_json", "series_log",
    "series_mul", "series_to_json", "sqrt_rational", "tail_bound", "theta", "theta_nullwert", "to_mpc",
]
