"""
Repackaging a family {F^(n)}_{n | N} of index m forms into one form of type rho_{m,N}.

Row i = 0 is a discrete Fourier transform of the family and needs no analytic
input.  Rows i != 0 require slashing F^(n) by a matrix of SL2(Z); this is only
done for members described by eta quotients (plus a multiple of the
theta-nullwert, which is invariant), via :class:`EtaSlashEngine`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Mapping, Optional

from sympy import divisors

from .qseries import (
    PrecisionError,
    QSeries,
    as_rational,
    eta_quotient,
    root_of_unity,
    series_from_json,
    series_to_json,
    sqrt_rational,
    theta_nullwert,
)
from .qseries.numbers import normalize
from .vvforms import VectorValuedForm
from .weil import LatticeLmN, qform, weil_rep

Row = dict[int, QSeries]


class EngineGap(KeyError):
    """No eta description for a member needed by a row i != 0."""


class WeightError(ValueError):
    pass


class EngineMismatch(AssertionError):
    """The engine's expansion disagrees with the ingested member."""


class FamilyError(ValueError):
    pass


def _e(x) -> object:
    return root_of_unity(Fraction(x))


def _clean(s: QSeries) -> QSeries:
    return s.map_coefficients(normalize)


# ---------------------------------------------------------------------------
# families


@dataclass
class FormFamily:
    """F^(n) for every divisor n of N; F^(n) has index m and level N/n."""

    N: int
    members: dict[int, VectorValuedForm]

    def __post_init__(self):
        divs = [int(d) for d in divisors(self.N)]
        missing = [d for d in divs if d not in self.members]
        if missing:
            raise FamilyError(f"family for N = {self.N} lacks members {missing}")
        extra = [n for n in self.members if n not in divs]
        if extra:
            raise FamilyError(f"{extra} do not divide N = {self.N}")
        idx = {F.index for F in self.members.values()}
        if len(idx) != 1:
            raise FamilyError(f"members have different indices {sorted(idx)}")

    @property
    def m(self) -> int:
        return next(iter(self.members.values())).index

    def member(self, n: int) -> VectorValuedForm:
        return self.members[math.gcd(n, self.N)]

    def to_json(self) -> dict:
        return {"m": self.m, "N": self.N,
                "members": {str(n): {"level": F.level,
                                     "components": {str(r): series_to_json(s) for r, s in sorted(F.components.items())}}
                            for n, F in sorted(self.members.items())}}

    @classmethod
    def from_json(cls, data: Mapping) -> "FormFamily":
        m = int(data["m"])
        N = int(data["N"])
        members = {}
        for n, body in data["members"].items():
            comps = {int(r): series_from_json(s) for r, s in body["components"].items()}
            members[int(n)] = VectorValuedForm(m, comps, int(body.get("level", N // int(n))))
        return cls(N, members)


# ---------------------------------------------------------------------------
# the check form


class CheckForm:
    """Components (i, j, r) of a form of type rho_{m,N}; coefficients in Q(zeta_N)."""

    def __init__(self, m: int, N: int, components: Mapping[tuple[int, int, int], QSeries], check: bool = True):
        self.m = m
        self.N = N
        n = 2 * abs(m)
        comp: dict[tuple[int, int, int], QSeries] = {}
        for (i, j, r), s in components.items():
            comp[(i % N, j % N, r % n)] = _clean(s)
        trunc = [s.truncation for s in comp.values() if s.truncation is not None]
        T = min(trunc) if trunc else None
        for i in range(N):
            for j in range(N):
                for r in range(n):
                    comp.setdefault((i, j, r), QSeries.zero(T))
        self._comp = comp
        if check:
            self.validate()

    def validate(self) -> None:
        """Exponents match the T-eigenvalue e(Q(i, j, r)); component (-i,-j,-r) equals (i,j,r) for m > 0."""
        L = LatticeLmN(self.m, self.N)
        for idx, s in self._comp.items():
            Q = qform(L, L.representative(idx))
            for e, _ in s.items():
                if (e - Q).denominator != 1:
                    raise FamilyError(f"component {idx}: exponent {e} is not {Q} mod 1")
        if self.m > 0:
            n = 2 * self.m
            for (i, j, r), s in self._comp.items():
                t = self._comp[((-i) % self.N, (-j) % self.N, (-r) % n)]
                if not s.agrees(t):
                    raise FamilyError(f"component {(i, j, r)} differs from its negative")

    def __getitem__(self, idx: tuple[int, int, int]) -> QSeries:
        i, j, r = idx
        return self._comp[(i % self.N, j % self.N, r % (2 * abs(self.m)))]

    def row(self, i: int, j: int) -> Row:
        return {r: self[(i, j, r)] for r in range(2 * abs(self.m))}

    @property
    def components(self) -> dict[tuple[int, int, int], QSeries]:
        return dict(self._comp)

    def coefficient(self, i: int, j: int, D, r: int):
        """C_{i,j}(D, r): the coefficient of q^{D/4m} in component (i, j, r)."""
        return self[(i, j, r)].coeff(Fraction(D) / (4 * self.m))

    def coefficient_table(self, Dmax=0) -> dict[tuple[int, int, Fraction, int], object]:
        """Nonzero (i, j, D, r) -> C with D <= Dmax (the input of the divisor enumeration)."""
        out = {}
        for (i, j, r), s in self._comp.items():
            for e, c in s.items():
                D = e * 4 * self.m
                if D <= Dmax and c:
                    out[(i, j, as_rational(D), r)] = c
        return out

    def agrees(self, other: "CheckForm") -> bool:
        return (self.m, self.N) == (other.m, other.N) and all(s.agrees(other._comp[k]) for k, s in self._comp.items())

    def to_json(self) -> dict:
        return {"m": self.m, "N": self.N,
                "components": [{"i": i, "j": j, "r": r, "series": series_to_json(s)}
                               for (i, j, r), s in sorted(self._comp.items())]}

    @classmethod
    def from_json(cls, data: Mapping) -> "CheckForm":
        comps = {(c["i"], c["j"], c["r"]): series_from_json(c["series"]) for c in data["components"]}
        return cls(int(data["m"]), int(data["N"]), comps)


# ---------------------------------------------------------------------------
# discrete Fourier transforms


def _dft(N: int, rows: Mapping[int, Row], sign: int, scale) -> dict[int, Row]:
    """out[j][r] = scale * sum_{j'} e(sign j j'/N) rows[j'][r]."""
    out: dict[int, Row] = {}
    for j in range(N):
        acc: Row = {}
        for jp in range(N):
            w = _e(Fraction(sign * j * jp, N))
            for r, s in rows[jp].items():
                t = s.scale(w)
                acc[r] = acc[r] + t if r in acc else t
        out[j] = {r: _clean(s.scale(scale)) for r, s in acc.items()}
    return out


def check_row0(fam: FormFamily) -> dict[tuple[int, int], QSeries]:
    """F^check_{0,j,r} = (1/N) sum_{j'} e(-j j'/N) F^(gcd(j', N))_r (Gamma0-level members)."""
    N = fam.N
    rows = {jp: fam.member(jp).components for jp in range(N)}
    out = _dft(N, rows, -1, Fraction(1, N))
    return {(j, r): s for j, row in out.items() for r, s in row.items()}


def inverse_repackage(F: CheckForm) -> dict[tuple[int, int], Row]:
    """F^hat_{(i,j),r} = sum_{j'} e(j j'/N) F^check_{i,j',r}."""
    out = {}
    for i in range(F.N):
        rows = {jp: F.row(i, jp) for jp in range(F.N)}
        for j, row in _dft(F.N, rows, 1, 1).items():
            out[(i, j)] = row
    return out


def forward_dft(m: int, N: int, hat: Mapping[tuple[int, int], Row]) -> CheckForm:
    """The transform inverse to :func:`inverse_repackage`."""
    comps = {}
    for i in range(N):
        rows = {jp: hat[(i, jp)] for jp in range(N)}
        for j, row in _dft(N, rows, -1, Fraction(1, N)).items():
            for r, s in row.items():
                comps[(i, j, r)] = s
    return CheckForm(m, N, comps, check=False)


# ---------------------------------------------------------------------------
# the slash engine


def completion(i: int, j: int, N: int, shift: int = 0) -> tuple[tuple[int, int], tuple[int, int]]:
    """An element of SL2(Z) with bottom row = (i/n, j/n) mod N/n, n = gcd(i, j, N).

    shift = 0 gives the lexicographically smallest completion with 0 < c < N/n;
    shift = k moves c up by k N/n (another preimage, used for independence checks).
    """
    n = math.gcd(math.gcd(i, j), N)
    n1 = N // n
    c = (i // n) % n1 + shift * n1
    if c == 0:
        raise ValueError(f"({i}, {j}) lies in row 0; no slash needed")
    d = (j // n) % n1
    while math.gcd(c, d) != 1:
        d += n1
    a = pow(d, -1, c) if c > 1 else 0
    b = (a * d - 1) // c
    return ((a, b), (c, d))


def dedekind_sum(d: int, c: int) -> Fraction:
    def saw(x: Fraction) -> Fraction:
        return Fraction(0) if x.denominator == 1 else x - math.floor(x) - Fraction(1, 2)

    return sum((saw(Fraction(k, c)) * saw(Fraction(d * k, c)) for k in range(1, c)), Fraction(0))


def eta_multiplier_angle(gamma) -> Fraction:
    """eta(gamma z) = e(angle) sqrt(-i(cz + d)) eta(z) for c > 0."""
    (a, _b), (c, d) = gamma
    if c <= 0:
        raise ValueError("multiplier formula needs c > 0")
    return Fraction(a + d, 24 * c) - dedekind_sum(d % c, c) / 2


@dataclass(frozen=True)
class EtaTerm:
    """coeff * prod eta(s tau)^e."""

    coeff: object
    factors: tuple[tuple[Fraction, int], ...]

    @property
    def weight2(self) -> int:
        return sum(e for _, e in self.factors)

    def expand(self, prec) -> QSeries:
        return eta_quotient(self.factors, prec).scale(self.coeff)

    def to_json(self) -> dict:
        return {"coeff": str(self.coeff), "eta": [[str(s), e] for s, e in self.factors]}

    @classmethod
    def from_json(cls, data: Mapping) -> "EtaTerm":
        return cls(as_rational(Fraction(str(data.get("coeff", 1)))),
                   tuple((Fraction(str(s)), int(e)) for s, e in data["eta"]))


def _factor_slash(s: Fraction, gamma):
    """eta(s gamma tau) = phase * sqrt(q/D) * sqrt(-i(c tau + d)) * eta((A tau + B)/D), s = p/q."""
    (a, b), (c, d) = gamma
    p, q = s.numerator, s.denominator
    pa, pb, qc, qd = p * a, p * b, q * c, q * d
    A = math.gcd(pa, qc)
    a1, c1 = pa // A, qc // A
    # complete (a1, c1) to gamma' and solve gamma' U = M for upper triangular U
    g, x, y = _egcd(a1, c1)
    b1, d1 = -y, x
    B = d1 * pb - b1 * qd
    D = -c1 * pb + a1 * qd
    if D <= 0:
        raise ArithmeticError("unexpected orientation in the eta slash")
    shift = B // D
    B -= shift * D
    b1, d1 = b1 + shift * a1, d1 + shift * c1
    angle = eta_multiplier_angle(((a1, b1), (c1, d1)))
    return angle, Fraction(q, D), Fraction(A, D), Fraction(B, D)


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def eta_slash(term: EtaTerm, gamma, prec) -> QSeries:
    """(c tau + d)^{-1/2} * term(gamma tau) as a q-series (principal square root), weight 1/2 terms only."""
    if term.weight2 != 1:
        raise WeightError(f"eta term {term.factors} has weight {Fraction(term.weight2, 2)}, expected 1/2")
    prec = Fraction(prec)
    data = [(e,) + _factor_slash(Fraction(s), gamma) for s, e in term.factors]
    const: object = term.coeff
    leads = [e * ratio / 24 for e, _, _, ratio, _ in data]
    out = None
    for k, (e, angle, qD, ratio, twist) in enumerate(data):
        # each factor: (e(angle) e(-1/8) sqrt(q/D))^e ; sqrt(-i(c tau+d)) = e(-1/8) sqrt(c tau + d)
        const = const * _e(e * (angle - Fraction(1, 8))) * sqrt_rational(qD ** e)
        need = prec - (sum(leads) - leads[k])
        P_in = max(need / ratio, Fraction(e, 24)) + 1
        f = eta_quotient([(1, e)], P_in).rescale(ratio, twist)
        out = f if out is None else out * f
    out = out.scale(const)
    if out.truncation is not None and out.truncation < prec:
        raise PrecisionError(f"eta slash known only below {out.truncation}")
    return _clean(out.truncate(prec))


def eta_slash_S(term: EtaTerm, prec) -> QSeries:
    """tau^{-1/2} * term(-1/tau)."""
    return eta_slash(term, ((0, -1), (1, 0)), prec)


@dataclass
class MemberSpec:
    """Components of F^(n) as sums of eta terms plus theta * theta-nullwert."""

    components: dict[int, list[EtaTerm]]
    theta: object = 0

    def expand(self, m: int, prec) -> dict[int, QSeries]:
        out = {}
        for r in range(2 * m):
            s = QSeries.zero(prec)
            for t in self.components.get(r, []):
                s = s + t.expand(prec)
            if self.theta:
                s = s + theta_nullwert(m, r, prec).scale(self.theta)
            out[r] = _clean(s.truncate(prec))
        return out


@dataclass
class EtaSlashEngine:
    m: int
    members: dict[int, MemberSpec] = field(default_factory=dict)

    def covers(self, n: int) -> bool:
        return n in self.members

    def slash(self, n: int, gamma, prec) -> Row:
        """F^(n) |_m gamma~ with gamma~ the principal-branch lift."""
        if n not in self.members:
            raise EngineGap(f"no eta description for F^({n})")
        spec = self.members[n]
        m = self.m
        raw = {}
        for r in range(2 * m):
            s = QSeries.zero(prec)
            for t in spec.components.get(r, []):
                s = s + eta_slash(t, gamma, prec)
            raw[r] = s
        Rinv = _rho_inverse(m, gamma)
        out = {}
        for r in range(2 * m):
            s = QSeries.zero(prec)
            for k in range(2 * m):
                if raw[k].is_zero() or not Rinv[r][k]:
                    continue
                s = s + raw[k].scale(Rinv[r][k])
            if spec.theta:
                s = s + theta_nullwert(m, r, prec).scale(spec.theta)
            out[r] = _clean(s.truncate(prec))
        return out

    def check_against(self, fam: FormFamily, prec) -> None:
        for n, spec in self.members.items():
            got = spec.expand(self.m, prec)
            F = fam.members[n]
            for r, s in got.items():
                if not s.agrees(F[r]):
                    raise EngineMismatch(f"engine expansion of F^({n})_{r} differs from the family member")

    def to_json(self) -> dict:
        return {"m": self.m,
                "members": {str(n): {"theta": str(sp.theta),
                                     "components": {str(r): [t.to_json() for t in ts]
                                                    for r, ts in sorted(sp.components.items())}}
                            for n, sp in sorted(self.members.items())}}

    @classmethod
    def from_json(cls, data: Mapping) -> "EtaSlashEngine":
        members = {}
        for n, body in data["members"].items():
            comps = {int(r): [EtaTerm.from_json(t) for t in ts] for r, ts in body.get("components", {}).items()}
            members[int(n)] = MemberSpec(comps, as_rational(Fraction(str(body.get("theta", 0)))))
        return cls(int(data["m"]), members)


@lru_cache(maxsize=64)
def _rho_inverse_cached(m: int, gamma: tuple) -> tuple:
    return tuple(tuple(row) for row in weil_rep(m, 1).rho_inverse(gamma))


def _rho_inverse(m: int, gamma) -> tuple:
    return _rho_inverse_cached(m, tuple(tuple(x) for x in gamma))


# ---------------------------------------------------------------------------
# the full transform


def hat_family(fam: FormFamily, engine: Optional[EtaSlashEngine], prec, shift: int = 0) -> dict[tuple[int, int], Row]:
    """F^hat_(i,j) for all (i, j) mod N."""
    N = fam.N
    hat: dict[tuple[int, int], Row] = {}
    for j in range(N):
        hat[(0, j)] = {r: s.truncate(prec) for r, s in fam.member(j).components.items()}
    for i in range(1, N):
        for j in range(N):
            n = math.gcd(math.gcd(i, j), N)
            if engine is None:
                raise EngineGap(f"row {i} needs an eta slash engine")
            hat[(i, j)] = engine.slash(n, completion(i, j, N, shift), prec)
    return hat


def repackage_full(fam: FormFamily, engine: Optional[EtaSlashEngine] = None, prec=None) -> CheckForm:
    """{F^(n)} -> F^check via F^hat and the DFT in the second index."""
    m = fam.m
    if prec is None:
        ts = [F.truncation for F in fam.members.values() if F.truncation is not None]
        if not ts:
            raise PrecisionError("exact members need an explicit prec")
        prec = min(ts)
    if engine is not None:
        if engine.m != m:
            raise FamilyError(f"engine index {engine.m} != family index {m}")
        engine.check_against(fam, prec)
    hat = hat_family(fam, engine, prec)
    F = forward_dft(m, fam.N, hat)
    F.validate()
    return F


# ---------------------------------------------------------------------------
# built-in data


def theta_family(N: int, c_N, c_1, m: int = 1, prec=8) -> tuple[FormFamily, EtaSlashEngine]:
    """F^(n) = c^(n) theta^0_m with c^(n) = c_N for n = N, else c_1 (N prime)."""
    members, specs = {}, {}
    for n in (int(d) for d in divisors(N)):
        c = c_N if n == N else c_1
        members[n] = VectorValuedForm(m, {r: theta_nullwert(m, r, prec).scale(c) for r in range(2 * m)}, N // n)
        specs[n] = MemberSpec({}, c)
    return FormFamily(N, members), EtaSlashEngine(m, specs)


F1_ETA = {0: [EtaTerm(128, ((Fraction(1), 6), (Fraction(4), 14), (Fraction(2), -19)))],
          1: [EtaTerm(1, ((Fraction(2), 23), (Fraction(1), -8), (Fraction(4), -14)))]}


def example_n2(prec=6) -> tuple[FormFamily, EtaSlashEngine]:
    """The N = 2 family with F^(1) an eta-quotient pair and F^(2) the Zagier form."""
    from .vvforms import zagier_F2

    spec1 = MemberSpec(F1_ETA)
    F1 = VectorValuedForm(1, spec1.expand(1, prec), 2)
    F2 = zagier_F2(prec)
    return FormFamily(2, {1: F1, 2: F2}), EtaSlashEngine(1, {1: spec1})


def load_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def theta_eta_terms() -> dict[int, list[EtaTerm]]:
    """theta^0_1 as eta quotients."""
    return {0: [EtaTerm(1, ((Fraction(2), 5), (Fraction(1), -2), (Fraction(4), -2)))],
            1: [EtaTerm(2, ((Fraction(4), 2), (Fraction(2), -1)))]}


__all__ = [
    "CheckForm", "EngineGap", "EngineMismatch", "EtaSlashEngine", "EtaTerm", "FamilyError", "FormFamily",
    "MemberSpec", "WeightError", "check_row0", "completion", "dedekind_sum", "eta_multiplier_angle", "eta_slash",
    "eta_slash_S", "example_n2", "forward_dft", "hat_family", "inverse_repackage", "repackage_full",
    "theta_eta_terms", "theta_family",
]
