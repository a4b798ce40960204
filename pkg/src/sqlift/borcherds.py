"""
Twined Borcherds products of weight 1/2 G-modules and their second quantization.

A rational module W of index m is given per conjugacy class g by the form
F_g with coefficients C_g(D, r).  From it we build

    Psi_g = q^{-H} exp(-sum_{n,k>0} C_{g^k}(n^2, n) q^{nk} / k),
    eta_g = prod_b eta(b tau)^{2 v_b(g | W_{0,0})},
    T_g   = Psi_g / eta_g,

and the same T_g again as the graded trace of g on the Fock space
prod_n Lambda_{-q^n}(U_n) Lambda_{-q^n}(U_0), U_n = W_{n, n^2/4m}, U_0 = -2 W_{0,0}.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Callable, Mapping, Optional, Union

from sympy import divisors, mobius, totient

from .qseries import (
    CyclotomicElement,
    PrecisionError,
    QSeries,
    QuadraticElement,
    as_rational,
    coeff_from_json,
    eta_quotient,
    is_fundamental_discriminant,
    power_product,
    series_exp,
    series_from_json,
)
from .qseries.numbers import kronecker_symbol
from .repth import (
    CharacterTable,
    ConsistencyError,
    InvalidCharacterData,
    VirtualModuleTraces,
    decompose,
    lambda_trace,
    ramanujan_sum,
    vb_from_traces,
    weight_identity,
)
from .vvforms import FormValidationError, VectorValuedForm, kohnen_unfold, plus_basis


class MissingClassNumber(KeyError):
    pass


def _divisors(n: int) -> list[int]:
    return [int(d) for d in divisors(n)]


# ---------------------------------------------------------------------------
# class numbers


@lru_cache(maxsize=None)
def hurwitz(Dabs: int) -> Fraction:
    """Hurwitz class number H(Dabs): reduced forms of discriminant -Dabs, weighted by 1/|stabilizer/+-1|."""
    if Dabs < 0:
        raise ValueError("argument must be nonnegative")
    if Dabs == 0:
        return Fraction(-1, 12)
    if Dabs % 4 in (1, 2):
        return Fraction(0)
    total = Fraction(0)
    A = 1
    while 3 * A * A <= Dabs:
        for B in range(-A + 1, A + 1):
            if (B * B + Dabs) % (4 * A):
                continue
            C = (B * B + Dabs) // (4 * A)
            if C < A or (C == A and B < 0):
                continue
            if A == B == C:
                total += Fraction(1, 3)
            elif B == 0 and A == C:
                total += Fraction(1, 2)
            else:
                total += 1
        A += 1
    return total


ClassNumberPlugin = Mapping[tuple[int, int, int], object]


def _class_number(m: int, D: int, r: int, plugin: Optional[ClassNumberPlugin]):
    if plugin is not None:
        for key in ((m, D, r % (2 * m)), (m, D, (-r) % (2 * m))):
            if key in plugin:
                return as_rational(Fraction(plugin[key]))
    if m == 1:
        return hurwitz(-D)
    raise MissingClassNumber(f"no class number H_{m}({D}, {r}); supply a plugin table")


# ---------------------------------------------------------------------------
# module data


PlusSpec = Mapping[int, object]  # D -> multiple of the plus-space basis element f_D (index 1 only)


@dataclass
class WClass:
    """One conjugacy class: its form is either explicit or a combination of plus-space basis elements."""

    name: str
    order: int
    level: int
    powers: Mapping[int, str] = field(default_factory=dict)
    form: Optional[VectorValuedForm] = None
    plus: Optional[PlusSpec] = None

    def __post_init__(self):
        if (self.form is None) == (self.plus is None):
            raise FormValidationError(f"class {self.name}: give exactly one of form / plus-space combination")
        if self.level % self.order or (self.order * self.order) % self.level:
            raise FormValidationError(f"class {self.name}: level {self.level} must satisfy o(g) | N_g | o(g)^2")
        if self.plus is not None:
            self.plus = {int(D): as_rational(Fraction(c)) for D, c in self.plus.items() if c}


class WModuleData:
    """A rational weakly holomorphic G-module of weight 1/2 and index m, class by class."""

    def __init__(self, index: int, classes: list[WClass], check: bool = True):
        if index < 1:
            raise FormValidationError("index must be positive")
        self.index = index
        self.classes = list(classes)
        self.by_name = {c.name: c for c in self.classes}
        if len(self.by_name) != len(self.classes):
            raise FormValidationError("duplicate class names")
        self._cache: dict[str, tuple[int, VectorValuedForm]] = {}
        if check:
            self.validate()

    # -- validation -------------------------------------------------------

    def validate(self) -> None:
        ids = [c for c in self.classes if c.order == 1]
        if len(ids) != 1:
            raise FormValidationError("need exactly one identity class (order 1)")
        for c in self.classes:
            if c.plus is not None and self.index != 1:
                raise FormValidationError(f"class {c.name}: plus-space data needs index 1")
            for p, target in c.powers.items():
                if target not in self.by_name:
                    raise FormValidationError(f"class {c.name}: power map {p} -> {target} leaves the class list")
            for d in _divisors(c.order):
                self.power_class(c.name, d)
            if c.form is not None:
                if c.form.index != self.index:
                    raise FormValidationError(f"class {c.name}: form index {c.form.index} != {self.index}")
                c.form.validate()
                for D, r, val in c.form.coefficients():
                    if Fraction(val).denominator != 1:
                        raise FormValidationError(f"class {c.name}: C({D},{r}) = {val} is not an integer")
            else:
                for D, val in c.plus.items():
                    if Fraction(val).denominator != 1:
                        raise FormValidationError(f"class {c.name}: multiple of f_{D} is not an integer")
        # the W_{0,0} traces must be a genuine class function with integral Frame shape
        for c in self.classes:
            try:
                vb_from_traces(self.traces(c.name, 0, 0))
            except InvalidCharacterData as exc:
                raise FormValidationError(f"class {c.name}: W_(0,0) {exc}") from exc

    @property
    def identity(self) -> str:
        return next(c.name for c in self.classes if c.order == 1)

    def power_class(self, name: str, k: int) -> str:
        """The class of g^k (rational data: primes prime to o(g) may be skipped)."""
        cls = self.by_name[name]
        k %= cls.order
        if k == 0:
            return self.identity
        cur = name
        n = k
        p = 2
        while n > 1:
            while n % p == 0:
                c = self.by_name[cur]
                if c.order % p == 0:
                    if p not in c.powers:
                        raise FormValidationError(f"power map of {cur} at p = {p} missing")
                    cur = c.powers[p]
                n //= p
            p += 1
        return cur

    # -- coefficients -----------------------------------------------------

    def form(self, name: str, prec) -> VectorValuedForm:
        """F_g known below q^prec."""
        c = self.by_name[name]
        prec = Fraction(prec)
        if c.form is not None:
            T = c.form.truncation
            if T is not None and T < prec:
                raise PrecisionError(f"class {name}: data known below q^{T}, need q^{prec}")
            return c.form
        # one expansion per class at a power-of-two precision; smaller requests truncate it
        need = 1 << max(3, math.ceil(prec) - 1).bit_length()
        cached = self._cache.get(name)
        if cached is None or cached[0] < need:
            P = 4 * need + 4
            Dmax = max(c.plus) if c.plus else 0
            basis = {f.D: f.series for f in plus_basis(max(Dmax, 0), P)}
            s = QSeries.zero(P)
            for D, mult in c.plus.items():
                if D not in basis:
                    raise FormValidationError(f"class {name}: no plus-space basis element f_{D}")
                s = s + basis[D].scale(mult)
            self._cache[name] = (need, kohnen_unfold(s).truncate(need))
        return self._cache[name][1].truncate(prec)

    def coeff(self, name: str, D, r: int, form: Optional[VectorValuedForm] = None):
        F = form if form is not None else self.form(name, Fraction(D, 4 * self.index) + 1)
        return F.coefficient(D, r)

    def traces(self, name: str, D, r: int, prec=None) -> VirtualModuleTraces:
        """tr(g^d | W_{r, D/4m}) for d | o(g)."""
        c = self.by_name[name]
        need = Fraction(D, 4 * self.index) + 1 if prec is None else prec
        vals = {}
        for d in _divisors(c.order):
            h = self.power_class(name, d)
            vals[d] = self.coeff(h, D, r, self.form(h, need))
        return VirtualModuleTraces(c.order, vals)

    # -- json -------------------------------------------------------------

    @classmethod
    def from_json(cls, data: dict) -> "WModuleData":
        m = int(data["index"])
        classes = []
        for c in data["classes"]:
            powers = {int(p): str(t) for p, t in c.get("powers", {}).items()}
            if "plus_space" in c:
                classes.append(WClass(str(c["name"]), int(c["order"]), int(c.get("level", c["order"])), powers,
                                      plus={int(D): Fraction(v) for D, v in c["plus_space"].items()}))
                continue
            if "series" in c:
                comps = {int(r): series_from_json(s) for r, s in c["series"].items()}
            else:
                trunc = c.get("truncation")
                comps = {int(r): QSeries({Fraction(D, 4 * m): coeff_from_json(v) for D, v in terms},
                                         None if trunc is None else Fraction(trunc), 4 * m)
                         for r, terms in c["components"].items()}
            form = VectorValuedForm(m, comps, int(c.get("level", c["order"])))
            classes.append(WClass(str(c["name"]), int(c["order"]), int(c.get("level", c["order"])), powers, form=form))
        return cls(m, classes)

    @classmethod
    def load(cls, name: str) -> "WModuleData":
        text = resources.files("sqlift").joinpath("data", f"{name}.json").read_text()
        return cls.from_json(json.loads(text))


def j_example(mult: int = 3) -> WModuleData:
    """The trivial-group module with F = mult * F^(2) (singular part C(-3, +-1) = mult)."""
    return WModuleData(1, [WClass("1A", 1, 1, plus={3: mult})])


def w_minus3_1() -> WModuleData:
    """Identity-class data F = 2 F^(2) + 248 theta^0_1."""
    return WModuleData(1, [WClass("1A", 1, 1, plus={3: 2, 0: 248})])


# ---------------------------------------------------------------------------
# class number and weight


def class_number_H(W: WModuleData, plugin: Optional[ClassNumberPlugin] = None):
    """H^W = sum_r sum_{D <= 0} C_e(D, r) H_m(D, r)."""
    m = W.index
    F = W.form(W.identity, Fraction(1, 4 * m))
    total = Fraction(0)
    for D, r, c in F.coefficients():
        if D <= 0 and c:
            total += Fraction(c) * _class_number(m, D, r, plugin)
    return as_rational(total)


def weight_k(W: WModuleData, name: str):
    """k_g = (1/N_g) sum_{n | N_g} phi(N_g/n) C_{g^n}(0,0), reconciled with sum_{n|N_g} v_n(g | W_{0,0})."""
    c = W.by_name[name]
    N = c.level
    k = Fraction(sum(int(totient(N // n)) * Fraction(W.coeff(W.power_class(name, n), 0, 0)) for n in _divisors(N)), N)
    T = W.traces(name, 0, 0)
    lhs, rhs = weight_identity(T, N)
    if lhs != k:
        raise ConsistencyError(f"weight of class {name}: {k} != {lhs}")
    return as_rational(k)


# ---------------------------------------------------------------------------
# products


def borcherds_product(exponents: Union[Mapping[int, int], Callable[[int], int]], H, prec,
                      scale=1) -> QSeries:
    """q^{-H} prod_{n>0} (1 - q^{scale*n})^{c(n)}, known below q^prec."""
    H, s, prec = Fraction(H), Fraction(scale), Fraction(prec)
    units = math.ceil((prec + H) / s)
    if units <= 0:
        return QSeries.zero(prec)
    get = exponents if callable(exponents) else (lambda n: exponents.get(n, 0))
    exps = {}
    for n in range(1, units):
        e = get(n)
        if Fraction(e).denominator != 1:
            raise InvalidCharacterData(f"non-integral product exponent c({n}) = {e}")
        if e:
            exps[n] = int(e)
    P = power_product(exps, units)
    M = s.denominator * Fraction(H).denominator
    return QSeries({-H + k * s: c for k, c in enumerate(P) if c}, prec, M)


def _needed_n(W: WModuleData, H, prec) -> int:
    return max(math.ceil(Fraction(prec) + Fraction(H)), 0)


def _product_traces(W: WModuleData, name: str, n_max: int) -> dict[int, VirtualModuleTraces]:
    m = W.index
    prec = Fraction(n_max * n_max, 4 * m) + 1
    return {n: W.traces(name, n * n, n, prec) for n in range(1, n_max)}


def psi_product(W: WModuleData, name: str, prec, H=None, check: bool = True) -> QSeries:
    """Psi^W_g below q^prec from the exponential form; the DFT product form is compared when check."""
    if H is None:
        H = class_number_H(W)
    H = Fraction(H)
    P = Fraction(prec) + H
    n_max = _needed_n(W, H, prec)
    traces = _product_traces(W, name, n_max)
    log = {}
    for n, T in traces.items():
        for k in range(1, math.ceil(P / n) + 1):
            if n * k >= P:
                break
            t = T.trace(k)
            if t:
                log[n * k] = log.get(n * k, 0) - Fraction(t, k)
    E = series_exp(QSeries(log, P), P) if P > 0 else QSeries.zero(P)
    psi = E.shift(-H)
    if check:
        other = psi_product_dft(W, name, prec, H, traces)
        if psi != other:
            raise ConsistencyError(f"exponential and product forms of Psi disagree for class {name}")
    return psi


def check_row0_exponents(T: VirtualModuleTraces, N: int) -> dict[int, Fraction]:
    """C-check_{0,j} = (1/N) sum_{j' mod N} e(-j j'/N) tr(g^{j'}), which depends only on gcd(j, N)."""
    out = {}
    for j in range(N):
        s = sum(T.trace(e) * ramanujan_sum(N // e, j) for e in _divisors(N))
        out[j] = Fraction(s, N)
    return out


def psi_product_dft(W: WModuleData, name: str, prec, H=None,
                    traces: Optional[Mapping[int, VirtualModuleTraces]] = None) -> QSeries:
    """q^{-H} prod_n prod_{j mod N} (1 - e(j/N) q^n)^{C-check_{0,j}(n^2, n)}.

    Factors with j in one Galois orbit share their exponent, so each orbit
    contributes a power of prod_{w primitive d-th root} (1 - w x) = Phi_d(x)
    (1 - x for d = 1), written as prod_{k|d} (1 - x^k)^{mu(d/k)}.
    """
    if H is None:
        H = class_number_H(W)
    H = Fraction(H)
    N = W.by_name[name].level
    n_max = _needed_n(W, H, prec)
    if traces is None:
        traces = _product_traces(W, name, n_max)
    exps: dict[int, int] = {}
    for n, T in traces.items():
        chk = check_row0_exponents(T, N)
        for j, e in chk.items():
            if e.denominator != 1:
                raise InvalidCharacterData(f"non-integral exponent {e} at (j, n) = ({j}, {n})")
        for e in _divisors(N):  # orbit of j with gcd(j, N) = e, i.e. primitive (N/e)-th roots
            c = int(chk[e % N])
            d = N // e
            if not c:
                continue
            for k in _divisors(d):
                mu = int(mobius(d // k))
                if mu:
                    exps[n * k] = exps.get(n * k, 0) + c * mu
    return borcherds_product(exps, H, prec)


def eta_w(W: WModuleData, name: str, prec) -> QSeries:
    """prod_b eta(b tau)^{2 v_b(g | W_{0,0})}."""
    v = vb_from_traces(W.traces(name, 0, 0))
    spec = [(b, 2 * e) for b, e in v.v.items()]
    if not spec:
        return QSeries({0: 1}, prec)
    return eta_quotient(spec, prec)


def h_exponent(W: WModuleData, H=None):
    """h = H + (dim U_0^b - dim U_0^f)/24 = H + dim W_{0,0} / 12."""
    if H is None:
        H = class_number_H(W)
    dim = W.coeff(W.identity, 0, 0)
    return as_rational(Fraction(H) + Fraction(dim, 12))


def t_w(W: WModuleData, name: str, prec, H=None) -> QSeries:
    """T^W_g = Psi^W_g / eta^W_g below q^prec."""
    if H is None:
        H = class_number_H(W)
    h = Fraction(h_exponent(W, H))
    dim = Fraction(W.coeff(W.identity, 0, 0))
    lead_eta = dim / 12
    psi = psi_product(W, name, Fraction(prec) + lead_eta + 1, H)
    eta = eta_w(W, name, Fraction(prec) + 2 * lead_eta + h + 2)
    T = (psi * eta.inverse()).truncate(prec)
    if not T.is_zero() and T.valuation() != -h:
        raise ConsistencyError(f"leading exponent of T is {T.valuation()}, expected {-h}")
    return T


def sq_traces(W: WModuleData, name: str, prec, H=None) -> QSeries:
    """q^{-h} prod_{n>0} tr(g | Lambda_{-q^n}(U_n)) tr(g | Lambda_{-q^n}(U_0))."""
    if H is None:
        H = class_number_H(W)
    h = Fraction(h_exponent(W, H))
    P = Fraction(prec) + h
    units = math.ceil(P)
    acc = QSeries({0: 1}, max(P, 0))
    if units > 0:
        U0 = W.traces(name, 0, 0).scale(-2)
        traces = _product_traces(W, name, units)
        for n in range(1, units):
            tprec = math.ceil(P / n)
            for U in (traces[n], U0):
                lam = lambda_trace(U, 1, tprec)
                acc = (acc * lam.rescale(n)).truncate(P)
    return acc.shift(-h).truncate(prec)


def sq_decompose(W: WModuleData, CT: CharacterTable, prec, H=None) -> dict:
    """Graded multiplicities of SQ(W): exponent -> irreducible -> integer."""
    names = [c.name for c in CT.classes]
    missing = set(names) - set(W.by_name)
    if missing:
        raise FormValidationError(f"character table classes {sorted(missing)} absent from the module")
    for c in CT.classes:
        for p, t in c.powers.items():
            if c.order % p == 0 and W.power_class(c.name, p) != t:
                raise FormValidationError(f"power maps of {c.name} at {p} disagree")
    series = {n: sq_traces(W, n, prec, H) for n in names}
    exps = sorted({e for s in series.values() for e, _ in s.items()})
    out = {}
    for e in exps:
        f = {n: series[n].coeff(e) for n in names}
        out[e] = decompose(f, CT)
    return out


# ---------------------------------------------------------------------------
# twisted products


def _check_twist(W: WModuleData, D1: int, r1: int) -> None:
    if D1 <= 1 or not is_fundamental_discriminant(D1):
        raise ValueError(f"D1 = {D1} must be a fundamental discriminant > 1")
    if (D1 - r1 * r1) % (4 * W.index):
        raise ValueError(f"D1 = {D1} is not r1^2 = {r1 * r1} mod {4 * W.index}")


def twisted_log_coefficients(W: WModuleData, name: str, D1: int, r1: int, prec: int) -> dict[int, Fraction]:
    """a(n') = sum_{nk = n'} (D1|k) C_{g^k}(D1 n^2, r1 n) / k, so that Psi = exp(-sqrt(D1) sum a(n') q^n')."""
    _check_twist(W, D1, r1)
    m = W.index
    need = Fraction(D1 * prec * prec, 4 * m) + 1
    out = {}
    for n in range(1, prec):
        T = W.traces(name, D1 * n * n, r1 * n, need)
        for k in range(1, prec):
            if n * k >= prec:
                break
            chi = kronecker_symbol(D1, k)
            if chi and T.trace(k):
                out[n * k] = out.get(n * k, 0) + Fraction(chi * T.trace(k), k)
    return {k: v for k, v in out.items() if v}


def twisted_psi(W: WModuleData, name: str, D1: int, r1: int, prec: int, check: bool = True) -> QSeries:
    """Psi^W_{D1, r1, g} below q^prec with coefficients in Q(sqrt(D1))."""
    a = twisted_log_coefficients(W, name, D1, r1, prec)
    log = QSeries({n: QuadraticElement(0, -v, D1) for n, v in a.items()}, prec)
    psi = series_exp(log, prec)
    if check and W.by_name[name].order == 1:
        other = twisted_psi_product(W, D1, r1, prec)
        if psi.map_coefficients(_to_cyc) != other:
            raise ConsistencyError("exponential and root-of-unity product forms of the twisted product disagree")
    return psi


def _to_cyc(c):
    if isinstance(c, QuadraticElement):
        return c.to_cyclotomic()
    return c


def twisted_psi_product(W: WModuleData, D1: int, r1: int, prec: int) -> QSeries:
    """prod_n prod_{b mod D1} (1 - e(b/D1) q^n)^{(D1|b) C(D1 n^2, r1 n)} over Q(zeta_D1), identity class."""
    _check_twist(W, D1, r1)
    e = W.identity
    need = Fraction(D1 * prec * prec, 4 * W.index) + 1
    F = W.form(e, need)
    acc = QSeries({0: 1}, prec)
    for n in range(1, prec):
        C = F.coefficient(D1 * n * n, r1 * n)
        if not C:
            continue
        for b in range(1, D1):
            chi = kronecker_symbol(D1, b)
            if chi:
                acc = (acc * _binomial_series(CyclotomicElement.root(D1, b), n, chi * int(C), prec)).truncate(prec)
    return acc


def _binomial_series(zeta, n: int, e: int, prec: int) -> QSeries:
    """(1 - zeta q^n)^e below q^prec for any integer e."""
    terms: dict[int, object] = {0: 1}
    coef: object = 1
    k = 1
    x = -zeta
    p = x
    while n * k < prec:
        coef = coef * Fraction(e - k + 1, k)
        if coef == 0:
            break
        terms[n * k] = coef * p
        p = p * x
        k += 1
    return QSeries(terms, prec)


__all__ = [
    "MissingClassNumber", "WClass", "WModuleData", "borcherds_product", "check_row0_exponents", "class_number_H",
    "eta_w", "h_exponent", "hurwitz", "j_example", "psi_product", "psi_product_dft", "sq_decompose", "sq_traces",
    "t_w", "twisted_log_coefficients", "twisted_psi", "twisted_psi_product", "w_minus3_1", "weight_k",
]
