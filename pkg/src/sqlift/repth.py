"""
Trace-level virtual modules for a single group element, and small character tables.

For g of order n acting on a rational virtual module U, the data is the
list tr(g^d | U) for d | n.  From it we recover the Frame shape
prod_b (1 - t^b)^{v_b} = tr(g | Lambda_{-t} U), the eigenvalue multiplicities
u_d, and the symmetric/exterior power traces.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from importlib import resources
from operator import mul
from typing import Mapping

from sympy import divisors, factorint, isprime, mobius, totient

from .qseries import CyclotomicElement, QSeries, as_rational, coeff_from_json, coeff_to_json, power_product


class InvalidCharacterData(ValueError):
    pass


class ConsistencyError(AssertionError):
    pass


@lru_cache(maxsize=None)
def _divisors(n: int) -> tuple[int, ...]:
    return tuple(int(d) for d in divisors(n))


@lru_cache(maxsize=None)
def _mu(n: int) -> int:
    return int(mobius(n))


@lru_cache(maxsize=None)
def _phi(n: int) -> int:
    return int(totient(n))


def ramanujan_sum(q: int, k: int) -> int:
    """c_q(k) = sum over primitive q-th roots z of z^k."""
    g = math.gcd(q, k)
    return sum(_mu(q // d) * d for d in _divisors(g))


# ---------------------------------------------------------------------------
# trace data for one element


@dataclass(frozen=True)
class VirtualModuleTraces:
    """tr(g^d | U) for every divisor d of the order n of g."""

    order: int
    traces: Mapping[int, int]
    virtual: bool = True

    def __post_init__(self):
        if self.order < 1:
            raise InvalidCharacterData("order must be positive")
        clean = {}
        for d, t in self.traces.items():
            d = int(d)
            t = as_rational(Fraction(t)) if not isinstance(t, CyclotomicElement) else t
            if isinstance(t, CyclotomicElement):
                if not t.is_rational():
                    raise InvalidCharacterData(f"tr(g^{d}) = {t} is not rational")
                t = t.to_rational()
            if Fraction(t).denominator != 1:
                raise InvalidCharacterData(f"tr(g^{d}) = {t} is not an integer")
            clean[d] = int(t)
        missing = [d for d in _divisors(self.order) if d not in clean]
        if missing:
            raise InvalidCharacterData(f"missing traces for g^d, d in {missing}")
        extra = [d for d in clean if self.order % d]
        if extra:
            raise InvalidCharacterData(f"traces given for d = {extra}, which do not divide {self.order}")
        object.__setattr__(self, "traces", dict(sorted(clean.items())))

    @property
    def dim(self) -> int:
        return self.traces[self.order]

    def trace(self, k: int) -> int:
        """tr(g^k | U); rational traces depend only on gcd(k, n)."""
        return self.traces[math.gcd(k, self.order)]

    def power(self, k: int) -> "VirtualModuleTraces":
        """The data of g^k."""
        n = self.order // math.gcd(k, self.order)
        return VirtualModuleTraces(n, {d: self.trace(k * d) for d in _divisors(n)}, self.virtual)

    def adams(self, k: int) -> "VirtualModuleTraces":
        """psi^k U at g: tr(g^d | psi^k U) = tr(g^{kd} | U)."""
        return VirtualModuleTraces(self.order, {d: self.trace(k * d) for d in _divisors(self.order)}, True)

    def __add__(self, other: "VirtualModuleTraces") -> "VirtualModuleTraces":
        n = math.lcm(self.order, other.order)
        return VirtualModuleTraces(n, {d: self.trace(d) + other.trace(d) for d in _divisors(n)}, True)

    def __neg__(self) -> "VirtualModuleTraces":
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: int) -> "VirtualModuleTraces":
        return VirtualModuleTraces(self.order, {d: c * t for d, t in self.traces.items()}, True)

    @classmethod
    def regular(cls, n: int) -> "VirtualModuleTraces":
        """The regular representation of Z/n at a generator."""
        return cls(n, {d: (n if d == n else 0) for d in _divisors(n)}, False)

    def to_json(self) -> dict:
        return {"order": self.order, "traces": {str(d): t for d, t in self.traces.items()}, "virtual": self.virtual}

    @classmethod
    def from_json(cls, data: dict) -> "VirtualModuleTraces":
        return cls(int(data["order"]), {int(k): v for k, v in data["traces"].items()}, bool(data.get("virtual", True)))


@dataclass(frozen=True)
class FrameShape:
    """prod_b (1 - t^b)^{v_b}, written b^{v_b}."""

    v: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "v", {int(b): int(e) for b, e in sorted(self.v.items()) if e})

    def __getitem__(self, b: int) -> int:
        return self.v.get(b, 0)

    @property
    def degree(self) -> int:
        return sum(b * e for b, e in self.v.items())

    def trace(self, d: int) -> int:
        """tr(g^d) = sum_{b | d} b v_b."""
        return sum(b * e for b, e in self.v.items() if d % b == 0)

    def product(self, prec: int, scale: int = 1) -> QSeries:
        """prod_b (1 - q^{scale*b})^{v_b} below q^prec."""
        exps = {scale * b: e for b, e in self.v.items()}
        return QSeries(dict(enumerate(power_product(exps, prec))), prec)

    def __str__(self):
        return " ".join(f"{b}^{e}" for b, e in self.v.items()) or "1"

    def to_json(self) -> dict:
        return {str(b): e for b, e in self.v.items()}


def vb_from_traces(T: VirtualModuleTraces) -> FrameShape:
    """v_b = (1/b) sum_{d | b} mu(b/d) tr(g^d), for b | n."""
    return _vb(T.order, tuple(T.traces.items()))


@lru_cache(maxsize=65536)
def _vb(order: int, traces: tuple[tuple[int, int], ...]) -> FrameShape:
    tr = dict(traces)
    v = {}
    for b in _divisors(order):
        s = sum(_mu(b // d) * tr[d] for d in _divisors(b))
        if s % b:
            raise InvalidCharacterData(f"v_{b} = {Fraction(s, b)} is not an integer")
        v[b] = s // b
    shape = FrameShape(v)
    for d in _divisors(order):
        if shape.trace(d) != tr[d]:
            raise ConsistencyError(f"frame shape does not reproduce tr(g^{d})")
    return shape


def ud_from_traces(T: VirtualModuleTraces) -> dict[int, int]:
    """u_d: the multiplicity of each primitive d-th root of unity as an eigenvalue of g."""
    n = T.order
    u = {}
    for d in _divisors(n):
        s = sum(T.traces[e] * ramanujan_sum(n // e, n // d) for e in _divisors(n))
        if s % n:
            raise InvalidCharacterData(f"u_{d} = {Fraction(s, n)} is not an integer")
        u[d] = s // n
        if u[d] < 0 and not T.virtual:
            raise InvalidCharacterData(f"negative multiplicity u_{d} = {u[d]} for a genuine module")
    v = vb_from_traces(T)
    for b in _divisors(n):
        if v[b] != sum(_mu(a) * u[a * b] for a in _divisors(n // b)):
            raise ConsistencyError(f"v_{b} != sum_a mu(a) u_(ab)")
    return u


def lambda_trace(T: VirtualModuleTraces, sign: int = 1, prec: int = 20) -> QSeries:
    """tr(g | Lambda_{-t} U) (sign +1) or tr(g | S_t U) (sign -1) in the variable t, below t^prec.

    Computed both from the Frame shape and as exp(-+ sum_k tr(g^k) t^k / k); the
    two must agree.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    shape = vb_from_traces(T)
    prod = shape.product(prec) if sign == 1 else FrameShape({b: -e for b, e in shape.v.items()}).product(prec)
    # exp(sum_k a_k t^k / k) via n E_n = sum_k a_k E_{n-k}, all in integers
    a = [0] + [-sign * T.trace(k) for k in range(1, prec)]
    E = [1] + [0] * (prec - 1)
    for n in range(1, prec):
        q, r = divmod(sum(map(mul, a[1:n + 1], reversed(E[:n]))), n)
        if r:
            raise ConsistencyError(f"exponential form is not integral at t^{n}")
        E[n] = q
    if prod != QSeries(dict(enumerate(E)), prec):
        raise ConsistencyError("product and exponential forms of the trace disagree")
    return prod


# ---------------------------------------------------------------------------
# lemmas


@dataclass
class CheckReport:
    name: str
    ok: bool
    failures: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"check": self.name, "ok": self.ok, "failures": list(self.failures)}


def power_map_check(T: VirtualModuleTraces, p: int) -> CheckReport:
    """v_b(g^p) = p v_{bp}(g) + [p does not divide b] v_b(g), and its prime-power iterate."""
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    if T.order % p:
        raise ValueError(f"p = {p} does not divide the order {T.order}")
    v = vb_from_traces(T)
    fails = []
    vp = vb_from_traces(T.power(p))
    for b in _divisors(T.order):
        want = p * v[b * p] + (v[b] if b % p else 0)
        if vp[b] != want:
            fails.append(f"v_{b}(g^{p}) = {vp[b]}, expected {want}")
    k, pk = 0, 1
    while T.order % (pk * p) == 0:
        k, pk = k + 1, pk * p
        vk = vb_from_traces(T.power(pk))
        for b in _divisors(T.order):
            if b % p == 0:
                want = pk * v[b * pk]
            else:
                want = sum(p ** j * v[b * p ** j] for j in range(k + 1))
            if vk[b] != want:
                fails.append(f"v_{b}(g^{pk}) = {vk[b]}, expected {want}")
    return CheckReport(f"power map p={p}", not fails, fails)


def weight_identity(T: VirtualModuleTraces, N: int) -> tuple[Fraction, int]:
    """(1/N) sum_{n|N} phi(N/n) tr(g^n)  and  sum_{n|N} v_n(g); they must agree."""
    lhs = Fraction(sum(_phi(N // n) * T.trace(n) for n in _divisors(N)), N)
    v = vb_from_traces(T)
    rhs = sum(v[n] for n in _divisors(N))
    if lhs != rhs:
        raise ConsistencyError(f"weight identity fails for N = {N}: {lhs} != {rhs}")
    return as_rational(lhs), rhs


# ---------------------------------------------------------------------------
# character tables


@dataclass(frozen=True)
class ConjugacyClass:
    name: str
    size: int
    order: int
    powers: Mapping[int, str]


class CharacterTable:
    """Classes with power maps and irreducible characters with cyclotomic values."""

    def __init__(self, classes: list[ConjugacyClass], irreducibles: Mapping[str, Mapping[str, object]],
                 check: bool = True):
        self.classes = list(classes)
        self.by_name = {c.name: c for c in self.classes}
        if len(self.by_name) != len(self.classes):
            raise InvalidCharacterData("duplicate class names")
        self.irreducibles = {k: dict(v) for k, v in irreducibles.items()}
        for chi, vals in self.irreducibles.items():
            missing = set(self.by_name) - set(vals)
            if missing:
                raise InvalidCharacterData(f"character {chi} has no value on {sorted(missing)}")
        if check:
            self.validate()

    @property
    def group_order(self) -> int:
        return sum(c.size for c in self.classes)

    def inner(self, f: Mapping[str, object], chi: Mapping[str, object]):
        total = 0
        for c in self.classes:
            a, b = f[c.name], chi[c.name]
            if a == 0 or b == 0:
                continue
            bc = b.conjugate() if isinstance(b, CyclotomicElement) else b
            total = total + c.size * a * bc
        if isinstance(total, CyclotomicElement):
            total = total.to_rational() if total.is_rational() else total
        if isinstance(total, CyclotomicElement):
            return total * Fraction(1, self.group_order)
        return as_rational(Fraction(total) / self.group_order)

    def validate(self) -> None:
        names = list(self.irreducibles)
        for i, a in enumerate(names):
            for b in names[i:]:
                val = self.inner(self.irreducibles[a], self.irreducibles[b])
                if val != (1 if a == b else 0):
                    raise InvalidCharacterData(f"row orthogonality fails for ({a}, {b}): {val}")
        if len(names) != len(self.classes):
            raise InvalidCharacterData("number of irreducibles differs from number of classes")
        identity = [c for c in self.classes if c.order == 1]
        if len(identity) != 1:
            raise InvalidCharacterData("need exactly one identity class")
        for c in self.classes:
            for p, target in c.powers.items():
                if target not in self.by_name:
                    raise InvalidCharacterData(f"power map {c.name}^{p} -> {target} leaves the table")

    @property
    def identity(self) -> str:
        return next(c.name for c in self.classes if c.order == 1)

    def power_class(self, name: str, k: int) -> str:
        """The class of g^k; primes not dividing o(g) act trivially on rational data."""
        cls = self.by_name[name]
        k = k % cls.order if cls.order > 1 else 0
        if k == 0:
            return self.identity
        cur = name
        for p, e in factorint(k).items():
            for _ in range(e):
                c = self.by_name[cur]
                if c.order % p == 0:
                    if p not in c.powers:
                        raise InvalidCharacterData(f"power map {cur}^{p} missing")
                    cur = c.powers[p]
                elif p in c.powers:
                    cur = c.powers[p]
        return cur

    def traces_at(self, f: Mapping[str, object], name: str) -> VirtualModuleTraces:
        n = self.by_name[name].order
        return VirtualModuleTraces(n, {d: f[self.power_class(name, d)] for d in _divisors(n)})

    def character(self, multiplicities: Mapping[str, int]) -> dict[str, object]:
        out: dict[str, object] = {c.name: 0 for c in self.classes}
        for chi, mlt in multiplicities.items():
            for c in self.classes:
                out[c.name] = out[c.name] + mlt * self.irreducibles[chi][c.name]
        return {k: (v.to_rational() if isinstance(v, CyclotomicElement) and v.is_rational() else v)
                for k, v in out.items()}

    def is_rational(self, f: Mapping[str, object]) -> bool:
        return all(not isinstance(v, CyclotomicElement) or v.is_rational() for v in f.values())

    def to_json(self) -> dict:
        return {
            "classes": [{"name": c.name, "size": c.size, "order": c.order,
                         "powers": {str(p): t for p, t in sorted(c.powers.items())}} for c in self.classes],
            "irreducibles": [{"name": k, "values": {c: coeff_to_json(v) for c, v in vals.items()}}
                             for k, vals in self.irreducibles.items()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CharacterTable":
        classes = [ConjugacyClass(str(c["name"]), int(c["size"]), int(c["order"]),
                                  {int(p): str(t) for p, t in c.get("powers", {}).items()})
                   for c in data["classes"]]
        irr = {str(x["name"]): {k: coeff_from_json(v) for k, v in x["values"].items()} for x in data["irreducibles"]}
        return cls(classes, irr)


def decompose(f: Mapping[str, object], CT: CharacterTable) -> dict[str, int]:
    """Multiplicities of the irreducibles in a class function; must be integers."""
    out = {}
    for chi, vals in CT.irreducibles.items():
        m = CT.inner(f, vals)
        if isinstance(m, CyclotomicElement) or Fraction(m).denominator != 1:
            raise InvalidCharacterData(f"multiplicity of {chi} is {m}, not an integer: not a virtual module")
        out[chi] = int(m)
    return out


def cyclic_table(n: int) -> CharacterTable:
    """Z/n with classes g^k (named 'g^k') and characters chi_a(g^k) = e(ak/n)."""
    names = [f"g^{k}" for k in range(n)]
    primes = [int(p) for p in factorint(n)] if n > 1 else []
    classes = [ConjugacyClass(names[k], 1, n // math.gcd(k, n), {p: names[(k * p) % n] for p in primes})
               for k in range(n)]
    irr = {f"chi{a}": {names[k]: _root(a * k, n) for k in range(n)} for a in range(n)}
    return CharacterTable(classes, irr)


def _root(k: int, n: int):
    k %= n
    if k == 0:
        return 1
    if 2 * k == n:
        return -1
    return CyclotomicElement.root(n, k)


def cyclic_rational_characters(n: int) -> dict[str, dict[str, int]]:
    """Galois-orbit sums of the characters of Z/n: psi_d(g^k) = c_d(k) for d | n."""
    return {f"psi{d}": {f"g^{k}": ramanujan_sum(d, k) for k in range(n)} for d in _divisors(n)}


def load_table(name: str) -> CharacterTable:
    """A shipped character table (``S3`` or ``S4``), or ``Z<n>`` for cyclic groups."""
    if name.upper().startswith("Z") and name[1:].isdigit():
        return cyclic_table(int(name[1:]))
    text = resources.files("sqlift").joinpath("data", f"{name}.json").read_text()
    return CharacterTable.from_json(json.loads(text))


__all__ = [
    "CharacterTable", "CheckReport", "ConjugacyClass", "ConsistencyError", "FrameShape", "InvalidCharacterData",
    "VirtualModuleTraces", "cyclic_rational_characters", "cyclic_table", "decompose", "lambda_trace", "load_table",
    "power_map_check", "ramanujan_sum", "ud_from_traces", "vb_from_traces", "weight_identity",
]
