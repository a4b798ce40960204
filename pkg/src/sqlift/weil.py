"""
The lattices L_{m,N}, their Weil representations and the CM points of dual vectors.

L_{m,N} consists of the traceless matrices lambda(c, b, a) = [[a, b/m], [Nc, -a]]
with integer a, b, c and quadratic form Q = m a^2 + N b c.  Its discriminant
group L*/L has order 2|m| N^2 and is indexed by triples (i, j, r) with
lambda(i/N, j/N, r/2m) as representative.

Relation checks run exactly: matrices of the form c * A, where A has root of
unity entries, are stored as integer arrays over Z[x]/(Phi_L(x)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping

import mpmath
import numpy as np

from .qseries import CyclotomicElement, as_rational, root_of_unity, sqrt_rational
from .qseries.numbers import cyclotomic_polynomial, euler_phi

Index = tuple[int, int, int]


class NotADivisorPoint(ValueError):
    """lambda^perp is empty: Q(lambda) >= 0."""


class CuspContribution(ValueError):
    """c = 0: the vector contributes at the cusp, not at a point of H."""


class RelationFailure(AssertionError):
    def __init__(self, relation: str, detail: str = ""):
        super().__init__(f"{relation} failed" + (f": {detail}" if detail else ""))
        self.relation = relation


# ---------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class LatticeLmN:
    m: int
    N: int = 1

    def __post_init__(self):
        if self.m == 0:
            raise ValueError("m must be nonzero")
        if self.N < 1:
            raise ValueError("N must be positive")

    @property
    def sign(self) -> int:
        return 1 if self.m > 0 else -1

    @property
    def order(self) -> int:
        return 2 * abs(self.m) * self.N ** 2

    def discriminant_group(self) -> list[Index]:
        n, mm = self.N, 2 * abs(self.m)
        return [(i, j, r) for i in range(n) for j in range(n) for r in range(mm)]

    def representative(self, idx: Index) -> "LatticeVector":
        i, j, r = idx
        return LatticeVector(Fraction(i, self.N), Fraction(j, self.N), Fraction(r, 2 * self.m))

    def class_of(self, v: "LatticeVector") -> Index:
        if not v.in_dual(self):
            raise ValueError(f"{v} is not in the dual lattice")
        return (int(self.N * v.c) % self.N, int(self.N * v.b) % self.N, int(2 * self.m * v.a) % (2 * abs(self.m)))


def _num(x):
    if isinstance(x, (int, Fraction, str)):
        return as_rational(Fraction(x))
    return x


@dataclass(frozen=True)
class LatticeVector:
    """lambda(c, b, a) = [[a, b/m], [Nc, -a]]; entries may also be symbolic or mpmath numbers."""

    c: object
    b: object
    a: object

    def __post_init__(self):
        object.__setattr__(self, "c", _num(self.c))
        object.__setattr__(self, "b", _num(self.b))
        object.__setattr__(self, "a", _num(self.a))

    def matrix(self, m: int, N: int) -> list[list]:
        return [[self.a, _div(self.b, m)], [N * self.c, -self.a]]

    def _rational(self) -> bool:
        return all(isinstance(x, (int, Fraction)) for x in (self.c, self.b, self.a))

    def in_lattice(self, L: LatticeLmN) -> bool:
        return self._rational() and all(Fraction(x).denominator == 1 for x in (self.c, self.b, self.a))

    def in_dual(self, L: LatticeLmN) -> bool:
        if not self._rational():
            return False
        return all(Fraction(x).denominator == 1 for x in (L.N * self.c, L.N * self.b, 2 * L.m * self.a))

    def __mul__(self, x):
        return LatticeVector(x * self.c, x * self.b, x * self.a)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __str__(self):
        return f"lambda({self.c}, {self.b}, {self.a})"


def _div(x, m: int):
    if isinstance(x, (int, Fraction)):
        return as_rational(Fraction(x) / m)
    return x / m


def qform(L: LatticeLmN, v: LatticeVector):
    """Q(lambda(c, b, a)) = m a^2 + N b c."""
    return _num_out(L.m * v.a * v.a + L.N * v.b * v.c)


def bilinear(L: LatticeLmN, u: LatticeVector, v: LatticeVector):
    """(u, v) = 2 m a a' + N (b' c + b c'), so that Q(v) = (v, v)/2."""
    return _num_out(2 * L.m * u.a * v.a + L.N * (v.b * u.c + u.b * v.c))


def _num_out(x):
    return as_rational(x) if isinstance(x, (int, Fraction)) else x


# ---------------------------------------------------------------------------
# exact arithmetic in Z[x]/(Phi_L) on numpy arrays


class _CycloArrays:
    """Integer arrays (..., L) read as polynomials in zeta_L, reduced to degree < phi(L)."""

    def __init__(self, L: int):
        self.L = L
        self.phi = euler_phi(L)
        self.cyc = np.array(cyclotomic_polynomial(L), dtype=np.int64)

    def monomials(self, exps: np.ndarray) -> np.ndarray:
        out = np.zeros(exps.shape + (self.L,), dtype=np.int64)
        np.put_along_axis(out, (exps % self.L)[..., None], 1, axis=-1)
        return out

    def reduce(self, a: np.ndarray) -> np.ndarray:
        a = a.copy()
        phi, L = self.phi, self.L
        low = self.cyc[:phi]
        for k in range(L - 1, phi - 1, -1):
            top = a[..., k]
            if np.any(top):
                a[..., k - phi:k] -= top[..., None] * low
                a[..., k] = 0
        return a

    def matmul(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Product of matrices with cyclic-convolution entries; exact via a rounding guard."""
        Xf = np.fft.rfft(X.astype(np.float64), axis=-1)
        Yf = np.fft.rfft(Y.astype(np.float64), axis=-1)
        Zf = np.einsum("ijf,jkf->ikf", Xf, Yf)
        Z = np.fft.irfft(Zf, n=self.L, axis=-1)
        R = np.rint(Z)
        if np.max(np.abs(Z - R), initial=0.0) > 1e-3:
            raise ArithmeticError("floating point convolution lost exactness")
        return self.reduce(R.astype(np.int64))

    def scalar_mul(self, g: np.ndarray, X: np.ndarray) -> np.ndarray:
        Xf = np.fft.rfft(X.astype(np.float64), axis=-1)
        gf = np.fft.rfft(g.astype(np.float64))
        Z = np.fft.irfft(Xf * gf, n=self.L, axis=-1)
        R = np.rint(Z)
        if np.max(np.abs(Z - R), initial=0.0) > 1e-3:
            raise ArithmeticError("floating point convolution lost exactness")
        return self.reduce(R.astype(np.int64))

    def shift(self, X: np.ndarray, k: int) -> np.ndarray:
        return self.reduce(np.roll(X, k % self.L, axis=-1))

    def from_element(self, x) -> np.ndarray:
        """Integer coefficient vector of an algebraic integer of Q(zeta_L)."""
        if not isinstance(x, CyclotomicElement):
            x = CyclotomicElement(1, {0: x})
        x = x.embed(self.L)
        if any(Fraction(c).denominator != 1 for c in x.coeffs):
            raise ValueError("element is not integral in the power basis")
        out = np.zeros(self.L, dtype=np.int64)
        out[:len(x.coeffs)] = [int(c) for c in x.coeffs]
        return out

    def identity(self, d: int, scale: int = 1) -> np.ndarray:
        out = np.zeros((d, d, self.L), dtype=np.int64)
        out[np.arange(d), np.arange(d), 0] = scale
        return out

    def to_element(self, v: np.ndarray) -> CyclotomicElement:
        return CyclotomicElement(self.L, [int(x) for x in v[:self.phi]])


# ---------------------------------------------------------------------------
# Weil representation


Matrix = list[list]


@dataclass(frozen=True)
class WeilRep:
    """rho_{m,N} on C[L*/L]: rhoT = diag(e(Q(delta))), rhoS = scalar * (e(-(delta, delta')))."""

    m: int
    N: int
    order: int
    labels: tuple[Index, ...]
    t_exp: tuple[int, ...]
    s_exp: np.ndarray = field(compare=False, repr=False)
    sqrt_disc: object = field(compare=False, repr=False)

    @property
    def sign(self) -> int:
        return 1 if self.m > 0 else -1

    @property
    def dim(self) -> int:
        return len(self.labels)

    def position(self, idx: Index) -> int:
        i, j, r = idx
        N, mm = self.N, 2 * abs(self.m)
        return ((i % N) * N + (j % N)) * mm + (r % mm)

    @property
    def s_scalar(self) -> CyclotomicElement:
        """e(-sgn(m)/8) / sqrt(|2 m N^2|)."""
        return root_of_unity(Fraction(-self.sign, 8)) * _inverse(self.sqrt_disc)

    def t_entry(self, k: int) -> CyclotomicElement:
        return CyclotomicElement.root(self.order, self.t_exp[k])

    @cached_property
    def rhoT(self) -> list[CyclotomicElement]:
        """Diagonal of rho(T~)."""
        return [self.t_entry(k) for k in range(self.dim)]

    @cached_property
    def rhoS(self) -> Matrix:
        c = self.s_scalar
        L = self.order
        roots = [c * CyclotomicElement.root(L, k) for k in range(L)]
        return [[roots[int(self.s_exp[x, y])] for y in range(self.dim)] for x in range(self.dim)]

    def with_t_phase(self, position: int, shift: int) -> "WeilRep":
        """A copy with one rhoT exponent moved by shift/order (negative control for the checks)."""
        t = list(self.t_exp)
        t[position] = (t[position] + shift) % self.order
        return WeilRep(self.m, self.N, self.order, self.labels, tuple(t), self.s_exp, self.sqrt_disc)

    # -- metaplectic elements ---------------------------------------------

    def rho(self, gamma) -> Matrix:
        """rho(gamma~) for gamma in SL2(Z), lifted with the principal branch of sqrt(c tau + d)."""
        word, sign = metaplectic_word(gamma)
        d = self.dim
        out = _cyc_identity(d)
        for g, k in word:
            if g == "T":
                out = [[out[x][y] * self.t_entry(y) ** k if k >= 0 else out[x][y] * self.t_entry(y).conjugate() ** (-k)
                        for y in range(d)] for x in range(d)]
            else:
                out = _cyc_matmul(out, self.rhoS)
        if sign < 0:
            out = [[-x for x in row] for row in out]
        return out

    def rho_inverse(self, gamma) -> Matrix:
        R = self.rho(gamma)
        return [[R[y][x].conjugate() for y in range(self.dim)] for x in range(self.dim)]

    def to_json(self) -> dict:
        from .qseries import coeff_to_json

        return {
            "m": self.m,
            "N": self.N,
            "labels": [list(x) for x in self.labels],
            "rhoT": [coeff_to_json(x) for x in self.rhoT],
            "rhoS": [[coeff_to_json(x) for x in row] for row in self.rhoS],
        }


def _inverse(x):
    if isinstance(x, CyclotomicElement):
        return x.inverse()
    return as_rational(1 / Fraction(x))


def _cyc_identity(d: int) -> Matrix:
    return [[1 if x == y else 0 for y in range(d)] for x in range(d)]


def _cyc_matmul(A: Matrix, B: Matrix) -> Matrix:
    n, k, p = len(A), len(B), len(B[0])
    out = []
    for x in range(n):
        row = []
        for y in range(p):
            acc = 0
            for z in range(k):
                a = A[x][z]
                if a == 0:
                    continue
                b = B[z][y]
                if b == 0:
                    continue
                acc = acc + a * b
            row.append(acc)
        out.append(row)
    return out


def weil_rep(m: int, N: int = 1) -> WeilRep:
    lat = LatticeLmN(m, N)
    mm = 2 * abs(m)
    root = sqrt_rational(mm * N * N)
    L = math.lcm(8, 2 * mm, N, root.order if isinstance(root, CyclotomicElement) else 1)
    labels = tuple(lat.discriminant_group())
    i = np.array([x[0] for x in labels], dtype=np.int64)
    j = np.array([x[1] for x in labels], dtype=np.int64)
    r = np.array([x[2] for x in labels], dtype=np.int64)
    # e(r^2/4m + ij/N) and e(-rr'/2m - (ij' + ji')/N) as exponents of zeta_L
    t = (r * r * (L // (4 * abs(m))) * lat.sign + i * j * (L // N)) % L
    s = (-(np.outer(r, r) * (L // mm) * lat.sign) - (np.outer(i, j) + np.outer(j, i)) * (L // N)) % L
    return WeilRep(m, N, L, labels, tuple(int(x) for x in t), s, root)


@dataclass
class RelationReport:
    m: int
    N: int
    results: dict[str, bool]
    details: dict[str, str]

    @property
    def ok(self) -> bool:
        return all(self.results.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.results.items() if not v]

    def raise_on_failure(self) -> None:
        bad = self.failures()
        if bad:
            raise RelationFailure(bad[0], self.details.get(bad[0], ""))

    def to_json(self) -> dict:
        return {"m": self.m, "N": self.N, "ok": self.ok, "relations": dict(self.results), "details": dict(self.details)}


def rep_relations_check(W: WeilRep) -> RelationReport:
    """Exact check of S^2 = e(-sgn/4) P, (ST)^3 = S^2, S^8 = 1, unitarity and symmetry.

    With rhoS = c A, where c = e(-sgn/8)/g and g^2 = |D|, these become
    A^2 = |D| P, e(-sgn/8) (A T)^3 = g A^2, A^8 = |D|^4 and A A* = |D|.
    """
    Z = _CycloArrays(W.order)
    d, L, D = W.dim, W.order, W.dim  # |D| = |L*/L| = 2|m|N^2
    results: dict[str, bool] = {}
    details: dict[str, str] = {}

    g = Z.from_element(W.sqrt_disc)
    g2 = Z.scalar_mul(g, g[None, None, :])[0, 0]
    results["normalization"] = bool(np.array_equal(g2, Z.reduce(Z.from_element(D))))
    if not results["normalization"]:
        details["normalization"] = "scalar of rhoS does not square to 1/|2mN^2|"

    results["S symmetric"] = bool(np.array_equal(W.s_exp, W.s_exp.T))

    A = Z.reduce(Z.monomials(W.s_exp))
    t = np.array(W.t_exp, dtype=np.int64)
    AT = Z.reduce(Z.monomials((W.s_exp + t[None, :]) % L))  # A T scales column y by e(t_y)

    A2 = Z.matmul(A, A)
    P = np.zeros((d, d, L), dtype=np.int64)
    for x, idx in enumerate(W.labels):
        y = W.position(tuple(-k for k in idx))
        P[y, x, 0] = D
    results["S^2 = e(-sgn/4) P"] = bool(np.array_equal(A2, Z.reduce(P)))
    if not results["S^2 = e(-sgn/4) P"]:
        details["S^2 = e(-sgn/4) P"] = "rhoS^2 is not the signed index negation"

    AT3 = Z.matmul(Z.matmul(AT, AT), AT)
    lhs = Z.shift(AT3, -W.sign * L // 8)
    rhs = Z.scalar_mul(g, A2)
    results["(ST)^3 = S^2"] = bool(np.array_equal(lhs, rhs))
    if not results["(ST)^3 = S^2"]:
        bad = np.argwhere(np.any(lhs != rhs, axis=-1))[0]
        details["(ST)^3 = S^2"] = f"first mismatch at {W.labels[bad[0]]}, {W.labels[bad[1]]}"

    A4 = Z.matmul(A2, A2)
    A8 = Z.matmul(A4, A4)
    results["S^8 = 1"] = bool(np.array_equal(A8, Z.identity(d, D ** 4)))

    Astar = Z.reduce(Z.monomials((-W.s_exp.T) % L))
    results["S unitary"] = bool(np.array_equal(Z.matmul(A, Astar), Z.identity(d, D)))
    results["T unitary"] = all(0 <= x < L for x in W.t_exp)
    return RelationReport(W.m, W.N, results, details)


# ---------------------------------------------------------------------------
# metaplectic words


def metaplectic_word(gamma) -> tuple[list[tuple[str, int]], int]:
    """Write gamma = T^{k1} S T^{k2} S ... and return the sign needed for the principal lift.

    The product of the lifts T~ = (T, 1), S~ = (S, sqrt(tau)) along the word
    differs from (gamma, sqrt(c tau + d)) by (I, +-1); the sign is found by
    evaluating both multipliers at a fixed point.
    """
    (a, b), (c, d) = gamma
    if a * d - b * c != 1:
        raise ValueError("gamma must have determinant 1")
    word: list[tuple[str, int]] = []
    while c != 0:
        k = _round_div(a, c)
        if k:
            word.append(("T", k))
        a, b = a - k * c, b - k * d
        word.append(("S", 1))
        a, b, c, d = c, d, -a, -b
    if a == 1:
        if b:
            word.append(("T", b))
    else:
        word.extend([("S", 1), ("S", 1)])
        if b:
            word.append(("T", -b))
    word = _merge(word)
    return word, _lift_sign(word, gamma)


def _round_div(a: int, c: int) -> int:
    return math.floor(Fraction(a, c) + Fraction(1, 2))


def _merge(word):
    out: list[tuple[str, int]] = []
    for g, k in word:
        if out and g == "T" and out[-1][0] == "T":
            k += out[-1][1]
            out.pop()
            if k:
                out.append(("T", k))
        else:
            out.append((g, k))
    return out


def _lift_sign(word, gamma) -> int:
    with mpmath.workdps(30):
        tau0 = mpmath.mpc("0.123", "1.71")
        u = mpmath.mpc(1)
        z = tau0
        for g, k in reversed(word):
            if g == "T":
                z = z + k
            else:
                u *= mpmath.sqrt(z)
                z = -1 / z
        (_, _), (c, d) = gamma
        target = mpmath.sqrt(c * tau0 + d)
        ratio = u / target
        if abs(ratio - 1) < 1e-10:
            return 1
        if abs(ratio + 1) < 1e-10:
            return -1
        raise ArithmeticError("metaplectic sign could not be resolved")


# ---------------------------------------------------------------------------
# cusp data, Z_L and CM points


@dataclass(frozen=True)
class CuspData:
    ell: LatticeVector
    ell_prime: LatticeVector
    K_m: int
    kappa: LatticeVector
    kappa_prime: LatticeVector


def cusp_data_infinity(L: LatticeLmN) -> CuspData:
    if L.m <= 0:
        raise ValueError("cusp data needs signature (2,1), i.e. m > 0")
    return CuspData(
        ell=LatticeVector(0, 1, 0),
        ell_prime=LatticeVector(Fraction(1, L.N), 0, 0),
        K_m=L.m,
        kappa=LatticeVector(0, 0, 1),
        kappa_prime=LatticeVector(0, 0, Fraction(1, 2 * L.m)),
    )


def z_l(tau, m: int, N: int = 1) -> Matrix:
    """Z_L(tau) = lambda(1/N, -m tau^2, tau) = [[tau, -tau^2], [1, -tau]]."""
    return [[tau, -tau * tau], [1, -tau]]


def z_l_vector(tau, m: int, N: int = 1) -> LatticeVector:
    return LatticeVector(Fraction(1, N), -m * tau * tau, tau)


@dataclass(frozen=True)
class CMPoint:
    """The root (-B + i sqrt(4AC - B^2))/(2A) in H of a primitive form A X^2 + B X + C, A > 0."""

    A: int
    B: int
    C: int

    def __post_init__(self):
        if self.A <= 0:
            raise ValueError("leading coefficient must be positive")
        if self.discriminant >= 0:
            raise ValueError("form is not positive definite")

    @classmethod
    def from_quadratic(cls, A, B, C) -> "CMPoint":
        A, B, C = (Fraction(x) for x in (A, B, C))
        den = math.lcm(A.denominator, B.denominator, C.denominator)
        A, B, C = int(A * den), int(B * den), int(C * den)
        g = math.gcd(A, B, C)
        if A < 0:
            g = -g
        return cls(A // g, B // g, C // g)

    @property
    def discriminant(self) -> int:
        return self.B * self.B - 4 * self.A * self.C

    @property
    def real(self) -> Fraction:
        return Fraction(-self.B, 2 * self.A)

    @property
    def imag_squared(self) -> Fraction:
        return Fraction(-self.discriminant, 4 * self.A * self.A)

    def to_mpc(self, digits: int = 30) -> mpmath.mpc:
        with mpmath.workdps(digits + 10):
            return mpmath.mpc(mpmath.mpf(-self.B) / (2 * self.A),
                              mpmath.sqrt(-self.discriminant) / (2 * self.A))

    def __str__(self):
        return f"({-self.B} + i*sqrt({-self.discriminant}))/{2 * self.A}"

    def to_json(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C, "point": str(self)}


def lambda_perp(v: LatticeVector, m: int, N: int = 1) -> CMPoint:
    """The upper half-plane root of m N c X^2 - 2 m a X - b."""
    L = LatticeLmN(m, N)
    if m <= 0:
        raise ValueError("divisor points need m > 0")
    Q = qform(L, v)
    if Q >= 0:
        raise NotADivisorPoint(f"Q({v}) = {Q} is not negative")
    if v.c == 0:
        raise CuspContribution(f"{v} has c = 0")
    sgn = 1 if v.c > 0 else -1
    return CMPoint.from_quadratic(sgn * m * N * v.c, -sgn * 2 * m * v.a, -sgn * v.b)


def divisor_enumerate(coeffs: Mapping[tuple[int, int, int, int], object], m: int, N: int = 1,
                      height_bound: int = 20) -> list[tuple[CMPoint, object]]:
    """Points lambda^perp with nonzero multiplicity, for primitive directions of height <= height_bound.

    ``coeffs`` maps (i, j, D, r) to the check-form coefficient of q^{D/4m} in
    component (i, j, r); D is rational when N > 1.  Only entries with D < 0 matter.  The multiplicity of
    the direction of lambda sums the coefficient at the class of x lambda and
    D = 4m Q(x lambda) over the positive multiples x lambda in L*.
    """
    if m <= 0:
        raise ValueError("divisor points need m > 0")
    L = LatticeLmN(m, N)
    sing = {}
    for (i, j, D, r), val in coeffs.items():
        if D < 0 and val != 0:
            key = (i % N, j % N, as_rational(Fraction(D)), r % (2 * m))
            if key in sing and sing[key] != val:
                raise ValueError(f"conflicting coefficients for class {key}")
            sing[key] = val
    if not sing:
        return []
    dmin = min(k[2] for k in sing)
    out: dict[CMPoint, object] = {}
    H = int(height_bound)
    for c in range(1, H + 1):
        for b in range(-H, H + 1):
            for a in range(-H, H + 1):
                if math.gcd(c, b, a) != 1:
                    continue
                Q = m * a * a + N * b * c
                if Q >= 0:
                    continue
                g = math.gcd(N * c, N * b, 2 * m * a)  # x = k/g gives the multiples in L*
                total = 0
                k = 1
                while True:
                    x = Fraction(k, g)
                    D = 4 * m * x * x * Q
                    if D < dmin:
                        break
                    w = LatticeVector(x * c, x * b, x * a)
                    i, j, r = L.class_of(w)
                    total = total + sing.get((i, j, as_rational(D), r), 0)
                    k += 1
                if total != 0:
                    out[lambda_perp(LatticeVector(c, b, a), m, N)] = total
    return sorted(out.items(), key=lambda kv: (kv[0].A, kv[0].B, kv[0].C))


__all__ = [
    "CMPoint", "CuspContribution", "CuspData", "LatticeLmN", "LatticeVector", "NotADivisorPoint",
    "RelationFailure", "RelationReport", "WeilRep", "bilinear", "cusp_data_infinity", "divisor_enumerate",
    "lambda_perp", "metaplectic_word", "qform", "rep_relations_check", "weil_rep", "z_l", "z_l_vector",
]
