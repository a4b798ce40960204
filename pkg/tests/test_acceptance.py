"""Acceptance criteria A1-A11, each at its stated tolerance and runtime budget."""

import math
import random
import time
from fractions import Fraction

import mpmath

from sqlift.borcherds import (
    WClass,
    WModuleData,
    borcherds_product,
    class_number_H,
    hurwitz,
    j_example,
    psi_product,
    sq_decompose,
    sq_traces,
    t_w,
)
from sqlift.heegner import cm_point, invert_coefficients, reduce_forms, replication_check, trace_singular_moduli
from sqlift.qseries import QSeries, evaluate, klein_j, required_truncation
from sqlift.repackage import example_n2, hat_family, repackage_full, theta_family
from sqlift.repth import (
    VirtualModuleTraces,
    cyclic_rational_characters,
    cyclic_table,
    lambda_trace,
    load_table,
    power_map_check,
    weight_identity,
)
from sqlift.vvforms import f0
from sqlift.weil import divisor_enumerate, rep_relations_check, weil_rep
from sqlift.heegner import BQF
from sqlift.qseries import theta_nullwert


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def test_A1_f0_coefficients(acceptance):
    f, dt = _timed(lambda: f0(14))
    want = {-3: 1, 1: -248, 4: 26752, 5: -85995, 9: -4096248, 13: -91951146}
    got = {e: f.coeff(e) for e in want}
    ok = got == want and dt < 10
    acceptance("A1", ok, f"f_3 anchors {'match' if got == want else got}; {dt:.2f}s (< 10s)")
    assert ok


def test_A2_j_product(acceptance):
    def run():
        f = f0(13 * 13 + 1)
        exps = {n: 3 * f.coeff(n * n) for n in range(1, 14)}  # q^-1 (1 - q^13) still reaches q^12
        return borcherds_product(exps, 1, 13), klein_j(13)

    (prod, j), dt = _timed(run)
    same = prod == j
    known = [prod.coeff(n) for n in (1, 2, 3)] == [196884, 21493760, 864299970]
    ok = same and known and dt < 10
    acceptance("A2", ok, f"product = E4^3/Delta through q^12: {same}; q^1..q^3 anchors: {known}; {dt:.2f}s (< 10s)")
    assert ok


def test_A3_cube_root_product(acceptance):
    def run():
        P = Fraction(7, 3)  # everything through q^2 on the q^{1/3} lattice
        P_psi = P + Fraction(2, 9)  # cubing costs 2 * (1/9) of precision
        n_max = math.ceil(3 * (P_psi + Fraction(1, 9)))
        f = f0(n_max * n_max + 1)
        exps = {n: f.coeff(n * n) for n in range(1, n_max + 1)}
        psi = borcherds_product(exps, Fraction(1, 9), P_psi, scale=Fraction(1, 3))
        return (psi ** 3).truncate(P), klein_j(8).rescale(Fraction(1, 3)).truncate(P)

    (cube, j3), dt = _timed(run)
    ok = cube == j3 and dt < 10
    acceptance("A3", ok, f"Psi^3 = j(tau/3) through q^2: {cube == j3}; {dt:.2f}s (< 10s)")
    assert ok


def test_A4_repackaging_golden(acceptance):
    def run():
        fam, eng = example_n2(3)
        hat = hat_family(fam, eng, 2)
        F = repackage_full(fam, eng, 3)
        tf, te = theta_family(2, 248, -8, prec=6)
        T = repackage_full(tf, te, 6)
        return fam, hat, F, T

    (fam, hat, F, T), dt = _timed(run)
    h0 = {e: c for e, c in hat[(1, 0)][0].items()}
    h1 = {e: c for e, c in hat[(1, 0)][1].items()}
    want0 = {Fraction(0): 8, Fraction(1, 2): 768, Fraction(1): 13328, Fraction(3, 2): 125440}
    want1 = {Fraction(1, 4): -112, Fraction(3, 4): -3584, Fraction(5, 4): -43008}
    g_hat = all(h0.get(e) == c for e, c in want0.items()) and all(h1.get(e) == c for e, c in want1.items())
    F1, F2 = fam.members[1], fam.members[2]
    g_check = all(F[(1, 0, r)].agrees((F2[r] * Fraction(1, 2) - F1[r] * Fraction(1, 2)
                                       + theta_nullwert(1, r, 3) * 8).truncate(3)) for r in (0, 1))
    rows = {(0, 0): 120, (0, 1): 128, (1, 0): -8, (1, 1): 0}
    g_theta = all(T[(i, j, r)].agrees(theta_nullwert(1, r, 6) * c) for (i, j), c in rows.items() for r in (0, 1))
    ok = g_hat and g_check and g_theta and dt < 5
    acceptance("A4", ok, f"F^hat_(1,0) expansions: {g_hat}; F^check_(1,0) identity: {g_check}; "
                         f"theta rows 120/128/-8/0: {g_theta}; {dt:.2f}s (< 5s)")
    assert ok


def _brute_hurwitz(n: int) -> Fraction:
    """Count all forms [a,b,c] with b^2 - 4ac = -n up to SL2(Z) via direct reduction, weighted by stabilizers."""
    if n == 0:
        return Fraction(-1, 12)
    if n % 4 in (1, 2):
        return Fraction(0)
    seen = {}
    for a in range(1, n + 1):
        for b in range(-a, a + 1):
            if (b * b + n) % (4 * a):
                continue
            c = (b * b + n) // (4 * a)
            R, _ = BQF(a, b, c).reduce()
            seen[R] = BQF(a, b, c).stabilizer_order()
    return sum((Fraction(1, w) for w in seen.values()), Fraction(0))


def test_A5_hurwitz(acceptance):
    def run():
        anchors = [hurwitz(n) for n in (0, 3, 4, 7, 8)]
        bad = [n for n in range(0, 201) if hurwitz(n) != _brute_hurwitz(n)]
        return anchors, bad

    (anchors, bad), dt = _timed(run)
    want = [Fraction(-1, 12), Fraction(1, 3), Fraction(1, 2), 1, 1]
    ok = anchors == want and not bad and dt < 5
    acceptance("A5", ok, f"anchors {'match' if anchors == want else anchors}; brute-force mismatches {bad}; "
                         f"{dt:.2f}s (< 5s)")
    assert ok


def random_cyclic_module(rng: random.Random, n: int) -> WModuleData:
    """Z/n module whose class functions a_D are integer combinations of the rational characters psi_d."""
    psi = cyclic_rational_characters(n)
    primes = [p for p in range(2, n + 1) if n % p == 0 and all(p % q for q in range(2, p))]
    mult = {D: {d: rng.randint(-5, 5) for d in psi} for D in (3, 4, 0)}
    classes = []
    for k in range(n):
        name = f"g^{k}"
        order = n // math.gcd(k, n)
        plus = {D: sum(mult[D][d] * psi[d][name] for d in psi) for D in (3, 4, 0)}
        powers = {p: f"g^{(k * p) % n}" for p in primes if order % p == 0}
        classes.append(WClass(name, order, order, powers, plus=plus))
    return WModuleData(1, classes)


def test_A6_product_trace_equivalence(acceptance):
    rng = random.Random(20241)

    def run():
        fails = []
        for t in range(50):
            n = rng.randint(1, 6)
            W = random_cyclic_module(rng, n)
            H = class_number_H(W)
            for c in W.classes:
                if sq_traces(W, c.name, 21, H) != t_w(W, c.name, 21, H):
                    fails.append((t, n, c.name))
            sq_decompose(W, cyclic_table(n), 21, H)  # raises unless every multiplicity is an integer
        return fails

    fails, dt = _timed(run)
    ok = not fails and dt < 60
    acceptance("A6", ok, f"50 random cyclic modules, SQ = T^W through q^20 with integral decompositions; "
                         f"mismatches {fails}; {dt:.2f}s (< 60s)")
    assert ok


def test_A7_divisor(acceptance):
    def run():
        W = j_example()
        F = W.form("1A", 1)
        coeffs = {(0, 0, D, r): c for D, r, c in F.coefficients()}
        coeffs.update({(0, 0, D, -r): c for D, r, c in F.coefficients()})
        pts = divisor_enumerate(coeffs, 1, 1, 8)
        fd = [(str(p), v) for p, v in pts if BQF(p.A, p.B, p.C).is_reduced() and -p.discriminant <= 4]
        psi = psi_product(W, "1A", 40)
        rho = mpmath.mpc(-0.5, mpmath.sqrt(3) / 2)
        T = required_truncation(float(rho.imag), 30)
        val = evaluate(psi_product(W, "1A", T), rho, 30)
        return fd, psi, val

    (fd, _psi, val), dt = _timed(run)
    want = [("(-1 + i*sqrt(3))/2", 3)]
    ok = fd == want and abs(val) < 1e-20 and dt < 30
    acceptance("A7", ok, f"fundamental-domain divisor {fd}; |Psi(rho)| = {mpmath.nstr(abs(val), 3)} (< 1e-20); "
                         f"{dt:.2f}s (< 30s)")
    assert ok


def test_A8_twisted_traces(acceptance):
    def run():
        f = f0(4 * 13 * 4 + 1)
        rel = {}
        for D1 in (5, 8, 12, 13):
            r1 = D1 % 2
            got = trace_singular_moduli(D1, r1, [(-3, 1, 3)], 60).value
            want = 3 * f.coeff(D1)
            rel[D1] = abs(got - want) / abs(want)
        inv = invert_coefficients(5, 1, [(-3, 1, 3)], 2, 60)
        return rel, inv, 3 * f.coeff(20)

    (rel, inv, want20), dt = _timed(run)
    ok_tr = all(r < 1e-6 for r in rel.values())
    ok_inv = inv[2]["C"] == want20 and inv[2]["residue"] < 1e-3
    ok = ok_tr and ok_inv and dt < 120
    worst = max(rel.values())
    acceptance("A8", ok, f"traces vs 3 c0(D1) for D1 in 5,8,12,13: worst rel. error {mpmath.nstr(worst, 3)} (< 1e-6); "
                         f"n=2 inversion {inv[2]['C']} vs {want20}, residue {inv[2]['residue']:.1e}; {dt:.2f}s (< 120s)")
    assert ok


def _random_characters(rng, CT, count):
    names = list(CT.irreducibles)
    out = []
    for _ in range(count):
        f = CT.character({chi: rng.randint(-4, 4) for chi in names})
        if CT.is_rational(f):
            out.append(f)
    return out


def test_A9_lemmas(acceptance):
    rng = random.Random(909)

    def run():
        failures = []
        groups = [(f"Z{n}", None, n) for n in range(1, 25)] + [("S3", load_table("S3"), None), ("S4", load_table("S4"), None)]
        for label, CT, n in groups:
            if n is not None:
                psi = cyclic_rational_characters(n)
                chars = []
                for _ in range(100):
                    mult = {d: rng.randint(-4, 4) for d in psi}
                    chars.append({f"g^{k}": sum(mult[d] * psi[d][f"g^{k}"] for d in psi) for k in range(n)})
                classes = [(f"g^{k}", n // math.gcd(k, n)) for k in range(n)]

                def traces(f, name, order, n=n):
                    k = int(name[2:])
                    return VirtualModuleTraces(order, {d: f[f"g^{(k * d) % n}"] for d in range(1, order + 1)
                                                       if order % d == 0})
            else:
                chars = _random_characters(rng, CT, 100)
                classes = [(c.name, c.order) for c in CT.classes]

                def traces(f, name, order, CT=CT):
                    return CT.traces_at(f, name)
            for f in chars:
                for name, order in classes:
                    T = traces(f, name, order)
                    for p in (q for q in range(2, order + 1) if order % q == 0 and all(q % s for s in range(2, q))):
                        if not power_map_check(T, p).ok:
                            failures.append((label, name, "power map", p))
                    for N in (d for d in range(1, order + 1) if order % d == 0):
                        lhs, rhs = weight_identity(T, N)
                        if lhs != rhs:
                            failures.append((label, name, "weight", N))
                    L, S = lambda_trace(T, 1, 21), lambda_trace(T, -1, 21)
                    if (L * S).truncate(21) != QSeries({0: 1}, 21):
                        failures.append((label, name, "Lambda S"))
            # additivity on one pair per group
            f, g = chars[0], chars[1]
            for name, order in classes:
                Tf, Tg = traces(f, name, order), traces(g, name, order)
                if lambda_trace(Tf + Tg, 1, 21) != (lambda_trace(Tf, 1, 21) * lambda_trace(Tg, 1, 21)).truncate(21):
                    failures.append((label, name, "additivity"))
        return failures

    failures, dt = _timed(run)
    ok = not failures and dt < 30
    acceptance("A9", ok, f"power maps, weight identity, Lambda*S = 1, additivity on Z/1..Z/24, S3, S4: "
                         f"failures {failures[:5]}; {dt:.2f}s (< 30s)")
    assert ok


def test_A10_weil_relations(acceptance):
    def run():
        cases = [(m, N) for N in range(1, 7) for m in range(1, 37) if 2 * m * N * N <= 72]
        bad = [(m, N, rep_relations_check(weil_rep(m, N)).failures()) for m, N in cases]
        return cases, [b for b in bad if b[2]]

    (cases, bad), dt = _timed(run)
    ok = not bad and dt < 60
    acceptance("A10", ok, f"{len(cases)} lattices with 2mN^2 <= 72, failures {bad}; {dt:.2f}s (< 60s)")
    assert ok


def test_A11_replication(acceptance):
    def run():
        out = {}
        for D in (-3, -4, -7):
            R = replication_check(cm_point(reduce_forms(D)[0]), 5, 40, 1e-8)
            out[D] = R
        return out

    res, dt = _timed(run)
    ok = all(R.ok for R in res.values()) and dt < 60
    worst = max(R.max_residual for R in res.values())
    acceptance("A11", ok, f"replication to q^5 at D = -3, -4, -7: worst residual {worst:.1e} (< 1e-8); "
                          f"{dt:.2f}s (< 60s)")
    assert ok
