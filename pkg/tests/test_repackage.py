"""Repackaging families {F^(n)} into F^check, the eta slash engine and the DFT identities."""

import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sqlift.qseries import QSeries, evaluate, required_truncation, theta_nullwert
from sqlift.repackage import (
    F1_ETA,
    CheckForm,
    EtaTerm,
    FamilyError,
    FormFamily,
    WeightError,
    check_row0,
    completion,
    dedekind_sum,
    eta_multiplier_angle,
    eta_slash,
    eta_slash_S,
    example_n2,
    forward_dft,
    hat_family,
    inverse_repackage,
    repackage_full,
    theta_eta_terms,
    theta_family,
)


@pytest.fixture(scope="module")
def n2():
    fam, eng = example_n2(4)
    return fam, eng, repackage_full(fam, eng, 4)


@given(st.integers(1, 40), st.integers(1, 40))
def test_dedekind_reciprocity(c, d):
    assume(math.gcd(c, d) == 1)
    lhs = dedekind_sum(d, c) + dedekind_sum(c, d)
    assert lhs == Fraction(-1, 4) + Fraction(c * c + d * d + 1, 12 * c * d)


def eta_numeric(tau):
    """q^{1/24} prod (1 - q^n), enough factors for about 20 digits."""
    q = mpmath.exp(2j * mpmath.pi * tau)
    out = mpmath.exp(2j * mpmath.pi * tau / 24)
    for n in range(1, math.ceil(50 / (2 * math.pi * float(tau.imag))) + 2):
        out *= 1 - q ** n
    return out


gammas = st.tuples(st.integers(1, 4), st.integers(-5, 5)).filter(lambda cd: math.gcd(*cd) == 1)


def complete(c, d):
    """Some (a, b) with a d - b c = 1."""
    a = next(a for a in range(c) if (a * d - 1) % c == 0)
    return ((a, (a * d - 1) // c), (c, d))


@settings(max_examples=30, deadline=None)
@given(gammas)
def test_eta_multiplier(cd):
    gamma = complete(*cd)
    (a, b), (c, d) = gamma
    with mpmath.workdps(25):
        tau = mpmath.mpc("0.137", "0.9")
        lhs = eta_numeric((a * tau + b) / (c * tau + d))
        angle = eta_multiplier_angle(gamma)
        eps = mpmath.exp(2j * mpmath.pi * mpmath.mpf(angle.numerator) / angle.denominator)
        rhs = eps * mpmath.sqrt(-1j * (c * tau + d)) * eta_numeric(tau)
        assert abs(lhs - rhs) < 1e-12


@settings(max_examples=12, deadline=None)
@given(gammas, st.sampled_from([theta_eta_terms()[0][0], theta_eta_terms()[1][0], F1_ETA[0][0], F1_ETA[1][0]]))
def test_eta_slash_numerically(cd, term):
    gamma = complete(*cd)
    (a, b), (c, d) = gamma
    with mpmath.workdps(30):
        tau = mpmath.mpc("0.21", "1.4")
        s = eta_slash(term, gamma, 30)
        g_tau = (a * tau + b) / (c * tau + d)
        T = required_truncation(float(g_tau.imag), 15, 24)
        lhs = evaluate(term.expand(T), g_tau, 15) / mpmath.sqrt(c * tau + d)
        assert abs(lhs - evaluate(s, tau, 15)) < 1e-8 * max(1, abs(lhs))


def test_theta_is_S_invariant():
    th = theta_eta_terms()
    # theta^0_1 | S = rho(S)^{-1} applied to the vector: components mix with e(1/8)/sqrt 2
    s0 = eta_slash_S(th[0][0], 6)
    s1 = eta_slash_S(th[1][0], 6)
    t0, t1 = theta_nullwert(1, 0, 6), theta_nullwert(1, 1, 6)
    for e in (0, Fraction(1, 4), 1, Fraction(9, 4)):
        lhs0 = complex(s0.coeff(e).to_mpc()) if hasattr(s0.coeff(e), "to_mpc") else complex(s0.coeff(e))
        lhs1 = complex(s1.coeff(e).to_mpc()) if hasattr(s1.coeff(e), "to_mpc") else complex(s1.coeff(e))
        z = complex(mpmath.exp(-1j * mpmath.pi / 4)) / math.sqrt(2)
        assert abs(lhs0 - z * (t0.coeff(e) + t1.coeff(e))) < 1e-12
        assert abs(lhs1 - z * (t0.coeff(e) - t1.coeff(e))) < 1e-12


def test_weight_is_checked():
    with pytest.raises(WeightError):
        eta_slash(EtaTerm(1, ((Fraction(1), 24),)), ((0, -1), (1, 0)), 3)


@given(st.integers(0, 11), st.integers(0, 11), st.sampled_from([2, 3, 4, 6, 12]), st.integers(0, 2))
def test_completion(i, j, N, shift):
    n = math.gcd(math.gcd(i, j), N)
    assume((i // n) % (N // n) != 0 or shift)
    try:
        (a, b), (c, d) = completion(i, j, N, shift)
    except ValueError:
        assume(False)
    assert a * d - b * c == 1
    assert (c - i // n) % (N // n) == 0 and (d - j // n) % (N // n) == 0


def test_golden_hat_expansions(n2):
    fam, eng, _ = n2
    hat = hat_family(fam, eng, 2)
    h0, h1 = hat[(1, 0)][0], hat[(1, 0)][1]
    assert [h0.coeff(e) for e in (0, Fraction(1, 2), 1, Fraction(3, 2))] == [8, 768, 13328, 125440]
    assert [h1.coeff(e) for e in (Fraction(1, 4), Fraction(3, 4), Fraction(5, 4))] == [-112, -3584, -43008]


@pytest.mark.parametrize("shift", [1, 2])
def test_hat_is_independent_of_completion(n2, shift):
    fam, eng, _ = n2
    a, b = hat_family(fam, eng, 2), hat_family(fam, eng, 2, shift)
    assert all(a[k][r] == b[k][r] for k in a for r in a[k])


def test_dft_roundtrip(n2):
    _, _, F = n2
    back = forward_dft(F.m, F.N, inverse_repackage(F))
    assert back.agrees(F)


def test_row0_is_dft_of_members(n2):
    fam, _, F = n2
    row0 = check_row0(fam)
    assert all(F.row(0, j)[r].agrees(s) for (j, r), s in row0.items())


def test_check_identity(n2):
    # F^check_(1,0) = (F^(2) - F^(1))/2 + 8 theta^0_1
    fam, _, F = n2
    th = [theta_nullwert(1, r, 4) for r in (0, 1)]
    for r in (0, 1):
        want = (fam.members[2][r] - fam.members[1][r]).scale(Fraction(1, 2)) + th[r].scale(8)
        assert F.row(1, 0)[r].agrees(want)


def test_theta_family_rows():
    fam, eng = theta_family(2, 248, -8, prec=6)
    F = repackage_full(fam, eng, 6)
    scal = {}
    for key in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        s = F.row(*key)[0]
        t = theta_nullwert(1, 0, 6)
        scal[key] = s.coeff(0) / t.coeff(0) if s.coeff(0) else 0
    assert sorted(scal.values()) == sorted([120, 128, -8, 0])


def test_json_roundtrip(n2):
    fam, _, F = n2
    assert FormFamily.from_json(fam.to_json()).to_json() == fam.to_json()
    assert CheckForm.from_json(F.to_json()).agrees(F)


def test_checkform_rejects_wrong_exponent():
    with pytest.raises(FamilyError):
        CheckForm(1, 2, {(0, 0, 0): QSeries({Fraction(1, 3): 1}, 2, 3)})
