"""Binary quadratic forms, genus characters, singular moduli and twisted traces."""

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqlift.borcherds import hurwitz
from sqlift.heegner import (
    BQF,
    GenusCharacterError,
    J_at,
    UnsupportedLevel,
    UntrustedInversion,
    cm_point,
    genus_character,
    invert_coefficients,
    j_at,
    kronecker,
    reduce_forms,
    replication_check,
    trace_singular_moduli,
    twisted_divisor,
)
from sqlift.qseries import QSeries, eisenstein_E4, eta_quotient
from sqlift.vvforms import f0
from sqlift.weil import CMPoint

forms = st.tuples(st.integers(1, 30), st.integers(-30, 30), st.integers(1, 30)).filter(
    lambda t: t[1] ** 2 - 4 * t[0] * t[2] < 0)
sl2_words = st.lists(st.sampled_from(["S", "T", "t"]), max_size=8)


def word(w):
    S, T, Ti = ((0, -1), (1, 0)), ((1, 1), (0, 1)), ((1, -1), (0, 1))
    M = ((1, 0), (0, 1))
    for g in w:
        G = {"S": S, "T": T, "t": Ti}[g]
        M = ((M[0][0] * G[0][0] + M[0][1] * G[1][0], M[0][0] * G[0][1] + M[0][1] * G[1][1]),
             (M[1][0] * G[0][0] + M[1][1] * G[1][0], M[1][0] * G[0][1] + M[1][1] * G[1][1]))
    return M


@given(forms)
def test_reduction(abc):
    Q = BQF(*abc)
    R, gamma = Q.reduce()
    assert R.is_reduced()
    assert R.disc == Q.disc
    assert Q.act(gamma) == R


@given(forms, sl2_words)
def test_reduction_is_a_class_invariant(abc, w):
    Q = BQF(*abc)
    assert Q.act(word(w)).reduce()[0] == Q.reduce()[0]


@pytest.mark.parametrize("n", [3, 4, 7, 8, 11, 12, 15, 16, 20, 23, 24, 27, 28, 47, 71, 72, 99])
def test_class_count_is_hurwitz(n):
    # each reduced form counts 1/|PSL2(Z)-stabilizer|
    total = sum(Fraction(1, Q.stabilizer_order()) for Q in reduce_forms(-n))
    assert total == hurwitz(n)


@pytest.mark.parametrize("D1,D", [(5, -3), (5, -7), (8, -3), (12, -23), (13, -3), (5, -23)])
def test_genus_character_on_represented_values(D1, D):
    for Q in reduce_forms(D * D1):
        if Q.content != 1:
            continue
        # chi(Q) = (D1 / n) for any n prime to D1 represented by Q
        for n in (Q.A, Q.C, Q.A + Q.B + Q.C):
            if n % D1 and kronecker(D1, n):
                assert genus_character(1, D1, Q) == kronecker(D1, n)
                break


@settings(max_examples=30)
@given(sl2_words, st.sampled_from([(5, -3), (8, -7), (12, -23)]))
def test_genus_character_is_class_invariant(w, dd):
    D1, D = dd
    for Q in reduce_forms(D * D1):
        assert genus_character(1, D1, Q.act(word(w))) == genus_character(1, D1, Q)


def test_genus_character_needs_consistent_data():
    with pytest.raises((GenusCharacterError, ValueError)):
        genus_character(1, 4, BQF(1, 1, 1))


@pytest.mark.parametrize("abc", [(1, 0, 1), (1, 1, 1), (1, 1, 2), (1, 0, 2), (1, 1, 3), (1, 1, 5), (1, 1, 41),
                                 (2, 1, 3), (3, 2, 5)])
def test_j_against_mpmath_kleinj(abc):
    z = cm_point(BQF(*abc))
    with mpmath.workdps(50):
        want = 1728 * mpmath.kleinj(z.to_mpc(50))
        got = j_at(z, 40, real_check=False)
        assert abs(got - want) < mpmath.mpf(10) ** -25 * max(1, abs(want))


@pytest.mark.parametrize("abc,j", [((1, 0, 1), 1728), ((1, 1, 1), 0), ((1, 1, 2), -3375), ((1, 0, 2), 8000),
                                   ((1, 1, 3), -32768), ((1, 1, 41), -640320 ** 3)])
def test_rational_singular_moduli(abc, j):
    with mpmath.workdps(60):
        val = j_at(cm_point(BQF(*abc)), 50)
        assert abs(val - j) < mpmath.mpf(10) ** -30 * max(1, abs(j))


def g1(prec: int) -> QSeries:
    th1 = QSeries({n * n: (-1) ** n * (1 if n == 0 else 2) for n in range(12) if n * n < prec + 4}, prec + 4)
    e4 = eisenstein_E4(prec // 4 + 3).rescale(4)
    return (th1 * e4 * eta_quotient([(4, 6)], prec + 5).inverse()).truncate(prec)


@pytest.mark.parametrize("d", [3, 4, 7, 8, 11, 12, 15, 16, 19, 20, 23])
def test_traces_of_J(d):
    # sum over classes of J(alpha_Q)/|stab| equals minus the q^d coefficient of g_1
    with mpmath.workdps(50):
        tr = sum(J_at(cm_point(Q), 40, real_check=False) / Q.stabilizer_order() for Q in reduce_forms(-d))
        assert abs(tr.imag) < 1e-25
        assert abs(tr.real + g1(30).coeff(d)) < 1e-20


@pytest.mark.parametrize("D1,c0", [(5, -85995), (8, 1707264), (12, 44330496), (13, -91951146)])
def test_twisted_traces(D1, c0):
    # the j-example divisor carries multiplier 3
    val = trace_singular_moduli(D1, D1 % 2, [(-3, 1, 3)], 60)
    assert abs(val.value - 3 * c0) < 1e-30
    assert val.bound < 1e-30


def test_twisted_divisor_weights_cancel():
    div = twisted_divisor(1, 5, 1, -3, 1, 3)
    assert len(div) == 2
    assert sorted(t.weight for t in div) == [-3, 3]
    assert div.total_weight() == 0
    assert len(twisted_divisor(1, 5, 1, -3, 1, 0)) == 0


def test_twisted_divisor_rejects_bad_D1():
    with pytest.raises(ValueError):
        twisted_divisor(1, 1, 1, -3, 1)
    with pytest.raises(ValueError):
        twisted_divisor(1, 5, 0, -3, 1)


def test_inversion_recovers_f0_coefficients():
    out = invert_coefficients(5, 1, [(-3, 1, 3)], 2, 60)
    f = f0(21)
    assert [out[n]["C"] for n in (1, 2)] == [3 * f.coeff(5), 3 * f.coeff(20)]
    assert all(out[n]["residue"] < 1e-20 for n in out)


def test_inversion_refuses_non_integers():
    # a threshold below the working precision cannot be met
    with pytest.raises(UntrustedInversion):
        invert_coefficients(5, 1, [(-3, 1, 1)], 1, 30, threshold=1e-40)


def test_twisted_divisor_needs_level_one():
    with pytest.raises(UnsupportedLevel):
        twisted_divisor(2, 5, 1, -3, 1)


@pytest.mark.parametrize("D", [-3, -4, -7, -8])
def test_replication(D):
    Q = reduce_forms(D)[0]
    rep = replication_check(CMPoint(Q.A, Q.B, Q.C), 5, 40)
    assert rep.ok, rep.first_failure
    assert rep.max_residual < 1e-20
