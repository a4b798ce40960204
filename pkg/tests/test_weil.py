"""Lattices L_{m,N}, the Weil representation rho_{m,N} and CM points lambda^perp."""

import cmath
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sqlift.weil import (
    CMPoint,
    LatticeLmN,
    LatticeVector,
    NotADivisorPoint,
    bilinear,
    lambda_perp,
    metaplectic_word,
    qform,
    rep_relations_check,
    weil_rep,
    z_l_vector,
)

SMALL = [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2), (1, 3)]


def e(x) -> complex:
    return cmath.exp(2j * math.pi * float(x))


def numeric(M):
    return [[complex(x) for x in row] for row in M]


def matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def close(A, B, tol=1e-9):
    return all(abs(x - y) < tol for ra, rb in zip(A, B) for x, y in zip(ra, rb))


@pytest.mark.parametrize("m,N", SMALL)
def test_discriminant_group_order(m, N):
    L = LatticeLmN(m, N)
    assert len(L.discriminant_group()) == L.order == 2 * m * N * N
    for idx in L.discriminant_group():
        assert L.class_of(L.representative(idx)) == idx


@pytest.mark.parametrize("m,N", SMALL)
def test_milgram_gauss_sum(m, N):
    # sum_gamma e(Q(gamma)) = sqrt|L*/L| e(sign/8) for signature (2, 1)
    L = LatticeLmN(m, N)
    total = sum(e(qform(L, L.representative(idx))) for idx in L.discriminant_group())
    assert abs(total - math.sqrt(L.order) * e(Fraction(1, 8))) < 1e-9


@pytest.mark.parametrize("m,N", SMALL)
def test_rhoS_entries_match_formula(m, N):
    L = LatticeLmN(m, N)
    W = weil_rep(m, N)
    S = numeric(W.rhoS)
    reps = [L.representative(idx) for idx in W.labels]
    scalar = e(Fraction(-1, 8)) / math.sqrt(L.order)
    for x, u in enumerate(reps):
        for y, v in enumerate(reps):
            assert abs(S[x][y] - scalar * e(-bilinear(L, u, v))) < 1e-9


@pytest.mark.parametrize("m,N", SMALL)
def test_rhoT_is_quadratic_form(m, N):
    L = LatticeLmN(m, N)
    W = weil_rep(m, N)
    for k, idx in enumerate(W.labels):
        assert abs(complex(W.rhoT[k]) - e(qform(L, L.representative(idx)))) < 1e-12


@pytest.mark.parametrize("m,N", SMALL)
def test_relations_hold(m, N):
    report = rep_relations_check(weil_rep(m, N))
    assert report.ok, report.failures()


def test_relations_detect_a_wrong_phase():
    W = weil_rep(2, 1).with_t_phase(1, 1)
    assert not rep_relations_check(W).ok


words = st.lists(st.tuples(st.sampled_from("ST"), st.integers(-3, 3)), min_size=1, max_size=6)


def word_matrix(word):
    S = [[0, -1], [1, 0]]
    M = [[1, 0], [0, 1]]
    for g, k in word:
        if g == "S":
            M = matmul(M, S)
        else:
            M = matmul(M, [[1, k], [0, 1]])
    return M


@given(words)
def test_metaplectic_word_reproduces_gamma(word):
    gamma = word_matrix(word)
    w, sign = metaplectic_word(gamma)
    M = word_matrix(w)
    assert M == gamma or M == [[-x for x in row] for row in gamma]
    assert sign in (1, -1)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([(1, 1), (2, 1), (1, 2)]), words, words)
def test_rho_is_projective_homomorphism(mN, w1, w2):
    W = weil_rep(*mN)
    g1, g2 = word_matrix(w1), word_matrix(w2)
    lhs = numeric(W.rho(matmul(g1, g2)))
    rhs = matmul(numeric(W.rho(g1)), numeric(W.rho(g2)))
    neg = [[-x for x in row] for row in rhs]
    assert close(lhs, rhs) or close(lhs, neg)


@given(st.integers(1, 4), st.integers(1, 3), st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6))
def test_lambda_perp_is_orthogonal_to_Z_L(m, N, c, b, a):
    L = LatticeLmN(m, N)
    v = LatticeVector(Fraction(c, N), Fraction(b, N), Fraction(a, 2 * m))
    assume(c != 0 and qform(L, v) < 0)
    z = lambda_perp(v, m, N)
    with mpmath.workdps(30):
        tau = z.to_mpc(30)
        w = z_l_vector(tau, m, N)
        pair = 2 * m * v.a * w.a + N * (w.b * v.c + v.b * w.c)
        assert abs(pair) < 1e-20
        assert tau.imag > 0


def test_lambda_perp_rejects_bad_vectors():
    with pytest.raises(NotADivisorPoint):
        lambda_perp(LatticeVector(1, 1, 0), 1, 1)
    with pytest.raises(NotADivisorPoint):
        lambda_perp(LatticeVector(0, -1, 0), 1, 1)


def test_cm_point_rho():
    z = CMPoint(1, 1, 1)
    assert z.discriminant == -3
    assert str(z) == "(-1 + i*sqrt(3))/2"
    assert CMPoint.from_quadratic(2, 2, 2) == z
