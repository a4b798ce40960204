"""Class numbers, Borcherds products, the product/trace equivalence and twisted products."""

import json
from fractions import Fraction
from importlib import resources

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqlift.borcherds import (
    WModuleData,
    borcherds_product,
    class_number_H,
    hurwitz,
    j_example,
    psi_product,
    psi_product_dft,
    sq_decompose,
    sq_traces,
    t_w,
    twisted_psi,
    twisted_psi_product,
    weight_k,
)
from sqlift.qseries import QSeries, klein_j, power_product
from sqlift.repth import CharacterTable
from sqlift.vvforms import f0


def hurwitz_brute(n: int) -> Fraction:
    """Count reduced forms (a, b, c) of discriminant -n, weighting a = b = c by 1/3 and a = c, b = 0 by 1/2."""
    total = Fraction(0)
    a = 1
    while 3 * a * a <= n:
        for b in range(-a + 1, a + 1):
            if (b * b + n) % (4 * a):
                continue
            c = (b * b + n) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if a == b == c:
                total += Fraction(1, 3)
            elif a == c and b == 0:
                total += Fraction(1, 2)
            else:
                total += 1
        a += 1
    return total


@pytest.mark.parametrize("n", [n for n in range(3, 120) if n % 4 in (0, 3)])
def test_hurwitz_against_brute_force(n):
    assert hurwitz(n) == hurwitz_brute(n)


def test_hurwitz_zero():
    assert hurwitz(0) == Fraction(-1, 12)


@settings(max_examples=30)
@given(st.dictionaries(st.integers(1, 8), st.integers(-4, 4), max_size=4), st.integers(-3, 3))
def test_borcherds_product_is_the_plain_product(exps, H):
    got = borcherds_product(exps, H, 12)
    want = power_product(exps, 12 + H)
    assert got == QSeries({k - H: c for k, c in enumerate(want)}, 12)


def test_j_example():
    W = j_example()
    assert class_number_H(W) == 1
    assert weight_k(W, "1A") == 0
    assert psi_product(W, "1A", 15) == klein_j(15)


@pytest.fixture(scope="module")
def w_z2():
    return WModuleData.load("w_minus3_1_z2")


@pytest.fixture(scope="module")
def z2_table():
    return CharacterTable.from_json(json.loads(resources.files("sqlift").joinpath("data", "Z2_named.json").read_text()))


def test_weight_is_constant_term(w_z2):
    # the 1A form is 2 f_3 + 248 theta, whose constant term is 248
    assert weight_k(w_z2, "1A") == 248
    assert class_number_H(w_z2) == -20


@pytest.mark.parametrize("name", ["1A", "2A"])
def test_exp_and_dft_products_agree(w_z2, name):
    assert psi_product(w_z2, name, 26) == psi_product_dft(w_z2, name, 26)


@pytest.mark.parametrize("name", ["1A", "2A"])
def test_sq_equals_t_w(w_z2, name):
    assert sq_traces(w_z2, name, 6) == t_w(w_z2, name, 6)


def test_sq_decomposition(w_z2, z2_table):
    out = sq_decompose(w_z2, z2_table, 2)
    assert out == {
        Fraction(-2, 3): {"trivial": 1, "sign": 0},
        Fraction(1, 3): {"trivial": 240, "sign": 256},
        Fraction(4, 3): {"trivial": 34936, "sign": 34816},
    }
    sq = sq_traces(w_z2, "1A", 2)
    for e, mult in out.items():
        assert sq.coeff(e) == mult["trivial"] + mult["sign"]


@pytest.mark.parametrize("D1", [5, 8, 12, 13])
def test_twisted_product_first_coefficient(D1):
    # q^1 coefficient of prod P_D1(q^n)^{c(n^2 D1)} is -c(D1) * (Gauss sum) = -c(D1) sqrt(D1)
    W = j_example()
    psi = twisted_psi(W, "1A", D1, D1 % 2, 3)
    c = 3 * f0(D1 + 1).coeff(D1)
    want = -c * mpmath.sqrt(D1)
    assert abs(complex(psi.coeff(1).to_mpc()) - complex(want)) < 1e-6 * abs(complex(want))


@pytest.mark.parametrize("D1", [5, 8])
def test_twisted_two_routes_agree(D1):
    W = j_example()
    a = twisted_psi(W, "1A", D1, D1 % 2, 4)
    b = twisted_psi_product(W, D1, D1 % 2, 4)
    for n in range(4):
        x, y = a.coeff(n), b.coeff(n)
        xv = complex(x.to_mpc()) if hasattr(x, "to_mpc") else complex(x)
        yv = complex(y.to_mpc()) if hasattr(y, "to_mpc") else complex(y)
        assert abs(xv - yv) <= 1e-9 * max(1.0, abs(xv)), n


def test_twist_rejects_non_fundamental():
    with pytest.raises(ValueError):
        twisted_psi(j_example(), "1A", 9, 1, 3)
