"""Virtual module traces, Frame shapes, Lambda/S series and character tables."""

import cmath
import math

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from sqlift.qseries import QSeries
from sqlift.repth import (
    InvalidCharacterData,
    VirtualModuleTraces,
    cyclic_rational_characters,
    cyclic_table,
    decompose,
    lambda_trace,
    load_table,
    power_map_check,
    ramanujan_sum,
    ud_from_traces,
    vb_from_traces,
    weight_identity,
)

cycle_types = st.lists(st.integers(1, 8), min_size=1, max_size=5)


def permutation_traces(cycles: list[int]) -> VirtualModuleTraces:
    """Permutation module of a permutation with the given cycle lengths: tr(g^d) counts fixed points of g^d."""
    n = math.lcm(*cycles)
    traces = {d: sum(b for b in cycles if d % b == 0) for d in sympy.divisors(n)}
    return VirtualModuleTraces(n, traces, virtual=False)


def permutation_matrix(cycles: list[int]) -> sympy.Matrix:
    size = sum(cycles)
    P = sympy.zeros(size, size)
    start = 0
    for b in cycles:
        for k in range(b):
            P[start + (k + 1) % b, start + k] = 1
        start += b
    return P


@given(st.integers(1, 30), st.integers(0, 60))
def test_ramanujan_sum_matches_cosines(q, k):
    direct = sum(cmath.exp(2j * math.pi * a * k / q) for a in range(1, q + 1) if math.gcd(a, q) == 1)
    assert abs(direct - ramanujan_sum(q, k)) < 1e-9


@given(cycle_types)
def test_frame_shape_is_cycle_type(cycles):
    shape = vb_from_traces(permutation_traces(cycles))
    want = {b: cycles.count(b) for b in set(cycles)}
    assert shape.v == want


@given(cycle_types)
def test_eigenvalue_multiplicities(cycles):
    T = permutation_traces(cycles)
    u = ud_from_traces(T)
    assert u == {d: sum(1 for b in cycles if b % d == 0) for d in sympy.divisors(T.order)}


@given(st.lists(st.integers(1, 5), min_size=1, max_size=3))
def test_lambda_is_characteristic_polynomial(cycles):
    t = sympy.Symbol("t")
    P = permutation_matrix(cycles)
    det = sympy.Poly(sympy.expand((sympy.eye(P.rows) - t * P).det()), t)
    want = QSeries({k: int(det.coeff_monomial(t ** k)) for k in range(0, det.degree() + 1)}, 12)
    assert lambda_trace(permutation_traces(cycles), 1, 12) == want


@given(cycle_types)
def test_lambda_times_symmetric_is_one(cycles):
    T = permutation_traces(cycles)
    assert lambda_trace(T, 1, 20) * lambda_trace(T, -1, 20) == QSeries({0: 1}, 20)


@given(cycle_types, cycle_types)
def test_lambda_is_additive(c1, c2):
    T1, T2 = permutation_traces(c1), permutation_traces(c2)
    n = math.lcm(T1.order, T2.order)
    lift = lambda T: VirtualModuleTraces(n, {d: T.trace(d) for d in sympy.divisors(n)})
    assert lambda_trace(lift(T1) + lift(T2), 1, 15) == lambda_trace(T1, 1, 15) * lambda_trace(T2, 1, 15)


@given(cycle_types)
def test_power_maps_and_weight_identity(cycles):
    T = permutation_traces(cycles)
    for p in sympy.primefactors(T.order):
        assert power_map_check(T, p).ok
    for N in sympy.divisors(T.order):
        lhs, rhs = weight_identity(T, N)
        assert lhs == rhs


def test_non_virtual_data_is_rejected():
    with pytest.raises(InvalidCharacterData):
        vb_from_traces(VirtualModuleTraces(2, {1: 1, 2: 0}))


@pytest.mark.parametrize("name,order", [("S3", 6), ("S4", 24), ("Z5", 5), ("Z12", 12)])
def test_shipped_tables_are_orthogonal(name, order):
    CT = load_table(name)
    CT.validate()
    assert CT.group_order == order
    # column orthogonality on the identity column: sum of squared degrees
    assert sum(int(chi[CT.identity]) ** 2 for chi in CT.irreducibles.values()) == order


def test_regular_character_decomposition():
    CT = load_table("S4")
    regular = {c.name: (24 if c.order == 1 else 0) for c in CT.classes}
    dims = decompose(regular, CT)
    assert dims == {chi: int(vals[CT.identity]) for chi, vals in CT.irreducibles.items()}


def test_decompose_rejects_non_characters():
    CT = load_table("S3")
    with pytest.raises(InvalidCharacterData):
        decompose({"1A": 1, "2A": 0, "3A": 0}, CT)


@given(st.integers(2, 12), st.integers(0, 40))
def test_cyclic_power_classes(n, k):
    # power_class serves rational data, so it may return a Galois-conjugate class of g^k
    CT = cyclic_table(n)
    got = CT.power_class("g^1", k)
    assert CT.by_name[got].order == n // math.gcd(k, n)
    psi = cyclic_rational_characters(n)
    assert all(chi[got] == chi[f"g^{k % n}"] for chi in psi.values())
