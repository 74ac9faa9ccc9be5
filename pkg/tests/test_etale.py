from __future__ import annotations

from collections import Counter

import numpy as np
import pytest

from eiksum.etale import (
    AlgebraError,
    EtaleAlgebra,
    algebra_norm,
    algebra_trace,
    base_change,
    build_algebra,
)
from eiksum.ffield import build_field, embedding
from oracles import NaiveField, base_change_triples, mult_matrix_trace_det

TYPES_UP_TO_4 = [(2,), (1, 1), (3,), (1, 2), (1, 1, 1), (4,), (1, 3), (2, 2), (1, 1, 2), (1, 1, 1, 1)]


def _el(B, ints):
    return tuple(F.from_int(v) for F, v in zip(B.fields, ints))


def test_trace_examples():
    B = build_algebra(3, 1, [1, 1])
    assert B.base.to_int(algebra_trace(B, _el(B, (1, 2)))) == 0
    B4 = build_algebra(2, 1, [2])
    assert B4.base.to_int(algebra_trace(B4, _el(B4, (2,)))) == 1
    B39 = build_algebra(3, 1, [1, 2])
    F9 = B39.fields[1]
    tr, _ = mult_matrix_trace_det(NaiveField(3, F9.modulus), F9.to_int(F9.gen))
    assert B39.base.to_int(algebra_trace(B39, (B39.fields[0].one, F9.gen))) == (1 + tr) % 3


def test_norm_examples():
    B = build_algebra(3, 1, [1, 1])
    assert B.base.to_int(algebra_norm(B, _el(B, (2, 2)))) == 1
    B4 = build_algebra(2, 1, [2])
    assert B4.base.to_int(algebra_norm(B4, _el(B4, (2,)))) == 1
    B9 = build_algebra(3, 1, [2])
    assert B9.base.to_int(algebra_norm(B9, (B9.fields[0].gen,))) == 2


def test_enumerate_examples():
    B = build_algebra(3, 1, [1, 1])
    fiber = [tuple(F.to_int(v) for F, v in zip(B.fields, x)) for x in B.enumerate("norm_fiber", B.base.one)]
    assert sorted(fiber) == [(1, 1), (2, 2)]
    B9 = build_algebra(3, 1, [2])
    for a in B9.base.units():
        assert len(list(B9.enumerate("norm_fiber", a))) == 4
    B22 = build_algebra(2, 1, [1, 1])
    assert list(B22.enumerate("trace_nonzero_norm_fiber", B22.base.one)) == []


def test_enumerate_order_is_lexicographic_in_logs():
    B = build_algebra(5, 1, [1, 2])
    units = list(B.enumerate("units"))
    assert units == sorted(units) and len(units) == B.unit_count
    fiber = list(B.enumerate("norm_fiber", 3))
    assert fiber == sorted(fiber)


@pytest.mark.parametrize("q", [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)])
@pytest.mark.parametrize("type_", TYPES_UP_TO_4)
def test_fiber_sizes(q, type_):
    B = build_algebra(*q, type_)
    expected = B.unit_count // (B.base.q - 1)
    total = 0
    for a in B.base.units():
        xs = B.fiber_array(a)
        assert xs.shape[0] == expected
        assert np.array_equal(xs, B.fiber_by_filter(a))
        total += xs.shape[0]
    assert total == B.unit_count


@pytest.mark.parametrize("p,type_", [(2, (1, 3)), (3, (1, 2)), (5, (2, 1)), (2, (2, 2, 1)), (3, (3,)), (7, (2,)), (2, (4,))])
def test_trace_norm_match_multiplication_matrix(p, type_):
    B = build_algebra(p, 1, type_)
    naive = [NaiveField(p, F.modulus) for F in B.fields]
    rng = np.random.default_rng(sum(type_) * p)
    for _ in range(1000):
        x = tuple(int(rng.integers(0, F.q - 1)) for F in B.fields)
        tr, nm = 0, 1
        for N, F, xi in zip(naive, B.fields, x):
            t, d = mult_matrix_trace_det(N, F.to_int(xi))
            tr, nm = (tr + t) % p, (nm * d) % p
        assert B.base.to_int(B.trace(x)) == tr
        assert B.base.to_int(B.norm(x)) == nm


def test_base_change_examples():
    B = build_algebra(2, 1, [2])
    Bp, d = base_change(B, 2)
    assert Bp.base.q == 4 and Bp.type == (1, 1)
    B22 = build_algebra(2, 1, [1, 1])
    Bp, _ = base_change(B22, 3)
    assert Bp.base.q == 8 and [F.q for F in Bp.fields] == [8, 8]
    B3 = build_algebra(3, 1, [1, 2])
    same, d = base_change(B3, 1)
    assert same.type == B3.type
    for y in same.enumerate("units"):
        assert d(y) == y


@pytest.mark.parametrize("p,type_,m", [(2, (2,), 2), (2, (1, 1), 2), (2, (1, 1), 3), (3, (1, 2), 2), (2, (1, 2), 3), (2, (3,), 2), (3, (2,), 3)])
def test_base_change_matches_tensor_oracle(p, type_, m):
    B = build_algebra(p, 1, type_)
    Bp, d = base_change(B, m)
    G = Bp.base
    units = Bp.units_array()
    got = Counter(zip(
        map(tuple, d.apply_v(units).tolist()),
        [G.to_int(int(v)) for v in Bp.norm_v(units)],
        [G.to_int(int(v)) for v in Bp.trace_v(units)],
    ))
    assert got == base_change_triples(p, [F.modulus for F in B.fields], G.modulus)


@pytest.mark.parametrize("p,s,type_,m", [(2, 1, (2,), 2), (3, 1, (1, 2), 2), (2, 2, (1, 1), 2), (2, 1, (1, 2), 3), (2, 2, (2,), 2)])
def test_descent_is_multiplicative_and_lifts(p, s, type_, m):
    B = build_algebra(p, s, type_)
    Bp, d = base_change(B, m)
    assert Bp.unit_count <= 2**12
    units = Bp.units_array()
    img = d.apply_v(units)
    rng = np.random.default_rng(7)
    for j in rng.integers(0, len(units), 16):
        y = tuple(int(v) for v in units[j])
        prod_ = np.array([[(u + v) % F.order for u, v, F in zip(row, y, Bp.fields)] for row in units])
        expect = np.array([[(u + v) % F.order for u, v, F in zip(row, d(y), B.fields)] for row in img])
        assert np.array_equal(d.apply_v(prod_), expect)
    # N_{B'/B}(lift(x)) = x^m
    for x in B.enumerate("units"):
        assert d(d.lift(x)) == tuple((m * xi) % F.order for xi, F in zip(x, B.fields))


def test_errors():
    F3 = build_field(3, 1)
    with pytest.raises(AlgebraError):
        EtaleAlgebra(F3, [(F3, embedding(F3, F3))])  # degree 1
    with pytest.raises(AlgebraError):
        EtaleAlgebra(F3, [])
    F9 = build_field(3, 2)
    with pytest.raises(AlgebraError):
        EtaleAlgebra(F9, [(F9, embedding(F3, F9)), (F9, embedding(F3, F9))])
    B = build_algebra(3, 1, [1, 1])
    with pytest.raises(AlgebraError):
        B.norm((B.fields[0].zero, 0))
    with pytest.raises(AlgebraError):
        B.trace((0,))
    with pytest.raises(AlgebraError):
        list(B.enumerate("bogus"))
    with pytest.raises(AlgebraError):
        B.fiber_array(B.base.zero)
    with pytest.raises(AlgebraError):
        base_change(B, 0)
    with pytest.raises(AlgebraError):
        build_algebra(3, 1, [0, 2])
