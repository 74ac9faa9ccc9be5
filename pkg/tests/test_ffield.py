from __future__ import annotations

from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eiksum.ffield import (
    BudgetError,
    FieldError,
    FieldTable,
    build_field,
    embedding,
    field_arith,
    find_embedding,
    primitive_modulus,
    subfield_trace_norm,
)
from oracles import NaiveField

SMALL = [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1), (3, 4), (2, 6)]


def _int(F, x):
    return F.to_int(x)


# -- worked examples --------------------------------------------------------------


def test_f3_generator_is_two():
    F = build_field(3, 1)
    assert _int(F, F.gen) == 2


def test_f4_modulus_and_generator():
    F = build_field(2, 2)
    assert F.modulus == (1, 1, 1)
    assert _int(F, F.gen) == 2  # the class of t


def test_f9_generator_order():
    F = build_field(3, 2)
    assert F.pow(F.gen, 8) == F.one
    assert _int(F, F.pow(F.gen, 4)) == 2


def test_field_arith_examples():
    F3, F4, F9 = build_field(3, 1), build_field(2, 2), build_field(3, 2)
    assert _int(F3, field_arith(F3, "add", F3.from_int(2), F3.from_int(2))) == 1
    t = F4.from_int(2)
    assert _int(F4, field_arith(F4, "mul", t, t)) == 3  # t + 1
    assert field_arith(F9, "pow", F9.gen, 8) == F9.one


def test_subfield_trace_norm_examples():
    F2, F4 = build_field(2, 1), build_field(2, 2)
    tr, nm = subfield_trace_norm(F2, F4, F4.from_int(2))
    assert (_int(F2, tr), _int(F2, nm)) == (1, 1)
    F3, F9 = build_field(3, 1), build_field(3, 2)
    _, nm = subfield_trace_norm(F3, F9, F9.gen)
    assert _int(F3, nm) == 2


# -- agreement with schoolbook arithmetic ---------------------------------------


@pytest.mark.parametrize("p,n", SMALL)
def test_tables_match_polynomial_arithmetic(p, n):
    F = build_field(p, n)
    N = NaiveField(p, F.modulus)
    rng = np.random.default_rng(p * 100 + n)
    ints = range(F.q) if F.q <= 27 else rng.integers(0, F.q, 40).tolist()
    for u, v in product(ints, ints):
        x, y = F.from_int(u), F.from_int(v)
        assert _int(F, F.add(x, y)) == N.add(u, v)
        assert _int(F, F.mul(x, y)) == N.mul(u, v)
    for k in range(F.q - 1):
        assert F.to_int(k) == N.exp(k)


@pytest.mark.parametrize("p,n", [(2, 2), (2, 3), (2, 4), (3, 2), (5, 2), (3, 3)])
def test_modulus_is_smallest_primitive(p, n):
    # lexicographic order on the coefficient list as serialized, low degree first
    def primitive(f):
        N = NaiveField(p, f)
        return len(N.log) == p**n - 1

    best = None
    for low in product(range(p), repeat=n):
        f = list(low) + [1]
        if f[0] and primitive(f):
            best = tuple(f) if best is None or tuple(f) < best else best
    assert primitive_modulus(p, n) == best


@pytest.mark.parametrize("p,n", SMALL)
def test_trace_is_additive_and_lands_in_prime_field(p, n):
    F = build_field(p, n)
    N = NaiveField(p, F.modulus)
    for u in range(F.q):
        assert F.trace_prime(F.from_int(u)) == N.trace_prime(u)


@pytest.mark.parametrize("p,s,d", [(2, 1, 2), (2, 1, 3), (2, 2, 2), (3, 1, 2), (3, 1, 3), (3, 2, 2), (2, 1, 6), (5, 1, 2), (7, 1, 2), (2, 3, 2)])
def test_relative_trace_norm_linear_and_multiplicative(p, s, d):
    sub, sup = build_field(p, s), build_field(p, s * d)
    assert sup.q <= 81
    emb = embedding(sub, sup)
    tn = [subfield_trace_norm(sub, sup, x) for x in sup.elements()]
    for x, y in product(sup.elements(), repeat=2):
        tx, nx = tn[x]
        ty, ny = tn[y]
        txy, _ = tn[sup.add(x, y)]
        _, nxy = tn[sup.mul(x, y)]
        assert txy == sub.add(tx, ty)
        assert nxy == sub.mul(nx, ny)
    for b in sub.elements():
        tb, nb = tn[emb.image(b)]
        assert tb == sub.mul(sub.from_prime(d), b)
        assert nb == sub.pow(b, d)


def test_trace_norm_transitive_2_4_16():
    F2, F4, F16 = build_field(2, 1), build_field(2, 2), build_field(2, 4)
    for x in F16.elements():
        t1, n1 = subfield_trace_norm(F4, F16, x)
        t2, n2 = subfield_trace_norm(F2, F4, t1)
        _, n3 = subfield_trace_norm(F2, F4, n1)
        t, nm = subfield_trace_norm(F2, F16, x)
        assert (t, nm) == (t2, n3)


@pytest.mark.parametrize("p,s,d", [(2, 1, 3), (3, 1, 2), (2, 2, 2), (5, 1, 2), (3, 2, 2), (7, 1, 2)])
def test_norm_surjective_with_equal_fibers(p, s, d):
    sub, sup = build_field(p, s), build_field(p, s * d)
    counts = {}
    for x in sup.units():
        _, nm = subfield_trace_norm(sub, sup, x)
        counts[nm] = counts.get(nm, 0) + 1
    assert sorted(counts) == list(sub.units())
    assert set(counts.values()) == {(sup.q - 1) // (sub.q - 1)}


def test_embedding_respects_arithmetic():
    for p, s, d in [(2, 2, 2), (3, 1, 2), (2, 1, 4), (3, 2, 2)]:
        sub, sup = build_field(p, s), build_field(p, s * d)
        e = find_embedding(sub, sup)
        for x, y in product(sub.elements(), repeat=2):
            assert e.image(sub.add(x, y)) == sup.add(e.image(x), e.image(y))
            assert e.preimage(e.image(x)) == x


# -- error paths ------------------------------------------------------------------


@pytest.mark.parametrize("p,n", [(4, 1), (1, 2), (6, 2), (3, 0), (2, -1)])
def test_build_rejects_bad_parameters(p, n):
    with pytest.raises(FieldError):
        build_field(p, n)


def test_budget_is_enforced():
    with pytest.raises(BudgetError):
        build_field(2, 21)
    with pytest.raises(BudgetError):
        build_field(3, 3, budget=26)


def test_custom_modulus_must_be_primitive():
    with pytest.raises(FieldError):
        FieldTable(2, 4, (1, 1, 1, 1, 1))  # x^4+...+1 has order 5
    with pytest.raises(FieldError):
        FieldTable(3, 2, (1, 0, 1))  # x^2+1 is irreducible, not primitive
    F = FieldTable(2, 4, (1, 0, 0, 1, 1))  # x^4 + x^3 + 1 is primitive
    assert F.q == 16 and F.pow(F.gen, 15) == F.one


def test_element_errors():
    F = build_field(3, 2)
    with pytest.raises(FieldError):
        F.from_int(9)
    with pytest.raises(FieldError):
        F.check(-1)
    with pytest.raises(ZeroDivisionError):
        F.inv(F.zero)
    with pytest.raises(FieldError):
        field_arith(F, "frobnicate", 1)
    with pytest.raises(FieldError):
        find_embedding(build_field(2, 2), build_field(2, 3))


# -- properties ---------------------------------------------------------------------

fields = st.sampled_from(SMALL).map(lambda pn: build_field(*pn))


@settings(max_examples=200, deadline=None)
@given(fields, st.data())
def test_field_axioms(F, data):
    x, y, z = (data.draw(st.integers(0, F.q - 1)) for _ in range(3))
    assert F.add(x, F.add(y, z)) == F.add(F.add(x, y), z)
    assert F.mul(x, F.add(y, z)) == F.add(F.mul(x, y), F.mul(x, z))
    assert F.add(x, F.neg(x)) == F.zero
    if x != F.zero:
        assert F.mul(x, F.inv(x)) == F.one


@settings(max_examples=100, deadline=None)
@given(fields, st.data())
def test_vector_ops_match_scalar(F, data):
    xs = np.array(data.draw(st.lists(st.integers(0, F.q - 1), min_size=1, max_size=20)))
    ys = np.array(data.draw(st.lists(st.integers(0, F.q - 1), min_size=len(xs), max_size=len(xs))))
    assert F.add_v(xs, ys).tolist() == [F.add(int(a), int(b)) for a, b in zip(xs, ys)]
    assert F.mul_v(xs, ys).tolist() == [F.mul(int(a), int(b)) for a, b in zip(xs, ys)]
    assert F.neg_v(xs).tolist() == [F.neg(int(a)) for a in xs]
