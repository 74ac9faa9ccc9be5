from __future__ import annotations

from fractions import Fraction
from itertools import product

import pytest

from eiksum.ffield import build_field
from eiksum.polytope import (
    LaurentFamily,
    PolytopeError,
    Slot,
    critical_point_search,
    critical_system,
    exceptional_parameter,
    expected_fhat_facets,
    f_family,
    face_restriction,
    facets_off_origin,
    fhat_family,
    fhat_regime,
    lattice_volume_oracle,
    newton_polytope,
    nondegeneracy_verdict,
    normalized_volume,
    power_substitution,
)

GRID = list(product(range(1, 7), range(1, 5)))


def _simplex(d):
    mons = tuple(tuple(int(i == j) for j in range(d)) for i in range(d))
    return LaurentFamily(f"simplex{d}", d, mons, tuple(Slot(1) for _ in mons), "custom", (d,))


def _facets(fam):
    return sorted(((f.normal, f.offset) for f in newton_polytope(fam).facets), key=lambda f: (-f[1], f[0]))


# -- worked examples --------------------------------------------------------------------


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_unit_simplex(d):
    fam = _simplex(d)
    poly = newton_polytope(fam)
    assert set(poly.vertices) == {tuple([0] * d)} | set(fam.monomials)
    assert normalized_volume(poly) == 1
    assert _facets(fam) == [(tuple([1] * d), 1)]


def test_fhat_1_1_vertices_and_facet():
    poly = newton_polytope(fhat_family(1, 1))
    assert set(poly.vertices) == {(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, -1, 1), (-1, 0, 1)}
    assert _facets(fhat_family(1, 1)) == [((1, 1, 2), 1)]
    assert normalized_volume(poly) == 2


def test_f_family_1_vertices():
    fam = f_family(1)
    # y, z, x y z, y z / x
    assert set(fam.monomials) == {(0, 1, 0), (0, 0, 1), (1, 1, 1), (-1, 1, 1)}
    poly = newton_polytope(fam)
    assert set(poly.vertices) == {(0, 0, 0)} | set(fam.monomials)


def test_fhat_2_2_facets_volume_determinants():
    fam = fhat_family(2, 2)
    assert _facets(fam) == [((2, 2, 1, 3), 2), ((2, 2, 2, 3), 2)]
    poly = newton_polytope(fam)
    assert normalized_volume(poly) == 4
    dets = sorted(face_restriction(fam, poly, f).determinant for f in poly.faces_off_origin() if f.dim == poly.dim - 1)
    assert dets == [-2, 2]


def test_fhat_3_1_facets_volume():
    fam = fhat_family(3, 1)
    poly = newton_polytope(fam)
    assert len(facets_off_origin(poly)) == 4
    assert normalized_volume(poly) == 4
    for f in poly.faces_off_origin():
        if f.dim == poly.dim - 1:
            assert face_restriction(fam, poly, f).determinant in (1, -1)


def test_fhat_vertices_match_display():
    for n, m in GRID:
        fam = fhat_family(n, m)
        V = [tuple(int(i == j) for j in range(n + 2)) for i in range(n + 1)]
        V.append(tuple([0] * n + [-1, 1]))
        V.append(tuple([-1] * n + [0, m]))
        assert set(fam.monomials) == set(V)


# -- grid invariants ---------------------------------------------------------------------


@pytest.mark.parametrize("n,m", GRID)
def test_facets_match_closed_form(n, m):
    fam = fhat_family(n, m)
    poly = newton_polytope(fam)
    assert _facets(fam) == expected_fhat_facets(n, m)
    want_count = {"n+1<2m": 2, "n+1=2m": 1, "n+1>2m": n + 1}[fhat_regime(n, m)]
    assert len(poly.facets) == want_count
    vol = normalized_volume(poly)
    assert vol == (2 * m if n + 1 <= 2 * m else n + 1)
    assert vol == round(lattice_volume_oracle(poly))
    # side test: every point lies on the origin side of every facet
    pts = [tuple([0] * fam.dim)] + list(fam.monomials)
    for f in poly.facets:
        assert all(sum(a * b for a, b in zip(f.normal, v)) <= f.offset for v in pts)
        on = [v for v in pts if sum(a * b for a, b in zip(f.normal, v)) == f.offset]
        assert len(on) >= fam.dim


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_f_family_volume(n):
    poly = newton_polytope(f_family(n))
    assert normalized_volume(poly) == 2 * n + 2 == round(lattice_volume_oracle(poly))


def test_power_substitution():
    fam = fhat_family(2, 3)
    sub = power_substitution(fam, [0, 1], 2)
    for a, b in zip(fam.monomials, sub.monomials):
        assert b == (2 * a[0], 2 * a[1]) + a[2:]
    assert sub.slots == fam.slots


# -- verdicts ---------------------------------------------------------------------------


def test_verdict_examples():
    F2, F4 = build_field(2, 1), build_field(2, 2)
    fam = fhat_family(1, 1)
    v = nondegeneracy_verdict(fam, F2, F2.one)
    assert v.status == "degenerate" and v.witness == (0, 0, 0)  # x = (1, 1, 1)
    r = face_restriction(fam, newton_polytope(fam), newton_polytope(fam).faces_off_origin()[0])
    assert critical_system(r.family, r.family.specialize(F2, F2.one), F2, v.witness) == [F2.zero] * 3
    for w in F4.units():
        status = nondegeneracy_verdict(fam, F4, w).status
        assert status == ("degenerate" if w == F4.one else "nondegenerate")
    fam31 = fhat_family(3, 1)
    for F in (F2, F4):
        for w in F.units():
            assert nondegeneracy_verdict(fam31, F, w).status == "nondegenerate"


@pytest.mark.parametrize("n,m", [(1, 1), (3, 2), (5, 3)])
@pytest.mark.parametrize("pn", [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)])
def test_exceptional_fiber_and_search_confirmation(n, m, pn):
    F = build_field(*pn)
    fam = fhat_family(n, m)
    exc = exceptional_parameter(fam, F)
    if m % F.p == 0:
        assert exc is None
        return
    assert exc == F.pow(F.from_prime(m), -(n + 1))
    poly = newton_polytope(fam)
    face = poly.faces_off_origin()[0]
    r = face_restriction(fam, poly, face)
    for w in F.units():
        v = nondegeneracy_verdict(fam, F, w, depth=2)
        assert v.status == ("degenerate" if w == exc else "nondegenerate")
    wit, s = critical_point_search(r.family, r.family.specialize(F, exc), F, depth=2)
    assert wit is not None and s <= 2
    assert critical_system(r.family, r.family.specialize(F, exc), build_field(F.p, F.n * s), wit) == [
        build_field(F.p, F.n * s).zero
    ] * fam.dim


def test_search_on_known_nondegenerate_face_is_undetermined():
    F = build_field(2, 1)
    fam = _simplex(2)
    # x + y: the critical system x = y = 0 has no torus solution
    wit, s = critical_point_search(fam, fam.specialize(F), F, depth=3)
    assert wit is None and s == 3


def test_verdict_json_and_regimes():
    F = build_field(3, 1)
    v = nondegeneracy_verdict(fhat_family(2, 2), F, 0)
    assert v.status == "nondegenerate" and "status" in v.to_json()
    assert fhat_regime(1, 1) == "n+1=2m" and fhat_regime(2, 2) == "n+1<2m" and fhat_regime(3, 1) == "n+1>2m"


def test_expected_facets_use_exact_rationals():
    for n, m in GRID:
        for normal, off in expected_fhat_facets(n, m):
            assert all(isinstance(c, int) for c in normal) and off > 0


# -- error paths ------------------------------------------------------------------------


def test_polytope_errors():
    F = build_field(3, 1)
    with pytest.raises(ValueError):
        nondegeneracy_verdict(fhat_family(1, 1), F, F.zero)
    with pytest.raises(ValueError):
        fhat_family(0, 1)
    with pytest.raises(ValueError):
        fhat_family(1, 0)
    flat = LaurentFamily("flat", 2, ((1, 0), (2, 0)), (Slot(1), Slot(1)), "custom", ())
    with pytest.raises(PolytopeError):
        newton_polytope(flat)
    assert Fraction(normalized_volume(newton_polytope(_simplex(3)))) == 1
