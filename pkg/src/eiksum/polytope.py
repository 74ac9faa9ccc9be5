"""Laurent families, Newton polytopes at infinity and non-degeneracy verdicts.

Geometry is exact: facets come from rational null spaces of every dim-subset
of the points, faces from intersecting facet vertex sets, and the normalized
volume from a pulling triangulation of the off-origin boundary coned to the
origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property, lru_cache, reduce
from itertools import combinations
from math import factorial, gcd, lcm

import numpy as np

from .ffield import FieldTable, build_field, embedding

# -- families ------------------------------------------------------------------


@dataclass(frozen=True)
class Slot:
    """Coefficient const, or const * w when ``uses_w``; const is an integer read mod p."""

    const: int
    uses_w: bool = False

    def value(self, F: FieldTable, w: int | None) -> int:
        c = F.from_prime(self.const % F.p)
        if not self.uses_w:
            return c
        if w is None:
            raise ValueError("slot needs the parameter w")
        return F.mul(c, w)


@dataclass(frozen=True)
class LaurentFamily:
    name: str
    dim: int
    monomials: tuple
    slots: tuple
    kind: str = "generic"
    params: tuple = ()

    def __post_init__(self):
        if len(self.monomials) != len(self.slots):
            raise ValueError("one slot per monomial")
        for a in self.monomials:
            if len(a) != self.dim:
                raise ValueError(f"monomial {a} has wrong length for dim {self.dim}")

    @property
    def unit_slots(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.slots) if s.uses_w)

    def specialize(self, F: FieldTable, w: int | None = None) -> list[int]:
        """Coefficient encodings in F at parameter w (w must be a unit)."""
        if self.unit_slots:
            if w is None:
                raise ValueError(f"{self.name}: parameter w required")
            F.check(w)
            if w == F.zero:
                raise ValueError(f"{self.name}: w must be nonzero")
        return [s.value(F, w) for s in self.slots]

    def restrict(self, members) -> LaurentFamily:
        members = tuple(sorted(members))
        return LaurentFamily(
            f"{self.name}|{list(members)}",
            self.dim,
            tuple(self.monomials[i] for i in members),
            tuple(self.slots[i] for i in members),
        )


def _unit(d: int, i: int) -> tuple[int, ...]:
    return tuple(int(j == i) for j in range(d))


def f_family(n: int) -> LaurentFamily:
    """y + z - sum_i x_i y z - w y z / (x_1...x_n) on variables (x_1..x_n, y, z)."""
    if n < 1:
        raise ValueError("n >= 1")
    d = n + 2
    y, z = _unit(d, n), _unit(d, n + 1)
    mons = [y, z]
    mons += [tuple(int(j == i or j >= n) for j in range(d)) for i in range(n)]
    mons.append(tuple([-1] * n + [1, 1]))
    slots = [Slot(1), Slot(1)] + [Slot(-1)] * n + [Slot(-1, True)]
    return LaurentFamily(f"F(n={n})", d, tuple(mons), tuple(slots), "f", (n,))


def fhat_family(n: int, m: int) -> LaurentFamily:
    """x_{n+1} + x_{n+2}/x_{n+1} - (x_1 + ... + x_n + w x_{n+2}^m/(x_1...x_n)).

    Monomials are listed as V_1, ..., V_{n+3}.
    """
    if n < 1 or m < 1:
        raise ValueError("n, m >= 1")
    d = n + 2
    mons = [_unit(d, i) for i in range(n + 1)]
    mons.append(tuple([0] * n + [-1, 1]))
    mons.append(tuple([-1] * n + [0, m]))
    slots = [Slot(-1)] * n + [Slot(1), Slot(1), Slot(-1, True)]
    return LaurentFamily(f"fhat(n={n},m={m})", d, tuple(mons), tuple(slots), "fhat", (n, m))


def power_substitution(fam: LaurentFamily, variables, e: int) -> LaurentFamily:
    """Pull back along x_j -> x_j^e for j in ``variables``."""
    variables = set(variables)
    mons = tuple(
        tuple(a * e if j in variables else a for j, a in enumerate(alpha)) for alpha in fam.monomials
    )
    return LaurentFamily(f"{fam.name}[x^{e}]", fam.dim, mons, fam.slots)


# -- exact linear algebra ------------------------------------------------------


def _primitive(vec) -> tuple[int, ...]:
    vec = [Fraction(v) for v in vec]
    den = reduce(lcm, (v.denominator for v in vec), 1)
    ints = [int(v * den) for v in vec]
    g = reduce(gcd, (abs(v) for v in ints), 0) or 1
    return tuple(v // g for v in ints)


def _rref(rows) -> tuple[list[list[Fraction]], list[int]]:
    M = [[Fraction(v) for v in r] for r in rows]
    pivots: list[int] = []
    r = 0
    ncols = len(M[0]) if M else 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][col]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][col]
        M[r] = [v * inv for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][col]:
                f = M[i][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(col)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def _rank(rows) -> int:
    rows = [list(r) for r in rows]
    return len(_rref(rows)[1]) if rows else 0


def _nullspace(rows) -> list[list[Fraction]]:
    R, pivots = _rref(rows)
    ncols = len(rows[0])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(R, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def _det(rows) -> int:
    """Integer determinant by fraction-free elimination."""
    M = [[int(v) for v in r] for r in rows]
    n = len(M)
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            sw = next((i for i in range(k + 1, n) if M[i][k]), None)
            if sw is None:
                return 0
            M[k], M[sw] = M[sw], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1] if n else 1


def _affine_rank(points) -> int:
    points = list(points)
    if not points:
        return -1
    base = points[0]
    return _rank([[a - b for a, b in zip(p, base)] for p in points[1:]]) if len(points) > 1 else 0


def _rank_mod_p(rows, p: int) -> int:
    M = [[int(v) % p for v in r] for r in rows]
    rank, col, ncols = 0, 0, len(M[0]) if M else 0
    while rank < len(M) and col < ncols:
        piv = next((i for i in range(rank, len(M)) if M[i][col]), None)
        if piv is None:
            col += 1
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][col], -1, p)
        M[rank] = [(v * inv) % p for v in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][col]:
                f = M[i][col]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[rank])]
        rank += 1
        col += 1
    return rank


# -- polytope ------------------------------------------------------------------


@dataclass(frozen=True)
class Facet:
    normal: tuple[int, ...]
    offset: int
    points: frozenset  # indices into NewtonPolytope.points

    def equation(self) -> str:
        lhs = " + ".join(f"{a}*x{j + 1}" for j, a in enumerate(self.normal) if a) or "0"
        return f"{lhs} = {self.offset}"


@dataclass(frozen=True)
class Face:
    points: frozenset  # indices into NewtonPolytope.points
    dim: int
    contains_origin: bool


@dataclass
class NewtonPolytope:
    dim: int
    points: tuple  # index 0 is the origin
    monomial_index: dict  # point index -> monomial indices with that exponent
    all_facets: list = dc_field(default_factory=list)

    @property
    def facets(self) -> list[Facet]:
        """Facets not containing the origin, with primitive normal and offset > 0."""
        return [f for f in self.all_facets if f.offset > 0]

    @cached_property
    def vertices(self) -> tuple:
        verts = []
        for i, pt in enumerate(self.points):
            normals = [f.normal for f in self.all_facets if i in f.points]
            if normals and _rank(normals) == self.dim:
                verts.append(pt)
        return tuple(verts)

    @cached_property
    def face_lattice(self) -> list[Face]:
        sets = {frozenset(f.points) for f in self.all_facets}
        frontier = set(sets)
        while frontier:
            new = set()
            for a in frontier:
                for b in sets:
                    c = a & b
                    if c and c not in sets:
                        new.add(c)
            sets |= new
            frontier = new
        faces = [
            Face(s, _affine_rank(self.points[i] for i in s), 0 in s)
            for s in sets
        ]
        faces.append(Face(frozenset(range(len(self.points))), self.dim, True))
        faces.sort(key=lambda f: (-f.dim, sorted(f.points)))
        return faces

    def faces_off_origin(self) -> list[Face]:
        return [f for f in self.face_lattice if not f.contains_origin]

    def face_vertices(self, face: Face) -> frozenset:
        vset = set(self.vertices)
        return frozenset(i for i in face.points if self.points[i] in vset)

    def monomials_of(self, face: Face) -> list[int]:
        return sorted(j for i in face.points for j in self.monomial_index.get(i, ()))


class PolytopeError(ValueError):
    pass


@lru_cache(maxsize=512)
def newton_polytope(fam: LaurentFamily) -> NewtonPolytope:
    d = fam.dim
    origin = (0,) * d
    pts = [origin]
    index: dict[int, list[int]] = {}
    for j, a in enumerate(fam.monomials):
        a = tuple(int(v) for v in a)
        if a not in pts:
            pts.append(a)
        index.setdefault(pts.index(a), []).append(j)
    if _rank(pts[1:]) < d:
        raise PolytopeError(f"{fam.name}: hull is not full-dimensional")

    P = np.array(pts, dtype=np.int64)
    seen = {}
    for sub in combinations(range(len(pts)), d):
        ns = _nullspace([list(pts[i]) + [-1] for i in sub])
        if len(ns) != 1:
            continue
        vec = _primitive(list(ns[0]))
        normal, offset = np.array(vec[:d], dtype=np.int64), vec[d]
        if not normal.any():
            continue
        vals = P @ normal - offset
        if np.all(vals <= 0):
            pass
        elif np.all(vals >= 0):
            normal, offset, vals = -normal, -offset, -vals
        else:
            continue
        on = frozenset(int(i) for i in np.flatnonzero(vals == 0))
        if _affine_rank(pts[i] for i in on) != d - 1:
            continue
        key = (tuple(int(v) for v in normal), int(offset))
        seen[key] = on
    facets = [Facet(k[0], k[1], on) for k, on in seen.items()]
    facets.sort(key=lambda f: (-f.offset, f.normal))
    return NewtonPolytope(d, tuple(pts), index, facets)


def facets_off_origin(poly: NewtonPolytope) -> list[Facet]:
    return poly.facets


def _subfaces(poly: NewtonPolytope, face: Face) -> list[Face]:
    return [g for g in poly.face_lattice if g.dim == face.dim - 1 and g.points < face.points]


def _triangulate(poly: NewtonPolytope, face: Face) -> list[tuple[int, ...]]:
    """Pulling triangulation of a face into simplices of its vertices."""
    verts = sorted(poly.face_vertices(face))
    if len(verts) == face.dim + 1:
        return [tuple(verts)]
    apex = verts[0]
    out = []
    for g in _subfaces(poly, face):
        if apex in g.points:
            continue
        out.extend((apex,) + s for s in _triangulate(poly, g))
    return out


def normalized_volume(poly: NewtonPolytope) -> int:
    """dim! vol(poly): origin cones over a triangulation of each off-origin facet."""
    total = 0
    for facet in poly.faces_off_origin():
        if facet.dim != poly.dim - 1:
            continue
        for simplex in _triangulate(poly, facet):
            total += abs(_det([poly.points[i] for i in simplex]))
    return total


def lattice_volume_oracle(poly: NewtonPolytope) -> float:
    """Independent float cross-check through Qhull."""
    from scipy.spatial import ConvexHull

    return ConvexHull(np.array(poly.points, dtype=float)).volume * factorial(poly.dim)


# -- face restriction and verdicts ---------------------------------------------


@dataclass(frozen=True)
class FaceRestriction:
    family: LaurentFamily
    members: tuple[int, ...]
    determinant: int | None  # exponent-matrix determinant for diagonal faces


def face_restriction(fam: LaurentFamily, poly: NewtonPolytope, face: Face) -> FaceRestriction:
    members = tuple(poly.monomials_of(face))
    sub = fam.restrict(members)
    det = None
    if len(members) == fam.dim:
        det = _det(sub.monomials)
    return FaceRestriction(sub, members, det)


@lru_cache(maxsize=None)
def _independent_mod_p(monomials: tuple, p: int) -> bool:
    k = len(monomials)
    return _rank(monomials) == k and _rank_mod_p(monomials, p) == k


@dataclass(frozen=True)
class NondegVerdict:
    status: str  # nondegenerate | degenerate | undetermined
    method: str
    witness: tuple | None = None  # torus point, encodings in the field below
    witness_field: tuple | None = None  # (p, n) of F_{q^s}
    depth: int | None = None
    determinant: int | None = None

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def exceptional_parameter(fam: LaurentFamily, F: FieldTable) -> int | None:
    """m^{-(n+1)} for fhat_family(n, m) with n+1 = 2m and p not dividing m."""
    if fam.kind != "fhat":
        return None
    n, m = fam.params
    if n + 1 != 2 * m or m % F.p == 0:
        return None
    return F.pow(F.from_prime(m % F.p), -(n + 1))


def critical_system(sub: LaurentFamily, coeffs, F: FieldTable, x) -> list[int]:
    """Values of x_j d/dx_j of the restricted polynomial at the torus point x (encodings)."""
    x = np.asarray(x, dtype=np.int64).reshape(1, -1)
    out = _critical_values(sub, coeffs, F, x)
    return [int(v[0]) for v in out]


def _critical_values(sub: LaurentFamily, coeffs, F: FieldTable, grid: np.ndarray) -> list[np.ndarray]:
    qm1 = F.q - 1
    terms = []
    for c, alpha in zip(coeffs, sub.monomials):
        mono = (grid @ np.array(alpha, dtype=np.int64)) % qm1 if qm1 > 1 else np.zeros(len(grid), np.int64)
        terms.append(F.mul_v(c, mono))
    out = []
    for j in range(sub.dim):
        acc = np.full(len(grid), F.zero, dtype=np.int64)
        for t, alpha in zip(terms, sub.monomials):
            k = alpha[j] % F.p
            if k:
                acc = F.add_v(acc, F.mul_v(F.from_prime(k), t))
        out.append(acc)
    return out


def critical_point_search(
    sub: LaurentFamily,
    coeffs,
    F: FieldTable,
    depth: int = 3,
    max_points: int = 5_000_000,
    chunk: int = 1 << 16,
):
    """First torus point (lexicographic in discrete logs) over F_{q^s}, s = 1..depth,
    where every x_j d/dx_j vanishes.  Returns (witness, s), or (None, searched_depth)
    where searched_depth is the largest s searched completely."""
    searched = 0
    for s in range(1, depth + 1):
        E = build_field(F.p, F.n * s)
        total = (E.q - 1) ** sub.dim
        if total > max_points:
            break
        emb = embedding(F, E)
        cs = [emb.image(c) for c in coeffs]
        shape = (E.q - 1,) * sub.dim
        for start in range(0, total, chunk):
            idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
            grid = np.stack(np.unravel_index(idx, shape), axis=1).astype(np.int64)
            vals = _critical_values(sub, cs, E, grid)
            hit = np.ones(len(grid), dtype=bool)
            for v in vals:
                hit &= v == E.zero
            if hit.any():
                row = grid[int(np.argmax(hit))]
                return tuple(int(v) for v in row), s
        searched = s
    return None, searched


def face_verdict(
    fam: LaurentFamily,
    poly: NewtonPolytope,
    face: Face,
    F: FieldTable,
    w: int | None,
    depth: int = 3,
    max_points: int = 5_000_000,
) -> NondegVerdict:
    r = face_restriction(fam, poly, face)
    coeffs = r.family.specialize(F, w) if r.family.unit_slots else [s.value(F, None) for s in r.family.slots]
    k = len(r.members)
    # linearly independent exponents with full rank mod p: the critical system only has u = 0
    if _independent_mod_p(r.family.monomials, F.p):
        return NondegVerdict("nondegenerate", "determinant" if r.determinant is not None else "rank",
                             determinant=r.determinant)
    if (
        fam.kind == "fhat"
        and k == len(fam.monomials)
        and exceptional_parameter(fam, F) is not None
    ):
        n, m = fam.params
        if w != exceptional_parameter(fam, F):
            return NondegVerdict("nondegenerate", "closed-form")
        inv_m = F.inv(F.from_prime(m % F.p))
        wit = tuple([inv_m] * n + [F.one, F.one])
        if any(v != F.zero for v in critical_system(r.family, coeffs, F, wit)):
            raise AssertionError("closed-form witness fails the critical system")
        return NondegVerdict("degenerate", "closed-form", wit, (F.p, F.n), 1, r.determinant)
    wit, s = critical_point_search(r.family, coeffs, F, depth, max_points)
    if wit is not None:
        return NondegVerdict("degenerate", "search", wit, (F.p, F.n * s), s, r.determinant)
    return NondegVerdict("undetermined", "search", depth=s, determinant=r.determinant)


def face_verdicts(fam: LaurentFamily, F: FieldTable, w: int | None, depth: int = 3, max_points: int = 5_000_000):
    poly = newton_polytope(fam)
    return [(face, face_verdict(fam, poly, face, F, w, depth, max_points)) for face in poly.faces_off_origin()]


def nondegeneracy_verdict(
    fam: LaurentFamily, F: FieldTable, w: int, depth: int = 3, max_points: int = 5_000_000
) -> NondegVerdict:
    """Aggregate over every face not containing the origin."""
    if fam.unit_slots:
        F.check(w)
        if w == F.zero:
            raise ValueError("w must be nonzero")
    verdicts = [v for _, v in face_verdicts(fam, F, w, depth, max_points)]
    for v in verdicts:
        if v.status == "degenerate":
            return v
    for v in verdicts:
        if v.status == "undetermined":
            return v
    methods = sorted({v.method for v in verdicts})
    return NondegVerdict("nondegenerate", "+".join(methods))


def fhat_regime(n: int, m: int) -> str:
    if n + 1 < 2 * m:
        return "n+1<2m"
    if n + 1 == 2 * m:
        return "n+1=2m"
    return "n+1>2m"


def expected_fhat_facets(n: int, m: int) -> list[tuple[tuple[int, ...], int]]:
    """Closed-form off-origin facets of fhat_family(n, m) as (primitive normal, offset)."""
    R = Fraction
    out = []
    if n + 1 < 2 * m:
        out.append(_primitive_pair([1] * (n + 1) + [R(n + 1, m)], 1))
        out.append(_primitive_pair([1] * n + [R(n + 1 - m, m), R(n + 1, m)], 1))
    elif n + 1 == 2 * m:
        out.append(_primitive_pair([1] * (n + 1) + [2], 1))
    else:
        for i in range(n):
            normal = [1] * (n + 1) + [2]
            normal[i] = 2 * m - n
            out.append(_primitive_pair(normal, 1))
        out.append(_primitive_pair([1] * (n + 1) + [2], 1))
    return sorted(out, key=lambda f: (-f[1], f[0]))


def _primitive_pair(normal, offset):
    v = _primitive(list(normal) + [offset])
    return tuple(v[:-1]), v[-1]
