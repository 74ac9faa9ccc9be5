"""Finite étale algebras B = F_{q^{n_1}} x ... x F_{q^{n_k}} over F_q.

An element of B is a plain tuple of per-factor encodings (see
:mod:`eiksum.ffield`).  Only units take part in the sums, so norm, fiber
enumeration and character evaluation reject tuples with a zero coordinate.
"""

from __future__ import annotations

from functools import cached_property
from itertools import product
from math import gcd, lcm, prod

import numpy as np

from .ffield import (
    DEFAULT_TABLE_BUDGET,
    Embedding,
    FieldError,
    FieldTable,
    build_field,
    embedding,
    find_embedding,
)

AlgebraElement = tuple


class AlgebraError(ValueError):
    pass


class EtaleAlgebra:
    """Product of finite fields over a common base field, with fixed embeddings."""

    def __init__(self, base: FieldTable, factors):
        factors = tuple(factors)
        if not factors:
            raise AlgebraError("an étale algebra needs at least one factor")
        degrees = []
        for F, emb in factors:
            if emb.sub != base or emb.sup != F:
                raise AlgebraError(f"embedding {emb} does not map the base into {F}")
            if F.p != base.p or F.n % base.n:
                raise AlgebraError(f"F_{F.q} is not an extension of F_{base.q}")
            degrees.append(F.n // base.n)
        if sum(degrees) < 2:
            raise AlgebraError("degree n+1 must be at least 2")
        self.base = base
        self.factors = factors
        self.fields = tuple(F for F, _ in factors)
        self.embeddings = tuple(e for _, e in factors)
        self.type = tuple(degrees)
        self.degree = sum(degrees)
        self.n = self.degree - 1
        self.unit_orders = tuple(F.q - 1 for F in self.fields)
        self.unit_count = prod(self.unit_orders)
        self._fibers = {}

    def __repr__(self) -> str:
        return f"EtaleAlgebra(q={self.base.q}, type={list(self.type)})"

    def descriptor(self) -> dict:
        return {"q": {"p": self.base.p, "n": self.base.n}, "type": list(self.type)}

    # per-factor tables -----------------------------------------------------

    @cached_property
    def norm_weights(self) -> np.ndarray:
        """w_i with log N(x) = sum_i w_i * log x_i mod (q - 1)."""
        return np.array([emb.kinv for emb in self.embeddings], dtype=np.int64)

    @cached_property
    def trace_tables(self) -> tuple[np.ndarray, ...]:
        """Per factor: encoding in F_{q^{n_i}} -> encoding of Tr_{n_i} in F_q."""
        q = self.base.q
        tables = []
        for (F, emb), d in zip(self.factors, self.type):
            x = np.arange(F.q, dtype=np.int64)
            acc = np.full(F.q, F.zero, dtype=np.int64)
            for j in range(d):
                xj = np.where(x == F.zero, F.zero, (x * pow(q, j, F.order)) % F.order)
                acc = F.add_v(acc, xj)
            t = emb.preimage_v(acc)
            t.setflags(write=False)
            tables.append(t)
        return tuple(tables)

    @cached_property
    def conductor(self) -> int:
        """lcm(p, q - 1, q^{n_i} - 1): every character value and sum lives in Q(zeta_N)."""
        return lcm(self.base.p, self.base.q - 1, *self.unit_orders)

    # elements --------------------------------------------------------------

    def check(self, x) -> None:
        if len(x) != len(self.fields):
            raise AlgebraError(f"element {x!r} has {len(x)} coordinates, expected {len(self.fields)}")
        for F, xi in zip(self.fields, x):
            F.check(xi)

    def is_unit(self, x) -> bool:
        return all(xi != F.zero for F, xi in zip(self.fields, x))

    def _require_unit(self, x) -> None:
        self.check(x)
        if not self.is_unit(x):
            raise AlgebraError(f"{x!r} is not a unit of {self}")

    def mul(self, x, y) -> AlgebraElement:
        return tuple(F.mul(a, b) for F, a, b in zip(self.fields, x, y))

    def diagonal(self, b: int) -> AlgebraElement:
        """Image of b in F_q under the structure map F_q -> B."""
        self.base.check(b)
        return tuple(emb.image(b) for emb in self.embeddings)

    def trace(self, x) -> int:
        """Tr_{B/F_q}(x) = sum_i Tr_{n_i}(x_i)."""
        self.check(x)
        acc = self.base.zero
        for t, xi in zip(self.trace_tables, x):
            acc = self.base.add(acc, int(t[xi]))
        return acc

    def norm(self, x) -> int:
        """N_{B/F_q}(x) = prod_i N_{n_i}(x_i) for a unit x."""
        self._require_unit(x)
        if self.base.q == 2:
            return 0
        return int(sum(w * xi for w, xi in zip(self.norm_weights, x)) % self.base.order)

    def trace_v(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized trace over an (count, k) array of elements."""
        acc = np.full(xs.shape[0], self.base.zero, dtype=np.int64)
        for i, t in enumerate(self.trace_tables):
            acc = self.base.add_v(acc, t[xs[:, i]])
        return acc

    def norm_v(self, xs: np.ndarray) -> np.ndarray:
        return (xs @ self.norm_weights) % self.base.order

    # enumeration -----------------------------------------------------------

    def units_array(self) -> np.ndarray:
        """All units in lexicographic discrete-log order, shape (|B*|, k)."""
        return np.indices(self.unit_orders).reshape(len(self.unit_orders), -1).T.astype(np.int64)

    def fiber_array(self, a: int) -> np.ndarray:
        """N^{-1}(a) in lexicographic discrete-log order, shape (|B*|/(q-1), k)."""
        base = self.base
        base.check(a)
        if a == base.zero:
            raise AlgebraError("norm fibers are only defined over F_q^*")
        if a in self._fibers:
            return self._fibers[a]
        qm1 = base.order
        orders = self.unit_orders
        last = orders[-1]
        if len(orders) > 1:
            head = np.indices(orders[:-1]).reshape(len(orders) - 1, -1).T.astype(np.int64)
        else:
            head = np.zeros((1, 0), dtype=np.int64)
        rest = (a - head @ self.norm_weights[:-1]) % qm1
        # solve w_k * e_k = rest (mod q-1); w_k is a unit mod q-1
        r = (rest * self.embeddings[-1].k) % qm1 if qm1 > 1 else rest * 0
        step = np.arange(0, last, max(qm1, 1), dtype=np.int64)
        tails = r[:, None] + step[None, :]
        count = head.shape[0] * step.size
        out = np.empty((count, len(orders)), dtype=np.int64)
        out[:, :-1] = np.repeat(head, step.size, axis=0)
        out[:, -1] = tails.ravel()
        out.setflags(write=False)
        self._fibers[a] = out
        return out

    def fiber_by_filter(self, a: int) -> np.ndarray:
        """Cross-check for :meth:`fiber_array`: filter all units by their norm."""
        units = self.units_array()
        return units[self.norm_v(units) == a]

    def enumerate(self, filter: str = "units", a: int | None = None):
        """Yield elements in lexicographic discrete-log order.

        ``filter`` is one of ``units``, ``norm_fiber`` or ``trace_nonzero_norm_fiber``.
        """
        if filter == "units":
            rows = self.units_array()
        elif filter == "norm_fiber":
            rows = self.fiber_array(a)
        elif filter == "trace_nonzero_norm_fiber":
            rows = self.fiber_array(a)
            rows = rows[self.trace_v(rows) != self.base.zero]
        else:
            raise AlgebraError(f"unknown filter {filter!r}")
        for row in rows:
            yield tuple(int(v) for v in row)


def algebra_trace(B: EtaleAlgebra, x) -> int:
    return B.trace(x)


def algebra_norm(B: EtaleAlgebra, x) -> int:
    return B.norm(x)


def build_algebra(p: int, s: int, type_, budget: int = DEFAULT_TABLE_BUDGET) -> EtaleAlgebra:
    """B = prod_i F_{q^{n_i}} over F_q, q = p^s, with canonical embeddings."""
    type_ = [int(d) for d in type_]
    if any(d < 1 for d in type_):
        raise AlgebraError(f"factor degrees must be positive: {type_}")
    base = build_field(p, s, budget)
    factors = []
    for d in type_:
        F = build_field(p, s * d, budget)
        factors.append((F, embedding(base, F)))
    return EtaleAlgebra(base, factors)


class NormDescentMap:
    """N_{B'/B} : (B')^* -> B^* for B' = B (x) F_{q^m}, in log coordinates.

    Factor i of B (degree n) becomes g = gcd(n, m) copies of F_{q^L}, L = lcm(n, m),
    identified through a (x) b -> (a^{q^j} b)_{j<g}.  ``blocks[i]`` lists the
    positions of those copies in B' and ``coeffs[i]`` the integers d_j with
    log N(y)_i = sum_j d_j log y_j mod (q^n - 1).
    """

    def __init__(self, source: EtaleAlgebra, target: EtaleAlgebra, m: int, blocks, coeffs, lifts):
        self.source = source
        self.target = target
        self.m = m
        self.blocks = tuple(tuple(b) for b in blocks)
        self.coeffs = tuple(tuple(c) for c in coeffs)
        self.lifts = tuple(lifts)  # per factor: (embedding F_{q^n} -> F_{q^L}, q-power r)

    def __repr__(self) -> str:
        return f"NormDescentMap({self.source} -> {self.target}, m={self.m})"

    def __call__(self, y) -> AlgebraElement:
        self.source._require_unit(y)
        out = []
        for F, block, d in zip(self.target.fields, self.blocks, self.coeffs):
            out.append(sum(dj * y[pos] for dj, pos in zip(d, block)) % F.order)
        return tuple(out)

    def apply_v(self, ys: np.ndarray) -> np.ndarray:
        cols = []
        for F, block, d in zip(self.target.fields, self.blocks, self.coeffs):
            cols.append((ys[:, list(block)] @ np.array(d, dtype=np.int64)) % F.order)
        return np.stack(cols, axis=1)

    def lift(self, x) -> AlgebraElement:
        """Structure map B -> B', a -> (a^{q^j})_j on each block."""
        self.target.check(x)
        q = self.target.base.q
        out = [None] * len(self.source.fields)
        for xi, block, (emb, _) in zip(x, self.blocks, self.lifts):
            FL = emb.sup
            a = emb.image(xi)
            for j, pos in enumerate(block):
                out[pos] = FL.pow(a, q**j) if a != FL.zero else FL.zero
        return tuple(out)


def _descent_coefficients(q: int, n: int, m: int, order_L: int) -> tuple[list[int], int]:
    g = gcd(n, m)
    L = lcm(n, m)
    # phi = id (x) Frob_q acts by y'_j = y_{j-1}^q (j >= 1), y'_0 = y_{g-1}^{q^r}
    r = next(t for t in range(L) if t % m == 1 % m and t % n == (1 - g) % n)
    comps = [[int(i == j) for i in range(g)] for j in range(g)]
    acc = [0] * g
    for _ in range(m):
        acc = [(u + v) % order_L for u, v in zip(acc, comps[0])]
        comps = [[(pow(q, r, order_L) * c) % order_L for c in comps[g - 1]]] + [
            [(q * c) % order_L for c in comps[j - 1]] for j in range(1, g)
        ]
    return acc, r


def base_change(B: EtaleAlgebra, m: int, budget: int = DEFAULT_TABLE_BUDGET):
    """Return (B', descent) with B' = B (x)_{F_q} F_{q^m} as an algebra over F_{q^m}."""
    if not (isinstance(m, int) and m >= 1):
        raise AlgebraError(f"extension degree {m!r} must be a positive integer")
    base = B.base
    p, s, q = base.p, base.n, base.q
    new_base = build_field(p, s * m, budget)
    e_m = embedding(base, new_base)
    entries = []  # (L, i, j, field, structure embedding)
    per_factor = []
    for i, ((F, e_n), n) in enumerate(zip(B.factors, B.type)):
        g, L = gcd(n, m), lcm(n, m)
        FL = build_field(p, s * L, budget)
        e_L = embedding(base, FL)
        iota_m = find_embedding(new_base, FL, over=(e_m, e_L))
        iota_n = find_embedding(F, FL, over=(e_n, e_L))
        c, r = _descent_coefficients(q, n, m, FL.order)
        if any(cj % iota_n.index for cj in c):
            raise FieldError("descent coefficients leave the subfield")  # guards the construction
        d = [((cj // iota_n.index) * iota_n.kinv) % F.order for cj in c]
        per_factor.append((iota_n, r, d))
        for j in range(g):
            entries.append((L, i, j, FL, iota_m))
    entries.sort(key=lambda t: t[:3])
    new = EtaleAlgebra(new_base, [(FL, iota) for _, _, _, FL, iota in entries])
    blocks = [[None] * gcd(n, m) for n in B.type]
    for pos, (_, i, j, _, _) in enumerate(entries):
        blocks[i][j] = pos
    descent = NormDescentMap(
        new, B, m, blocks, [d for _, _, d in per_factor], [(iota_n, r) for iota_n, r, _ in per_factor]
    )
    return new, descent
