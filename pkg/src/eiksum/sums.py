"""Brute-force exponential sums over finite étale algebras and tori.

Every sum is accumulated as a histogram of exponents of zeta_N, with
N = lcm(p, q - 1, q^{n_i} - 1), and reduced to an exact cyclotomic value at the
end.  Nothing here relies on an identity between sums; the identities are
checked by comparing independently computed values.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import lcm

import numpy as np

from .characters import AddChar, MultChar, descend_char, is_norm_induced
from .cyclotomic import Cyclotomic
from .etale import AlgebraError, EtaleAlgebra, base_change
from .ffield import FieldTable, embedding

DEFAULT_TORUS_BUDGET = 10**7


def _check_context(B: EtaleAlgebra, chi: MultChar, psi: AddChar | None, a: int) -> None:
    if chi.algebra is not B:
        raise AlgebraError("character lives on a different algebra")
    if psi is not None and psi.field != B.base:
        raise AlgebraError("additive character lives on a different field")
    B.base.check(a)
    if a == B.base.zero:
        raise AlgebraError("a must lie in F_q^*")


def _psi_weight(B: EtaleAlgebra) -> int:
    return B.conductor // B.base.p


def ek_sum(B: EtaleAlgebra, chi: MultChar, psi: AddChar, a: int) -> Cyclotomic:
    """sum_{N(x)=a} chi(x) psi(Tr x)."""
    _check_context(B, chi, psi, a)
    N = B.conductor
    xs = B.fiber_array(a)
    tr = B.trace_v(xs)
    exps = xs @ chi.weights(N) + psi.exponent_v(tr) * _psi_weight(B)
    return Cyclotomic.from_exponents(N, exps)


def eik_sum(B: EtaleAlgebra, chi: MultChar, psi: AddChar, a: int) -> Cyclotomic:
    """sum_{N(x)=a, Tr x != 0} chi(x) psi(1/Tr x)."""
    _check_context(B, chi, psi, a)
    N = B.conductor
    xs = B.fiber_array(a)
    tr = B.trace_v(xs)
    keep = tr != B.base.zero
    xs, tr = xs[keep], tr[keep]
    exps = xs @ chi.weights(N) + psi.exponent_v(B.base.inv_v(tr)) * _psi_weight(B)
    return Cyclotomic.from_exponents(N, exps)


def norm_fiber_char_sum(B: EtaleAlgebra, chi: MultChar, a: int) -> Cyclotomic:
    """S_chi(a) = sum_{N(x)=a} chi(x)."""
    _check_context(B, chi, None, a)
    N = B.conductor
    return Cyclotomic.from_exponents(N, B.fiber_array(a) @ chi.weights(N))


def expected_fiber_char_sum(B: EtaleAlgebra, chi: MultChar, a: int) -> Cyclotomic:
    """Closed form of S_chi(a): chi_0(a) |B^*|/(q-1) if chi = chi_0 o N, else 0."""
    e0 = is_norm_induced(chi)
    N = B.conductor
    if e0 is None:
        return Cyclotomic.zero(N)
    qm1 = B.base.q - 1
    return Cyclotomic.root(N, e0 * a * (N // qm1)).scale(B.unit_count // qm1)


def main_term(B: EtaleAlgebra, chi: MultChar, a: int) -> Cyclotomic:
    """chi(N^{-1}(a)) |B^*| / (q (q-1)) when chi is norm induced, else 0 (= S_chi(a)/q)."""
    return expected_fiber_char_sum(B, chi, a).scale(Fraction(1, B.base.q))


def _unfolded_grid(B: EtaleAlgebra, a: int):
    F = B.base
    xs = B.fiber_array(a)
    tr = B.trace_v(xs)
    ys = np.arange(F.q - 1, dtype=np.int64)
    zs = np.arange(F.q, dtype=np.int64)  # includes the zero sentinel
    X, Y, Z = np.meshgrid(np.arange(xs.shape[0]), ys, zs, indexing="ij")
    T = tr[X]
    # y + z - y z Tr(x)
    val = F.add_v(F.add_v(Y, Z), F.neg_v(F.mul_v(F.mul_v(Y, Z), T)))
    return xs[X.ravel()], val.ravel(), Z.ravel()


def unfolded_sum(B: EtaleAlgebra, chi: MultChar, psi: AddChar, a: int) -> Cyclotomic:
    """sum over N(x)=a, y in F_q^*, z in F_q of chi(x) psi(y + z - y z Tr x), by full enumeration."""
    _check_context(B, chi, psi, a)
    N = B.conductor
    xs, val, _ = _unfolded_grid(B, a)
    exps = xs @ chi.weights(N) + psi.exponent_v(val) * _psi_weight(B)
    return Cyclotomic.from_exponents(N, exps)


def unfolded_parts(B: EtaleAlgebra, chi: MultChar, psi: AddChar, a: int) -> tuple[Cyclotomic, Cyclotomic]:
    """(z = 0 part, z != 0 part) of :func:`unfolded_sum`, each by enumeration.

    The z = 0 part collapses to (sum_{y != 0} psi(y)) S_chi(a) = -S_chi(a); the
    z != 0 part is the torus sum that the toric identities rewrite.
    """
    _check_context(B, chi, psi, a)
    N = B.conductor
    xs, val, zs = _unfolded_grid(B, a)
    exps = xs @ chi.weights(N) + psi.exponent_v(val) * _psi_weight(B)
    at_zero = zs == B.base.zero
    return (
        Cyclotomic.from_exponents(N, exps[at_zero]),
        Cyclotomic.from_exponents(N, exps[~at_zero]),
    )


def laurent_fiber_sum(
    fam,
    coeffs,
    twists,
    psi: AddChar | None,
    field: FieldTable,
    budget: int = DEFAULT_TORUS_BUDGET,
) -> Cyclotomic:
    """sum over x in (F_q^*)^v of prod_j chi_{t_j}(x_j) psi(f(x)).

    ``coeffs`` gives one F_q encoding per monomial of ``fam``; ``twists`` gives
    per-variable exponents t_j with chi_{t_j}(gen) = zeta_{q-1}^{t_j} (None for
    all trivial).  ``psi=None`` evaluates with the trivial additive character.
    """
    F = field
    v = fam.dim
    coeffs = list(coeffs)
    if len(coeffs) != len(fam.monomials) or any(c is None for c in coeffs):
        raise ValueError(f"{fam.name}: every one of the {len(fam.monomials)} coefficient slots must be assigned")
    for c in coeffs:
        F.check(c)
    for slot in fam.unit_slots:
        if coeffs[slot] == F.zero:
            raise ValueError(f"{fam.name}: coefficient slot {slot} must be a unit (w != 0)")
    twists = [0] * v if twists is None else [int(t) for t in twists]
    if len(twists) != v:
        raise ValueError(f"{fam.name}: need {v} twist exponents")
    if (F.q - 1) ** v > budget:
        raise ValueError(f"torus has {(F.q - 1) ** v} points, above budget {budget}")
    if psi is not None and psi.field != F:
        raise ValueError("additive character lives on a different field")

    qm1 = F.q - 1
    N = lcm(F.p, qm1)
    grid = np.indices((qm1,) * v).reshape(v, -1).T.astype(np.int64)
    total = np.full(grid.shape[0], F.zero, dtype=np.int64)
    for c, alpha in zip(coeffs, fam.monomials):
        mono = (grid @ np.array(alpha, dtype=np.int64)) % qm1 if qm1 > 1 else grid[:, 0] * 0
        total = F.add_v(total, F.mul_v(c, mono))
    exps = (grid @ np.array(twists, dtype=np.int64)) * (N // qm1)
    if psi is not None:
        exps = exps + psi.exponent_v(total) * (N // F.p)
    return Cyclotomic.from_exponents(N, exps)


@lru_cache(maxsize=256)
def extended_algebra(B: EtaleAlgebra, m: int):
    """Cached base change B (x) F_{q^m} with its norm-descent map."""
    return base_change(B, m)


def extend_add_char(psi: AddChar, target: FieldTable) -> AddChar:
    """psi o Tr_{F_{q^m}/F_q} as a character of F_{q^m}."""
    return AddChar(target, embedding(psi.field, target).image(psi.c))


def eik_extended(B: EtaleAlgebra, m: int, chi: MultChar, psi: AddChar, a: int) -> Cyclotomic:
    """EIK(F_{q^m}, a): the sum over (B (x) F_{q^m})^* with chi o N_{B(x)F_{q^m}/B} and psi o Tr."""
    Bp, descent = extended_algebra(B, m)
    return eik_sum(Bp, descend_char(chi, descent), extend_add_char(psi, Bp.base), a)


def wild_split(n_plus_1: int, p: int) -> tuple[int, int]:
    """(p^k, m) with n+1 = p^k m and p not dividing m."""
    pk, m = 1, n_plus_1
    while m % p == 0:
        pk, m = pk * p, m // p
    return pk, m


def exceptional_value(field: FieldTable, n_plus_1: int) -> int | None:
    """m^{-(n+1)} in F_q, where n+1 = p^k m, or None when m = 0 in F_q."""
    _, m = wild_split(n_plus_1, field.p)
    mm = field.from_prime(m)
    if mm == field.zero:
        return None
    return field.pow(mm, -n_plus_1)


def bound_regime(B: EtaleAlgebra, psi: AddChar, a: int) -> tuple[str, int | None]:
    """Which square-root bound applies to EIK(a) + main term: (regime, rank).

    ``tame``: p does not divide n+1, rank 2n+2.  ``wild``: p | n+1, rank n+1.
    ``exceptional``: p^k = 2 and a c^{-(n+1)} = m^{-(n+1)} (no bound asserted).
    A twist c outside F_p is moved onto a via psi_c(1/Tr x) = psi_1(c/Tr x).
    """
    F = B.base
    n1 = B.degree
    if n1 % F.p:
        return "tame", 2 * n1
    pk, _ = wild_split(n1, F.p)
    if pk == 2:
        shifted = F.mul(a, F.pow(psi.c, -n1))
        if shifted == exceptional_value(F, n1):
            return "exceptional", None
    return "wild", n1


def bound_value(B: EtaleAlgebra, rank: int) -> float:
    return rank * B.base.q ** (B.n / 2)
