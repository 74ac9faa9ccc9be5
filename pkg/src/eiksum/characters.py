"""Additive characters of F_q and multiplicative characters of B^*.

psi_c(t) = zeta_p^{Tr_{F_q/F_p}(c t)} and chi(x) = prod_i zeta_{q^{n_i}-1}^{e_i log x_i}.
Characters are evaluated to exponents of zeta_N first (cheap integer work) and
to :class:`~eiksum.cyclotomic.Cyclotomic` values only on request.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm

import numpy as np

from .cyclotomic import Cyclotomic
from .etale import AlgebraError, EtaleAlgebra, NormDescentMap
from .ffield import FieldTable


@dataclass(frozen=True)
class AddChar:
    """psi(t) = zeta_p^{Tr(c t)} on F_q, for a nonzero twist c (an encoding)."""

    field: FieldTable
    c: int

    def __post_init__(self):
        self.field.check(self.c)
        if self.c == self.field.zero:
            raise ValueError("the additive character must be nontrivial (c != 0)")

    def exponent(self, t: int) -> int:
        """Exponent of zeta_p in psi(t)."""
        F = self.field
        return F.trace_prime(F.mul(self.c, t))

    def exponent_v(self, t) -> np.ndarray:
        F = self.field
        return F.trace_to_prime[F.mul_v(self.c, t)]

    def __call__(self, t: int) -> Cyclotomic:
        return Cyclotomic.root(self.field.p, self.exponent(t))

    def conj(self) -> AddChar:
        return AddChar(self.field, self.field.neg(self.c))

    def twisted(self, b: int) -> AddChar:
        """psi o b : t -> psi(b t)."""
        return AddChar(self.field, self.field.mul(self.c, b))

    def is_normalized(self) -> bool:
        """True iff psi = psi_0 o Tr_{F_q/F_p}, i.e. c lies in F_p^*."""
        F = self.field
        return F.to_int(self.c) < F.p


@dataclass(frozen=True)
class MultChar:
    """chi on B^* given by exponents e_i modulo q^{n_i} - 1 against each factor generator."""

    algebra: EtaleAlgebra
    exps: tuple

    def __post_init__(self):
        B = self.algebra
        if len(self.exps) != len(B.fields):
            raise ValueError(f"need {len(B.fields)} exponents, got {len(self.exps)}")
        object.__setattr__(
            self, "exps", tuple(int(e) % order for e, order in zip(self.exps, B.unit_orders))
        )

    @property
    def conductor(self) -> int:
        return lcm(*self.algebra.unit_orders)

    def weights(self, N: int) -> np.ndarray:
        """w_i with chi(x) = zeta_N^{sum_i w_i log x_i}; N must be a multiple of every q^{n_i}-1."""
        return np.array(
            [e * (N // order) for e, order in zip(self.exps, self.algebra.unit_orders)],
            dtype=np.int64,
        )

    def exponent(self, x, N: int | None = None) -> int:
        N = N or self.conductor
        self.algebra._require_unit(x)
        return int(sum(int(w) * xi for w, xi in zip(self.weights(N), x)) % N)

    def __call__(self, x) -> Cyclotomic:
        N = self.conductor
        return Cyclotomic.root(N, self.exponent(x, N))

    def is_trivial(self) -> bool:
        return not any(self.exps)

    def conj(self) -> MultChar:
        return MultChar(self.algebra, tuple(-e for e in self.exps))

    def component(self, i: int) -> int:
        """Exponent of chi_i, the restriction to the i-th factor."""
        return self.exps[i]


def all_mult_chars(B: EtaleAlgebra):
    """Every character of B^*, in lexicographic exponent order."""
    for exps in np.ndindex(*B.unit_orders):
        yield MultChar(B, tuple(int(e) for e in exps))


def eval_add_char(psi: AddChar, t: int) -> Cyclotomic:
    return psi(t)


def eval_mult_char(chi: MultChar, x) -> Cyclotomic:
    return chi(x)


def is_norm_induced(chi: MultChar) -> int | None:
    """e_0 (mod q - 1) with chi = chi_0 o N_{B/F_q}, chi_0(gen) = zeta_{q-1}^{e_0}; else None.

    chi_i = chi_0 o N_{n_i} reads e_i = e_0 * w_i * (q^{n_i}-1)/(q-1), where
    w_i is the norm weight of factor i (log N_{n_i}(x) = w_i log x).
    """
    B = chi.algebra
    qm1 = B.base.q - 1
    if qm1 == 1:
        return 0 if chi.is_trivial() else None
    F0, emb0 = B.factors[0]
    index0 = emb0.index
    if chi.exps[0] % index0:
        return None
    # w_0 = kinv_0, so e_0 = (e_1 / index) * k_0
    e0 = ((chi.exps[0] // index0) * emb0.k) % qm1
    for e, (F, emb) in zip(chi.exps, B.factors):
        if (e0 * emb.kinv * emb.index) % F.order != e:
            return None
    return e0


def trivial_on_norm_kernel(chi: MultChar) -> bool:
    """Exhaustive test: chi(x) = 1 for every x with N(x) = 1."""
    B = chi.algebra
    kernel = B.fiber_array(B.base.one)
    N = chi.conductor
    return bool(np.all((kernel @ chi.weights(N)) % N == 0))


def descend_char(chi: MultChar, descent: NormDescentMap) -> MultChar:
    """chi' = chi o N_{B'/B} as a character of B' = B (x) F_{q^m}."""
    if descent.target is not chi.algebra:
        raise AlgebraError("descent map does not start from the character's algebra")
    Bp = descent.source
    exps = [0] * len(Bp.fields)
    for e, F, block, d in zip(chi.exps, chi.algebra.fields, descent.blocks, descent.coeffs):
        for pos, dj in zip(block, d):
            # chi_i(N(y)) = zeta_{Q_n - 1}^{e d_j y_j} = zeta_{Q_L - 1}^{e d_j index y_j}
            index = Bp.fields[pos].order // F.order
            exps[pos] = e * dj * index
    return MultChar(Bp, tuple(exps))


def character_values_on(chi: MultChar, xs: np.ndarray, N: int) -> np.ndarray:
    """Exponents of zeta_N for chi on each row of xs."""
    return (xs @ chi.weights(N)) % N
