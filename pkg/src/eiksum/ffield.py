"""Finite fields F_{p^n} in generator-power (Zech logarithm) form.

Elements are encoded as integers.  A nonzero element is stored as its discrete
logarithm ``j`` in ``[0, q-2]`` with respect to the fixed primitive element
``gen``; the value zero is the sentinel ``q - 1`` (``FieldTable.zero``).  With
this choice every lookup table is indexed directly by the encoding.

The polynomial ("integer") form of an element packs its coefficients in base
``p`` with the constant term as least significant digit, so the prime subfield
F_p is the set of integers ``0..p-1``.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from math import gcd

import numpy as np
from sympy import factorint, isprime

DEFAULT_TABLE_BUDGET = 1 << 20


class FieldError(ValueError):
    """Invalid field parameters or an incompatible pair of fields."""


class BudgetError(FieldError):
    """Requested table is larger than the configured budget."""


def _polymulmod(a, b, mod, p):
    # a, b: coefficient lists of length n (low degree first); mod monic, length n+1
    n = len(mod) - 1
    prod = [0] * (2 * n - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    prod[i + j] = (prod[i + j] + ai * bj) % p
    for d in range(2 * n - 2, n - 1, -1):
        c = prod[d]
        if c:
            for i in range(n + 1):
                prod[d - n + i] = (prod[d - n + i] - c * mod[i]) % p
    return prod[:n]


def _polypowmod_x(e, mod, p):
    n = len(mod) - 1
    result = [1] + [0] * (n - 1)
    base = [0] * n
    if n == 1:
        base[0] = (-mod[0]) % p
    else:
        base[1] = 1
    while e:
        if e & 1:
            result = _polymulmod(result, base, mod, p)
        base = _polymulmod(base, base, mod, p)
        e >>= 1
    return result


def _is_primitive(mod, p):
    """True iff x generates (F_p[x]/mod)^* of order p^n - 1 (which forces irreducibility)."""
    n = len(mod) - 1
    if mod[0] == 0:
        return False
    order = p**n - 1
    one = [1] + [0] * (n - 1)
    if _polypowmod_x(order, mod, p) != one:
        return False
    return all(_polypowmod_x(order // r, mod, p) != one for r in factorint(order))


def primitive_modulus(p: int, n: int) -> tuple[int, ...]:
    """Lexicographically smallest monic primitive polynomial of degree n over F_p.

    Coefficients are listed low degree first and compared lexicographically in
    that order (constant term most significant).
    """
    for low in product(range(p), repeat=n):
        mod = list(low) + [1]
        if _is_primitive(mod, p):
            return tuple(mod)
    raise FieldError(f"no primitive polynomial of degree {n} over F_{p}")  # unreachable


class FieldTable:
    """Immutable log/antilog/Zech tables for F_{p^n}."""

    def __init__(self, p: int, n: int, modulus: tuple[int, ...]):
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != n + 1 or modulus[-1] != 1 or not _is_primitive(list(modulus), p):
            raise FieldError(f"{list(modulus)} is not a monic primitive polynomial of degree {n} over F_{p}")
        self.p = p
        self.n = n
        self.q = q = p**n
        self.modulus = modulus
        self.order = q - 1  # size of the unit group
        self.zero = q - 1
        self.one = 0
        self.gen = 1 % (q - 1)  # encoding of the primitive element (log 1; F_2 has only log 0)

        # antilog: log -> integer form; log: integer form -> encoding
        exp_int = np.empty(q - 1, dtype=np.int64)
        log_int = np.empty(q, dtype=np.int64)
        log_int[0] = self.zero
        coeffs = [1] + [0] * (n - 1)
        weights = [p**i for i in range(n)]
        shift = [(-c) % p for c in modulus[:n]]
        for j in range(q - 1):
            v = sum(c * w for c, w in zip(coeffs, weights))
            exp_int[j] = v
            log_int[v] = j
            # multiply by x modulo the modulus
            top = coeffs[-1]
            coeffs = [0] + coeffs[:-1]
            if top:
                coeffs = [(c + top * s) % p for c, s in zip(coeffs, shift)]
        self.exp_int = exp_int
        self.log_int = log_int

        # zech[j] = log(1 + gen^j); zech[zero] = log(1 + 0) = 0
        digits = self._digits(exp_int)
        one_digits = np.zeros(n, dtype=np.int64)
        one_digits[0] = 1
        summed = (digits + one_digits) % p
        zech = np.empty(q, dtype=np.int64)
        zech[: q - 1] = log_int[summed @ np.array(weights, dtype=np.int64)]
        zech[q - 1] = 0
        self.zech = zech

        # log of -1
        self.minus_one = 0 if p == 2 else (q - 1) // 2

        # absolute trace to F_p, as an integer in [0, p)
        tr = np.empty(q, dtype=np.int64)
        frob_sum = np.full(q - 1, self.zero, dtype=np.int64)
        logs = np.arange(q - 1, dtype=np.int64)
        for i in range(n):
            frob_sum = self.add_v(frob_sum, (logs * pow(p, i, q - 1)) % (q - 1))
        tr[: q - 1] = self.exp_int_v(frob_sum)
        tr[q - 1] = 0
        self.trace_to_prime = tr
        for arr in (self.exp_int, self.log_int, self.zech, self.trace_to_prime):
            arr.setflags(write=False)

    def __repr__(self) -> str:
        return f"FieldTable(p={self.p}, n={self.n}, modulus={list(self.modulus)})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldTable)
            and (self.p, self.n, self.modulus) == (other.p, other.n, other.modulus)
        )

    def __hash__(self) -> int:
        return hash((self.p, self.n, self.modulus))

    def _digits(self, ints):
        ints = np.asarray(ints, dtype=np.int64)
        return np.stack([(ints // self.p**i) % self.p for i in range(self.n)], axis=-1)

    def descriptor(self) -> dict:
        return {"p": self.p, "n": self.n, "modulus": list(self.modulus)}

    # conversions -----------------------------------------------------------

    def from_int(self, v: int) -> int:
        """Encoding of the element whose base-p digits are its coefficients."""
        if not 0 <= v < self.q:
            raise FieldError(f"{v} is not an element of F_{self.q}")
        return int(self.log_int[v])

    def to_int(self, x: int) -> int:
        return 0 if x == self.zero else int(self.exp_int[x])

    def exp_int_v(self, x):
        x = np.asarray(x)
        out = np.zeros(x.shape, dtype=np.int64)
        nz = x != self.zero
        out[nz] = self.exp_int[x[nz]]
        return out

    def elements(self) -> range:
        """All encodings: the units in log order, then zero."""
        return range(self.q)

    def units(self) -> range:
        return range(self.q - 1)

    def check(self, x: int) -> None:
        if not (isinstance(x, (int, np.integer)) and 0 <= x < self.q):
            raise FieldError(f"{x!r} is not a valid encoding in F_{self.q}")

    # arithmetic ------------------------------------------------------------

    def add(self, x: int, y: int) -> int:
        z = self.zero
        if x == z:
            return y
        if y == z:
            return x
        t = int(self.zech[(y - x) % self.order])
        return z if t == z else (x + t) % self.order

    def neg(self, x: int) -> int:
        if x == self.zero:
            return x
        return (x + self.minus_one) % self.order

    def sub(self, x: int, y: int) -> int:
        return self.add(x, self.neg(y))

    def mul(self, x: int, y: int) -> int:
        if x == self.zero or y == self.zero:
            return self.zero
        return (x + y) % self.order

    def inv(self, x: int) -> int:
        if x == self.zero:
            raise ZeroDivisionError("inverse of 0 in a finite field")
        return (-x) % self.order

    def div(self, x: int, y: int) -> int:
        return self.mul(x, self.inv(y))

    def pow(self, x: int, k: int) -> int:
        if x == self.zero:
            if k < 0:
                raise ZeroDivisionError("negative power of 0")
            return self.one if k == 0 else self.zero
        return (x * k) % self.order

    def from_prime(self, k: int) -> int:
        """Encoding of the integer k reduced into the prime subfield."""
        return int(self.log_int[k % self.p])

    def trace_prime(self, x: int) -> int:
        """Tr_{F_q/F_p}(x) as an integer in [0, p)."""
        return int(self.trace_to_prime[x])

    # numpy-vectorized variants used in the summation loops

    def add_v(self, x, y):
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        z = self.zero
        t = self.zech[(y - x) % self.order]
        r = np.where(t == z, z, (x + t) % self.order)
        r = np.where(x == z, y, r)
        return np.where(y == z, x, r)

    def mul_v(self, x, y):
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        z = self.zero
        return np.where((x == z) | (y == z), z, (x + y) % self.order)

    def inv_v(self, x):
        x = np.asarray(x, dtype=np.int64)
        if np.any(x == self.zero):
            raise ZeroDivisionError("inverse of 0 in a finite field")
        return (-x) % self.order

    def neg_v(self, x):
        x = np.asarray(x, dtype=np.int64)
        return np.where(x == self.zero, x, (x + self.minus_one) % self.order)


@lru_cache(maxsize=None)
def _build(p: int, n: int) -> FieldTable:
    return FieldTable(p, n, primitive_modulus(p, n))


def build_field(p: int, n: int, budget: int = DEFAULT_TABLE_BUDGET) -> FieldTable:
    """Deterministic table for F_{p^n}; results are cached per (p, n)."""
    if not (isinstance(p, int) and isprime(p)):
        raise FieldError(f"characteristic {p!r} is not prime")
    if not (isinstance(n, int) and n >= 1):
        raise FieldError(f"extension degree {n!r} must be a positive integer")
    if p**n > budget:
        raise BudgetError(f"F_{p}^{n} has {p**n} elements, above the table budget {budget}")
    return _build(p, n)


def field_arith(F: FieldTable, op: str, *args: int) -> int:
    """Dispatch ``op`` in {add, mul, inv, neg, pow} on encodings of F."""
    if op == "pow":
        x, k = args
        F.check(x)
        return F.pow(x, k)
    for a in args:
        F.check(a)
    try:
        fn = {"add": F.add, "mul": F.mul, "inv": F.inv, "neg": F.neg, "sub": F.sub}[op]
    except KeyError:
        raise FieldError(f"unknown field operation {op!r}") from None
    return fn(*args)


class Embedding:
    """Field homomorphism sub -> sup, linear in log coordinates.

    ``image(e) = e * mult mod (Q - 1)`` where ``mult = k * (Q-1)/(q-1)`` and
    ``gen_sup^mult`` is a root of the modulus of ``sub``.
    """

    def __init__(self, sub: FieldTable, sup: FieldTable, k: int):
        self.sub = sub
        self.sup = sup
        self.index = (sup.q - 1) // (sub.q - 1)
        self.k = k
        self.kinv = pow(k, -1, sub.q - 1) if sub.q > 2 else 0
        self.mult = (k * self.index) % (sup.q - 1)

    def __repr__(self) -> str:
        return f"Embedding(F_{self.sub.q} -> F_{self.sup.q}, k={self.k})"

    def image(self, e: int) -> int:
        if e == self.sub.zero:
            return self.sup.zero
        return (e * self.mult) % self.sup.order

    def image_v(self, e):
        e = np.asarray(e, dtype=np.int64)
        return np.where(e == self.sub.zero, self.sup.zero, (e * self.mult) % self.sup.order)

    def preimage(self, y: int) -> int:
        if y == self.sup.zero:
            return self.sub.zero
        if y % self.index:
            raise FieldError(f"element {y} of F_{self.sup.q} is not in the image of F_{self.sub.q}")
        return ((y // self.index) * self.kinv) % self.sub.order

    def preimage_v(self, y):
        y = np.asarray(y, dtype=np.int64)
        nz = y != self.sup.zero
        if np.any(y[nz] % self.index):
            raise FieldError("element outside the embedded subfield")
        return np.where(nz, ((y // self.index) * self.kinv) % max(self.sub.order, 1), self.sub.zero)


def _is_root(sup: FieldTable, modulus, y: int) -> bool:
    acc = sup.zero
    power = sup.one
    for c in modulus:
        acc = sup.add(acc, sup.mul(sup.from_prime(c), power))
        power = sup.mul(power, y)
    return acc == sup.zero


def find_embedding(sub: FieldTable, sup: FieldTable, over: tuple | None = None) -> Embedding:
    """Smallest-exponent embedding of sub into sup.

    ``over = (e_sub, e_sup)`` restricts to embeddings compatible with two given
    embeddings of a common base field (``e_sup = self o e_sub``).
    """
    if sub.p != sup.p or sup.n % sub.n:
        raise FieldError(f"F_{sub.q} does not embed in F_{sup.q}")
    if sub.q == 2:
        return Embedding(sub, sup, 1)
    index = (sup.q - 1) // (sub.q - 1)
    for k in range(1, sub.q - 1):
        if gcd(k, sub.q - 1) != 1:
            continue
        if not _is_root(sup, sub.modulus, (k * index) % sup.order):
            continue
        emb = Embedding(sub, sup, k)
        if over is not None:
            e_sub, e_sup = over
            g = e_sub.sub.gen
            if emb.image(e_sub.image(g)) != e_sup.image(g):
                continue
        return emb
    raise FieldError(f"no compatible embedding F_{sub.q} -> F_{sup.q}")  # unreachable


@lru_cache(maxsize=None)
def embedding(sub: FieldTable, sup: FieldTable) -> Embedding:
    """Canonical (cached) embedding used throughout the package."""
    return find_embedding(sub, sup)


def subfield_trace_norm(sub: FieldTable, sup: FieldTable, x: int) -> tuple[int, int]:
    """Relative trace and norm of x in sup down to sub, decoded in sub.

    The norm of zero is zero.
    """
    emb = embedding(sub, sup)
    sup.check(x)
    d = sup.n // sub.n
    tr = sup.zero
    for j in range(d):
        tr = sup.add(tr, sup.pow(x, sub.q**j))
    if x == sup.zero:
        nm = sup.zero
    else:
        nm = (x * emb.index) % sup.order
    return emb.preimage(tr), emb.preimage(nm)
