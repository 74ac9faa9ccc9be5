"""Exact elements of Q(zeta_N) in the power basis 1, z, ..., z^(phi(N)-1).

A value is ``coeffs / den``: an integer residue modulo the N-th cyclotomic
polynomial together with a positive integer denominator.  Sums of roots of
unity are built from exponent histograms (the group ring Z[x]/(x^N - 1)) and
reduced once.  Equality is coefficient equality after promotion to a common
conductor; floats only enter through :meth:`Cyclotomic.abs_val`.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm

import numpy as np
from sympy import Poly, cyclotomic_poly, symbols, totient

MAX_CONDUCTOR = 200_000
_INT64_SAFE = 1 << 62


class ConductorOverflow(ArithmeticError):
    """Conductor promotion beyond MAX_CONDUCTOR."""


@lru_cache(maxsize=None)
def _phi_poly(N: int) -> tuple[int, ...]:
    x = symbols("x")
    # low degree first
    return tuple(int(c) for c in reversed(Poly(cyclotomic_poly(N, x), x).all_coeffs()))


@lru_cache(maxsize=None)
def _degree(N: int) -> int:
    return int(totient(N))


@lru_cache(maxsize=64)
def _reduction(N: int) -> tuple[np.ndarray, int]:
    """Row j holds x^j mod Phi_N for 0 <= j < N; also returns max |entry|."""
    if N > MAX_CONDUCTOR:
        raise ConductorOverflow(f"conductor {N} exceeds {MAX_CONDUCTOR}")
    phi = _phi_poly(N)
    d = len(phi) - 1
    rows = np.zeros((N, d), dtype=object)
    cur = [0] * d
    cur[0] = 1
    for j in range(N):
        rows[j] = cur
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * f for c, f in zip(cur, phi[:d])]
    bound = max((abs(int(v)) for v in rows.flat), default=1)
    if bound < _INT64_SAFE:
        rows = rows.astype(np.int64)
    rows.setflags(write=False)
    return rows, bound


def _reduce(N: int, hist) -> tuple[int, ...]:
    """Reduce an exponent histogram (length N, integer entries) modulo Phi_N."""
    rows, bound = _reduction(N)
    hist = np.asarray(hist)
    nz = np.flatnonzero(hist)
    if nz.size == 0:
        return (0,) * rows.shape[1]
    weights = hist[nz]
    mass = int(np.abs(weights.astype(object)).sum())
    if rows.dtype == np.int64 and mass * bound < _INT64_SAFE:
        out = weights.astype(np.int64) @ rows[nz]
    else:
        out = weights.astype(object) @ rows[nz].astype(object)
    return tuple(out.tolist())


class Cyclotomic:
    """Immutable element of Q(zeta_N) with integer coefficients over a denominator."""

    __slots__ = ("N", "coeffs", "den")

    def __init__(self, N: int, coeffs, den: int = 1):
        if N < 1:
            raise ValueError("conductor must be positive")
        coeffs = tuple(int(c) for c in coeffs)
        d = _degree(N)
        if len(coeffs) != d:
            raise ValueError(f"expected {d} coefficients for conductor {N}, got {len(coeffs)}")
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            coeffs = tuple(-c for c in coeffs)
            den = -den
        if den != 1:
            g = gcd(den, *coeffs)
            if g > 1:
                coeffs = tuple(c // g for c in coeffs)
                den //= g
        self._set(N, coeffs, den)

    def _set(self, N, coeffs, den):
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "den", den)

    @classmethod
    def _trusted(cls, N: int, coeffs: tuple) -> Cyclotomic:
        # integer coefficients straight from _reduce, denominator 1
        obj = cls.__new__(cls)
        obj._set(N, coeffs, 1)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("Cyclotomic is immutable")

    # constructors ----------------------------------------------------------

    @classmethod
    def zero(cls, N: int = 1) -> Cyclotomic:
        return cls._trusted(N, (0,) * _degree(N))

    @classmethod
    def integer(cls, k: int, N: int = 1) -> Cyclotomic:
        return cls.rational(Fraction(k), N)

    @classmethod
    def rational(cls, r, N: int = 1) -> Cyclotomic:
        r = Fraction(r)
        c = [0] * _degree(N)
        c[0] = r.numerator
        return cls(N, c, r.denominator)

    @classmethod
    def root(cls, N: int, k: int = 1) -> Cyclotomic:
        """zeta_N ** k."""
        hist = np.zeros(N, dtype=np.int64)
        hist[k % N] = 1
        return cls._trusted(N, _reduce(N, hist))

    @classmethod
    def from_histogram(cls, N: int, hist) -> Cyclotomic:
        """sum_j hist[j] * zeta_N^j."""
        hist = np.asarray(hist)
        if hist.shape != (N,):
            raise ValueError(f"histogram must have length {N}")
        return cls._trusted(N, _reduce(N, hist))

    @classmethod
    def from_exponents(cls, N: int, exps) -> Cyclotomic:
        """sum over e in exps of zeta_N^e (exponents taken mod N)."""
        exps = np.asarray(exps, dtype=np.int64).ravel() % N
        return cls.from_histogram(N, np.bincount(exps, minlength=N))

    # structure -------------------------------------------------------------

    def __repr__(self) -> str:
        terms = [f"{c}*z^{j}" if j else str(c) for j, c in enumerate(self.coeffs) if c]
        body = " + ".join(terms) or "0"
        if self.den != 1:
            body = f"({body})/{self.den}"
        return f"Cyclotomic(N={self.N}: {body})"

    def to_json(self) -> dict:
        z = self.to_complex()
        return {"N": self.N, "coeffs": list(self.coeffs), "den": self.den,
                "re": z.real, "im": z.imag}

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def _histogram(self, M: int, step: int = 1, sign: int = 1):
        # coefficients placed at exponents sign*step*j mod M
        hist = np.zeros(M, dtype=object)
        for j, c in enumerate(self.coeffs):
            if c:
                hist[(sign * step * j) % M] += c
        return hist

    def promote(self, M: int) -> Cyclotomic:
        """Same value with conductor M (a multiple of N)."""
        if M == self.N:
            return self
        if M % self.N:
            raise ValueError(f"cannot promote conductor {self.N} to {M}")
        if M > MAX_CONDUCTOR:
            raise ConductorOverflow(f"conductor {M} exceeds {MAX_CONDUCTOR}")
        return Cyclotomic(M, _reduce(M, self._histogram(M, M // self.N)), self.den)

    def conj(self) -> Cyclotomic:
        """Complex conjugate (zeta_N -> zeta_N^-1)."""
        return Cyclotomic(self.N, _reduce(self.N, self._histogram(self.N, sign=-1)), self.den)

    def scale(self, r) -> Cyclotomic:
        """Multiply by a rational number, exactly."""
        r = Fraction(r)
        if r == 1:
            return self
        return Cyclotomic(self.N, [c * r.numerator for c in self.coeffs], self.den * r.denominator)

    @staticmethod
    def _common(a: Cyclotomic, b: Cyclotomic) -> tuple[Cyclotomic, Cyclotomic]:
        M = lcm(a.N, b.N)
        return a.promote(M), b.promote(M)

    @staticmethod
    def _coerce(other, N: int):
        if isinstance(other, Cyclotomic):
            return other
        if isinstance(other, (int, Fraction, np.integer)):
            return Cyclotomic.rational(Fraction(int(other)) if isinstance(other, np.integer) else other, N)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other, self.N)
        if other is NotImplemented:
            return other
        a, b = self._common(self, other)
        den = lcm(a.den, b.den)
        fa, fb = den // a.den, den // b.den
        return Cyclotomic(a.N, [x * fa + y * fb for x, y in zip(a.coeffs, b.coeffs)], den)

    __radd__ = __add__

    def __neg__(self) -> Cyclotomic:
        return Cyclotomic(self.N, [-c for c in self.coeffs], self.den)

    def __sub__(self, other):
        other = self._coerce(other, self.N)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, np.integer)):
            return self.scale(Fraction(int(other)) if isinstance(other, np.integer) else other)
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        a, b = self._common(self, other)
        M = a.N
        amax = max(map(abs, a.coeffs), default=0)
        bmax = max(map(abs, b.coeffs), default=0)
        if amax * bmax * len(a.coeffs) < _INT64_SAFE:
            conv = np.convolve(np.array(a.coeffs, dtype=np.int64), np.array(b.coeffs, dtype=np.int64))
        else:
            conv = np.zeros(2 * len(a.coeffs) - 1, dtype=object)
            for i, x in enumerate(a.coeffs):
                if x:
                    conv[i : i + len(b.coeffs)] += np.array([x * y for y in b.coeffs], dtype=object)
        # exponents i + j < 2 phi(M) <= 2M, so one fold suffices
        hist = np.zeros(M, dtype=conv.dtype)
        head = min(M, conv.size)
        hist[:head] += conv[:head]
        hist[: conv.size - head] += conv[head:]
        return Cyclotomic(M, _reduce(M, hist), a.den * b.den)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        other = self._coerce(other, self.N)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._common(self, other)
        return a.den == b.den and a.coeffs == b.coeffs

    # equality crosses conductors, so no hash consistent with it is cheap
    __hash__ = None

    # numerics --------------------------------------------------------------

    def to_complex(self) -> complex:
        j = np.arange(len(self.coeffs))
        w = np.exp(2j * np.pi * j / self.N)
        c = np.array([float(v) for v in self.coeffs])
        return complex(c @ w) / self.den

    def abs_val(self) -> tuple[float, float]:
        """(|v|, additive error bound) under zeta_N -> exp(2 pi i / N)."""
        cmax = max((abs(c) for c in self.coeffs), default=0)
        err = self.N * cmax * 2.0**-50 / self.den
        return abs(self.to_complex()), err


def cyc_ring(op: str, *args):
    """Dispatch ``op`` in {add, mul, neg, conj, scale} on Cyclotomic values.

    ``scale`` takes a value and a rational factor; the binary ops promote to
    the lcm conductor.
    """
    if op == "add":
        return sum(args[1:], args[0])
    if op == "mul":
        out = args[0]
        for v in args[1:]:
            out = out * v
        return out
    if op == "neg":
        (v,) = args
        return -v
    if op == "conj":
        (v,) = args
        return v.conj()
    if op == "scale":
        v, r = args
        return v.scale(r)
    raise ValueError(f"unknown ring operation {op!r}")
