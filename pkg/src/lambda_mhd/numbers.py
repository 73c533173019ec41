"""Scalar backends and small tuple-based vector helpers.

Two backends are supported: exact rationals (``gmpy2.mpq``) and IEEE
doubles.  The helpers here work on plain tuples so they stay fast inside
the laminate constructor, which creates thousands of nodes per tree.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import gmpy2
from gmpy2 import mpq

__all__ = [
    "mpq", "EXACT", "FLOAT", "Backend", "get_backend", "to_exact", "is_exact",
    "dyadic", "dyadic_below", "sqrt_below", "fourth_root_below",
    "vadd", "vsub", "vscale", "vdot", "vcross", "outer", "mat_add",
    "mat_sub", "mat_scale", "mat_vec", "mat_tvec", "transpose", "identity",
]

_MPQ = type(mpq(0))


def to_exact(x):
    """Convert ``x`` to an exact rational.

    Accepts ints, ``Fraction``, ``mpq``, decimal strings, ``"p/q"`` strings
    and floats (converted exactly, bit for bit).
    """
    if isinstance(x, _MPQ):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return mpq(x)
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            return mpq(s)
        return mpq(Fraction(s).numerator, Fraction(s).denominator)
    if isinstance(x, Rational):
        return mpq(int(x.numerator), int(x.denominator))
    if hasattr(x, "item"):  # numpy scalar
        return to_exact(x.item())
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def is_exact(x) -> bool:
    return isinstance(x, (_MPQ, int, Fraction)) and not isinstance(x, bool)


def dyadic(x: float, bits: int = 32):
    """Dyadic rational with ``bits`` significant bits nearest to float ``x``."""
    if x == 0.0:
        return mpq(0)
    m, e = math.frexp(x)
    n = round(m * (1 << bits))
    shift = bits - e
    if shift >= 0:
        return mpq(n, 1 << shift)
    return mpq(n << (-shift), 1)


def dyadic_below(x: float, bits: int = 32):
    """Nonnegative dyadic rational not exceeding ``x`` by more than rounding.

    The result is an approximation from below of the float ``x``; callers
    that need a hard bound must confirm it exactly.
    """
    if x <= 0.0:
        return mpq(0)
    m, e = math.frexp(x)
    n = math.floor(m * (1 << bits))
    shift = bits - e
    if shift >= 0:
        return mpq(n, 1 << shift)
    return mpq(n << (-shift), 1)


def _float(x) -> float:
    """Float value of a rational without overflow for moderate sizes."""
    return float(x)


def sqrt_below(x, bits: int = 32):
    """Rational ``y >= 0`` with ``y*y <= x`` and relative error about ``2**-bits``."""
    x = to_exact(x)
    if x <= 0:
        return mpq(0)
    y = dyadic_below(math.sqrt(_float(x)) * (1.0 - 2.0 ** -(bits - 2)), bits)
    while y * y > x:
        y = y * mpq((1 << bits) - 1, 1 << bits)
    return y


def fourth_root_below(x, bits: int = 32):
    """Rational ``y >= 0`` with ``y**4 <= x``, close to the true fourth root."""
    x = to_exact(x)
    if x <= 0:
        return mpq(0)
    y = dyadic_below(_float(x) ** 0.25 * (1.0 - 2.0 ** -(bits - 2)), bits)
    while (y * y) * (y * y) > x:
        y = y * mpq((1 << bits) - 1, 1 << bits)
    return y


# --------------------------------------------------------------------------
# Backends


class Backend:
    """Scalar policy: conversion, zero tests, comparisons, roots."""

    name = "abstract"
    exact = False

    def num(self, x):
        raise NotImplementedError

    def vec(self, v):
        return tuple(self.num(c) for c in v)

    def is_zero(self, x, scale=1.0) -> bool:
        raise NotImplementedError

    def le(self, a, b, scale=1.0) -> bool:
        raise NotImplementedError

    def sqrt_below(self, x):
        raise NotImplementedError

    def fourth_root_below(self, x):
        raise NotImplementedError

    def approx(self, x: float):
        """Backend number close to the float ``x`` (no bound implied)."""
        raise NotImplementedError


class _ExactBackend(Backend):
    name = "exact"
    exact = True

    def num(self, x):
        return to_exact(x)

    def is_zero(self, x, scale=1.0) -> bool:
        return x == 0

    def le(self, a, b, scale=1.0) -> bool:
        return a <= b

    def sqrt_below(self, x):
        return sqrt_below(x)

    def fourth_root_below(self, x):
        return fourth_root_below(x)

    def approx(self, x: float):
        return dyadic(x)


class _FloatBackend(Backend):
    name = "float"
    exact = False
    rtol = 1e-12

    def num(self, x):
        if isinstance(x, str):
            return float(Fraction(x.strip()))
        return float(x)

    def is_zero(self, x, scale=1.0) -> bool:
        return abs(x) <= self.rtol * scale

    def le(self, a, b, scale=1.0) -> bool:
        return a <= b + self.rtol * scale

    def sqrt_below(self, x):
        return math.sqrt(max(float(x), 0.0))

    def fourth_root_below(self, x):
        return max(float(x), 0.0) ** 0.25

    def approx(self, x: float):
        return float(x)


EXACT = _ExactBackend()
FLOAT = _FloatBackend()


def get_backend(name) -> Backend:
    if isinstance(name, Backend):
        return name
    if name in ("exact", "rational", "mpq"):
        return EXACT
    if name in ("float", "f64", "double"):
        return FLOAT
    raise ValueError(f"unknown backend {name!r}")


# --------------------------------------------------------------------------
# Tuple vector/matrix helpers (n = 2 or 3; matrices flattened row-major)


def vadd(x, y):
    return tuple(a + b for a, b in zip(x, y))


def vsub(x, y):
    return tuple(a - b for a, b in zip(x, y))


def vscale(t, x):
    return tuple(t * a for a in x)


def vdot(x, y):
    s = x[0] * y[0]
    for a, b in zip(x[1:], y[1:]):
        s = s + a * b
    return s


def vcross(x, y):
    return (x[1] * y[2] - x[2] * y[1],
            x[2] * y[0] - x[0] * y[2],
            x[0] * y[1] - x[1] * y[0])


def outer(x, y):
    return tuple(a * b for a in x for b in y)


def mat_add(A, B):
    return tuple(a + b for a, b in zip(A, B))


def mat_sub(A, B):
    return tuple(a - b for a, b in zip(A, B))


def mat_scale(t, A):
    return tuple(t * a for a in A)


def mat_vec(A, x):
    n = len(x)
    return tuple(vdot(A[i * n:(i + 1) * n], x) for i in range(n))


def mat_tvec(A, x):
    n = len(x)
    return tuple(vdot(A[i::n], x) for i in range(n))


def transpose(A):
    n = math.isqrt(len(A))
    return tuple(A[j * n + i] for i in range(n) for j in range(n))


def identity(n, one=1):
    zero = one - one
    return tuple(one if i == j else zero for i in range(n) for j in range(n))


def gmpy_version() -> str:
    return gmpy2.version()
