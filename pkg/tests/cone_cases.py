"""Random exact wave-cone directions for each structural case.

A member is built from its witness: given ``xi`` and ``c``, the matrix
``-c (zp (x) xi + xi (x) zm) / |xi|^2 + P`` with ``P`` supported on
``xi``-perp in both slots satisfies the four conditions whenever
``zp, zm`` are orthogonal to ``xi``.  Non-members perturb one entry.
"""

from __future__ import annotations

import random

from lambda_mhd import ElsasserState, State2D
from lambda_mhd.numbers import mpq, vcross, vdot

CASES_3D = ("cross", "parallel", "zp_zero", "zero")


def _ivec(rng, n=3, lo=-4, hi=4):
    while True:
        v = tuple(mpq(rng.randint(lo, hi)) for _ in range(n))
        if any(v):
            return v


def _outer(x, y):
    return [[a * b for b in y] for a in x]


def _madd(*Ms):
    n = len(Ms[0])
    return [[sum(M[i][j] for M in Ms) for j in range(n)] for i in range(n)]


def _msc(t, M):
    return [[t * v for v in row] for row in M]


def _perp_basis(xi, rng):
    """Two independent integer vectors orthogonal to ``xi``."""
    while True:
        w = _ivec(rng)
        p1 = vcross(xi, w)
        if any(p1):
            return p1, vcross(xi, p1)


def _member_matrix(zp, zm, xi, c, basis, rng):
    n2 = vdot(xi, xi)
    M = _msc(-c / n2, _madd(_outer(zp, xi), _outer(xi, zm)))
    for p in basis:
        for q in basis:
            M = _madd(M, _msc(mpq(rng.randint(-3, 3)), _outer(p, q)))
    return M


def member_3d(case: str, rng: random.Random):
    """``(state, xi, c)`` with the state in Lambda, from the given case."""
    c = mpq(rng.randint(-4, 4))
    if case == "cross":
        while True:
            zp, zm = _ivec(rng), _ivec(rng)
            xi = vcross(zp, zm)
            if any(xi):
                break
        basis = (zp, zm)
    elif case == "parallel":
        zp = _ivec(rng)
        k = mpq(rng.randint(-2, 2), rng.randint(1, 2))
        zm = tuple(k * x for x in zp)
        xi, _ = _perp_basis(zp, rng)
        basis = (zp, vcross(xi, zp))
    elif case == "zp_zero":
        zm = _ivec(rng)
        zp = (mpq(0),) * 3
        xi, _ = _perp_basis(zm, rng)
        basis = (zm, vcross(xi, zm))
    elif case == "zero":
        zp = zm = (mpq(0),) * 3
        xi = _ivec(rng)
        basis = _perp_basis(xi, rng)
    else:
        raise ValueError(case)
    M = _member_matrix(zp, zm, xi, c, basis, rng)
    return ElsasserState.from_values(zp, zm, M, exact=True), xi, c


def member_2d(rng: random.Random, zero: bool = False):
    xi = _ivec(rng, 2)
    v = (-xi[1], xi[0])
    if zero:
        zp = zm = (mpq(0), mpq(0))
    else:
        ka, kb = mpq(rng.randint(-3, 3)), mpq(rng.randint(-3, 3))
        zp = tuple(ka * x for x in v)
        zm = tuple(kb * x for x in v)
    c = mpq(rng.randint(-4, 4))
    M = _member_matrix(zp, zm, xi, c, (v,), rng)
    return State2D.from_values(zp, zm, M, exact=True), xi, c


def perturbed(state, rng: random.Random):
    """The state with one entry of ``M`` shifted by a nonzero integer."""
    M = [list(row) for row in state.M.tolist()]
    n = len(M)
    i, j = rng.randrange(n), rng.randrange(n)
    M[i][j] += rng.choice([-2, -1, 1, 2])
    cls = State2D if n == 2 else ElsasserState
    return cls.from_values(state.zp.tolist(), state.zm.tolist(), M, exact=True)


def to_float(state):
    cls = State2D if state.dim == 2 else ElsasserState
    f = lambda a: [float(x) for x in a.ravel()]
    n = state.dim
    return cls.from_values(f(state.zp), f(state.zm),
                           [f(state.M)[i * n:(i + 1) * n] for i in range(n)], exact=False)
