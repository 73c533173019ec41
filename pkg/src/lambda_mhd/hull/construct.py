"""Laminate constructions for the hull ladder.

Each ``decompose_*`` function returns a :class:`LaminateTree` whose root
state is the requested one, whose leaves lie in ``K_{r,s}`` and whose
branch differences are wave-cone directions.  The stages build on each
other: whole balls (depth 2), rank-one perturbations (3), five-direction
perturbations (7), the three-term case carrying ``c23 = c32`` (9) and the
general case (12).

On the exact backend all quantities are rationals.  Square roots and
fourth roots appearing in the natural parameter choices are replaced by
rational (dyadic) values satisfying the same product identities and
bounds, so certificates are exact.

Internally vectors are tuples and matrices flattened row-major 9-tuples.
A rank-one term ``t x (x) y`` is stored as ``(t, x, y)``; its Frobenius
norm is ``|t| |x| |y|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from ..errors import ConstraintViolated, PreconditionViolated
from ..numbers import (EXACT, FLOAT, dyadic, fourth_root_below, get_backend, mpq,
                       sqrt_below, to_exact, vcross)
from ..wavecone import cone_membership_structural_3d, rational_completion
from .constants import HullConstants, hull_constants
from .tree import LaminateTree, branch

__all__ = [
    "RationalFrame", "rational_frame", "frame_coefficients", "frame_matrix",
    "decompose_ball", "decompose_rank_one", "decompose_five",
    "decompose_sym23", "decompose_general", "membership_u_rs",
    "InRelativeInterior", "Outside", "TAG_K_PAIR", "TAG_V_W", "TAG_N_SPLIT",
]

# edge tags: which wave-cone case the construction step relies on
TAG_K_PAIR = "k_pair"        # two K-like states with coplanar (zp, zm) points
TAG_V_W = "v_w"              # auxiliary V/W split along zm (zp-difference zero)
TAG_N_SPLIT = "n_split"      # difference (0, 0, N' - N'')


# --------------------------------------------------------------------------
# context


class _Ctx:
    """Per-call constants in backend numbers (hot-path friendly)."""

    __slots__ = ("k", "be", "exact", "r", "s", "r2", "s2", "rs", "tau",
                 "br", "bs", "one", "zero", "half", "rtol")

    def __init__(self, k: HullConstants):
        self.k = k
        self.be = k.backend
        self.exact = k.backend.exact
        self.r, self.s, self.tau = k.r, k.s, k.tau
        self.r2, self.s2, self.rs = k.r * k.r, k.s * k.s, k.r * k.s
        self.br, self.bs = k.br, k.bs
        self.one = mpq(1) if self.exact else 1.0
        self.zero = self.one - self.one
        self.half = self.one / 2
        self.rtol = 0.0 if self.exact else 1e-12

    def swapped(self) -> "_Ctx":
        return _Ctx(self.k.swapped())


def _ctx_for(consts: HullConstants) -> _Ctx:
    return _Ctx(consts)


# Splitting parameters only need the right order of magnitude (bounds are
# confirmed exactly), so short mantissas keep the certificates small.
_PARAM_BITS = 10


def _approx(ctx: _Ctx, x: float):
    return dyadic(x, _PARAM_BITS) if ctx.exact else float(x)


def _sqrtb(ctx: _Ctx, x):
    return sqrt_below(x, _PARAM_BITS) if ctx.exact else math.sqrt(max(float(x), 0.0))


def _fourthb(ctx: _Ctx, x):
    return fourth_root_below(x, _PARAM_BITS) if ctx.exact else max(float(x), 0.0) ** 0.25


# --------------------------------------------------------------------------
# small geometry helpers


def _add(x, y):
    return (x[0] + y[0], x[1] + y[1], x[2] + y[2])


def _sub(x, y):
    return (x[0] - y[0], x[1] - y[1], x[2] - y[2])


def _sc(t, x):
    return (t * x[0], t * x[1], t * x[2])


def _dot(x, y):
    return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]


def _outer(x, y):
    return (x[0] * y[0], x[0] * y[1], x[0] * y[2],
            x[1] * y[0], x[1] * y[1], x[1] * y[2],
            x[2] * y[0], x[2] * y[1], x[2] * y[2])


def _madd(A, B):
    return tuple(a + b for a, b in zip(A, B))


def _msub(A, B):
    return tuple(a - b for a, b in zip(A, B))


def _msc(t, A):
    return tuple(t * a for a in A)


def _kstate_M(zp, zm, pi):
    """``zp (x) zm + pi I`` flattened."""
    M = list(_outer(zp, zm))
    M[0] += pi
    M[4] += pi
    M[8] += pi
    return tuple(M)


def _is_zero_vec(v) -> bool:
    return v[0] == 0 and v[1] == 0 and v[2] == 0


def _fl(x) -> float:
    return float(x)


def _rational_unit(d, ctx: _Ctx):
    """Unit vector near the direction of nonzero ``d`` (rational on exact).

    The exact version is an inverse stereographic image of dyadic
    parameters, hence has norm exactly one.
    """
    f = [_fl(x) for x in d]
    m = max(abs(x) for x in f)
    if m == 0.0 or not math.isfinite(m):
        big = max(abs(x) for x in d)
        f = [_fl(x / big) for x in d]
        m = max(abs(x) for x in f)
    f = [x / m for x in f]
    n = math.sqrt(sum(x * x for x in f))
    u = [x / n for x in f]
    if not ctx.exact:
        return tuple(u)
    k = max(range(3), key=lambda i: abs(u[i]))
    sign = 1 if u[k] > 0 else -1
    den = 1.0 + abs(u[k])
    s = [dyadic(u[i] / den, 26) for i in range(3) if i != k]
    S = s[0] * s[0] + s[1] * s[1]
    D = 1 + S
    out = []
    j = 0
    for i in range(3):
        if i == k:
            out.append(sign * (1 - S) / D)
        else:
            out.append(2 * s[j] / D)
            j += 1
    return tuple(out)


def _sphere_point(v, radius, fallback, ctx: _Ctx):
    """Axis point ``+-radius e_k`` on the sphere, ``k`` the dominant axis of ``v``.

    Any sphere point gives a valid chord through an interior point; axis
    points keep the rationals of the leaves small.  A zero ``v`` uses the
    fallback direction (then ``e1``).  Returns ``(k, +-radius)``.
    """
    d = v
    if _is_zero_vec(d):
        d = fallback if fallback is not None and not _is_zero_vec(fallback) else \
            (ctx.one, ctx.zero, ctx.zero)
    k = max(range(3), key=lambda i: abs(d[i]))
    return k, (radius if d[k] > 0 else -radius)


def _axis_vec(k, a, ctx):
    out = [ctx.zero, ctx.zero, ctx.zero]
    out[k] = a
    return tuple(out)


def _axis_chord(v, k, a, ctx):
    """Second sphere point ``B2`` and weight for the chord from ``a e_k`` through ``v``."""
    e = list(v)
    e[k] = v[k] - a
    t = -2 * a * e[k] / _dot(e, e)
    B2 = [t * x for x in e]
    B2[k] += a
    return tuple(e), tuple(B2), 1 - 1 / t


def _kstate_M_row(k, a, y, pi, ctx):
    """``(a e_k) (x) y + pi I`` flattened."""
    z = ctx.zero
    M = [z] * 9
    M[3 * k], M[3 * k + 1], M[3 * k + 2] = a * y[0], a * y[1], a * y[2]
    M[0] += pi
    M[4] += pi
    M[8] += pi
    return tuple(M)


def _kstate_M_col(x, k, a, pi, ctx):
    """``x (x) (a e_k) + pi I`` flattened."""
    z = ctx.zero
    M = [z] * 9
    M[k], M[3 + k], M[6 + k] = x[0] * a, x[1] * a, x[2] * a
    M[0] += pi
    M[4] += pi
    M[8] += pi
    return tuple(M)


def _perp(v, ctx):
    """``v x e_k`` for the axis ``e_k`` least aligned with ``v`` (no products)."""
    mags = [abs(_fl(x)) for x in v]
    k = mags.index(min(mags))
    z = ctx.zero
    if k == 0:
        return (z, v[2], -v[1])
    if k == 1:
        return (-v[2], z, v[0])
    return (v[1], -v[0], z)


def _chord_witness(e, other, ctx):
    """Witness for a ball chord: ``(t e, 0, t e (x) other)`` or its transpose.

    Any ``xi`` orthogonal to ``e`` works, with ``c = -<other, xi>``.
    """
    xi = _perp(e, ctx)
    if not ctx.exact:
        xi = _sc(1.0 / math.sqrt(_dot(xi, xi)), xi)
    return (xi, -_dot(other, xi))


def _plane_witness(a1, b1, a2, b2, ctx):
    """Witness for ``(a1, b1, a1 (x) b1 + pi I) - (a2, b2, a2 (x) b2 + pi I)``.

    ``xi`` is normal to a plane containing the four points and
    ``c = -<a1, xi>``; see the coplanarity characterization of K-differences.
    """
    d1 = _sub(a2, a1)
    d2 = _sub(b1, a1)
    d3 = _sub(b2, a1)
    if ctx.exact:
        xi = vcross(d1, d2)
        if _is_zero_vec(xi):
            xi = vcross(d1, d3)
            if _is_zero_vec(xi):
                xi = vcross(d2, d3)
                if _is_zero_vec(xi):
                    v = next((d for d in (d1, d2, d3) if not _is_zero_vec(d)), None)
                    xi = _perp(v, ctx) if v is not None else (ctx.one, ctx.zero, ctx.zero)
        xi = _primitive(xi, EXACT)
    else:
        cands = [vcross(d1, d2), vcross(d1, d3), vcross(d2, d3)]
        xi = max(cands, key=lambda w: _dot(w, w))
        nx = math.sqrt(_dot(xi, xi))
        if nx == 0.0:
            v = max((d1, d2, d3), key=lambda w: _dot(w, w))
            xi = _perp(v, ctx) if _dot(v, v) > 0 else (1.0, 0.0, 0.0)
            nx = math.sqrt(_dot(xi, xi))
        xi = _sc(1.0 / nx, xi)
    return (xi, -_dot(a1, xi))


def _normal_witness(u, v, base, ctx):
    """Witness with ``xi = u x v`` (a perpendicular of ``u`` or ``v`` if
    parallel) and ``c = -<base, xi>``; for K-pair differences whose four
    points lie in ``base + span{u, v}``.
    """
    xi = vcross(u, v)
    if _is_zero_vec(xi) if ctx.exact else _dot(xi, xi) == 0.0:
        w = u if not _is_zero_vec(u) else v
        xi = _perp(w, ctx) if not _is_zero_vec(w) else (ctx.one, ctx.zero, ctx.zero)
    if not ctx.exact:
        xi = _sc(1.0 / math.sqrt(_dot(xi, xi)), xi)
    return (xi, -_dot(base, xi))


class _Diff:
    __slots__ = ("zp", "zm", "M")

    def __init__(self, zp, zm, M):
        self.zp, self.zm, self.M = zp, zm, M


def _diff_witness(L: LaminateTree, R: LaminateTree, ctx: _Ctx):
    """Witness for ``L - R`` from the structural case analysis."""
    import numpy as np
    dt = object if ctx.exact else float
    zp = np.array(_sub(L.zp, R.zp), dtype=dt)
    zm = np.array(_sub(L.zm, R.zm), dtype=dt)
    M = np.array(_msub(L.M, R.M), dtype=dt).reshape(3, 3)
    res = cone_membership_structural_3d(_Diff(zp, zm, M))
    if not res.member:
        raise RuntimeError(f"internal error: constructed edge is not a wave-cone direction ({res.reason})")
    return (tuple(res.witness.xi), res.witness.c), res.case


def _node(zp, zm, M, lam, L, R, witness, tag):
    return LaminateTree(zp, zm, M, lam=lam, left=L, right=R, witness=witness, tag=tag)


# --------------------------------------------------------------------------
# precondition helpers


def _norm_within(n2, center, bound, ctx: _Ctx, strict=False) -> bool:
    """``| sqrt(n2) - center | <= bound`` (``<`` when strict), exactly."""
    hi = center + bound
    lo = center - bound
    if ctx.exact:
        ok_hi = n2 < hi * hi if strict else n2 <= hi * hi
        if lo <= 0:
            return ok_hi
        ok_lo = n2 > lo * lo if strict else n2 >= lo * lo
        return ok_hi and ok_lo
    n = math.sqrt(max(_fl(n2), 0.0))
    slack = ctx.rtol * max(1.0, _fl(center))
    return abs(n - _fl(center)) <= _fl(bound) + slack


def _term_norm2(t, x, y):
    return t * t * _dot(x, x) * _dot(y, y)


def _le(a, b, ctx: _Ctx, strict=False) -> bool:
    if ctx.exact:
        return a < b if strict else a <= b
    return _fl(a) <= _fl(b) * (1 + 1e-12) + 1e-300


def _require(cond: bool, message: str, bound: str):
    if not cond:
        raise PreconditionViolated(message, bound)


def _parallel(x, y, ctx) -> bool:
    w = vcross(x, y)
    if ctx.exact:
        return _is_zero_vec(w)
    return _dot(w, w) <= 1e-20 * _dot(x, x) * _dot(y, y)


def _coplanar3(x, y, z, ctx) -> bool:
    det = _dot(x, vcross(y, z))
    if ctx.exact:
        return det == 0
    scale = math.sqrt(_fl(_dot(x, x)) * _fl(_dot(y, y)) * _fl(_dot(z, z)))
    return abs(_fl(det)) <= 1e-10 * scale


# --------------------------------------------------------------------------
# whole balls


def _ball(zp, zm, M, pi, ctx: _Ctx, check=True) -> LaminateTree:
    """Two nested splits: first ``zp`` onto the r-sphere, then ``zm`` onto the s-sphere."""
    np2 = _dot(zp, zp)
    nm2 = _dot(zm, zm)
    if check:
        _require(_le(np2, ctx.r2, ctx), "|alpha| exceeds r", "|alpha| <= r")
        _require(_le(nm2, ctx.s2, ctx), "|beta| exceeds s", "|beta| <= s")
        _require(_le(abs(pi), ctx.rs, ctx), "|Pi| exceeds rs", "|Pi| <= rs")
    if _on_sphere(np2, ctx.r2, ctx):
        return _ball_inner(zp, zm, M, pi, nm2, ctx)
    fallback = _sub(zp, zm)
    k, a = _sphere_point(zp, ctx.r, fallback, ctx)
    A1 = _axis_vec(k, a, ctx)
    e, A2, lam = _axis_chord(zp, k, a, ctx)
    L = _ball_inner(A1, zm, _kstate_M_row(k, a, zm, pi, ctx), pi, nm2, ctx)
    R = _ball_inner(A2, zm, _kstate_M(A2, zm, pi), pi, nm2, ctx)
    return _node(zp, zm, M, lam, L, R, _chord_witness(e, zm, ctx), TAG_K_PAIR)


def _on_sphere(n2, R2, ctx) -> bool:
    if ctx.exact:
        return n2 == R2
    return abs(_fl(n2) - _fl(R2)) <= 1e-13 * max(1.0, _fl(R2))


def _ball_inner(zp, zm, M, pi, nm2, ctx: _Ctx) -> LaminateTree:
    if _on_sphere(nm2, ctx.s2, ctx):
        return LaminateTree(zp, zm, M, pi=pi)
    k, a = _sphere_point(zm, ctx.s, zp, ctx)
    B1 = _axis_vec(k, a, ctx)
    e, B2, lam = _axis_chord(zm, k, a, ctx)
    L = LaminateTree(zp, B1, _kstate_M_col(zp, k, a, pi, ctx), pi=pi)
    R = LaminateTree(zp, B2, _kstate_M(zp, B2, pi), pi=pi)
    return _node(zp, zm, M, lam, L, R, _chord_witness(e, zp, ctx), TAG_K_PAIR)


# --------------------------------------------------------------------------
# splitting a rank-one term between two K-like children


def _pair_split(zp, zm, M, b, x, c, y, ctx):
    """Children ``(zp +- b x, zm +- c y)`` absorbing the term ``(b c) x (x) y``."""
    bx = _sc(b, x)
    cy = _sc(c, y)
    zpL, zpR = _add(zp, bx), _sub(zp, bx)
    zmL, zmR = _add(zm, cy), _sub(zm, cy)
    D = _madd(_outer(bx, zm), _outer(zp, cy))
    # the four points lie in zp + span{x, y, zp - zm}, a plane by coplanarity
    v = y if not _parallel(x, y, ctx) else _sub(zp, zm)
    return (zpL, zmL, _madd(M, D)), (zpR, zmR, _msub(M, D)), \
        _normal_witness(x, v, zp, ctx)


def _balanced_factors(t, x, y, ctx):
    """``b, c`` with ``b c = t`` and ``|b x| ~ |c y| ~ sqrt(|t||x||y|)``."""
    nx = _fl(_dot(x, x))
    ny = _fl(_dot(y, y))
    bf = math.sqrt(abs(_fl(t))) * (ny / nx) ** 0.25
    b = _approx(ctx, bf)
    if b == 0:
        b = _approx(ctx, max(bf, 1e-300))
    return b, t / b


def _rank_one(zp, zm, M, pi, t, x, y, ctx: _Ctx, check=True) -> LaminateTree:
    if t == 0 or _is_zero_vec(x) or _is_zero_vec(y):
        return _ball(zp, zm, M, pi, ctx, check)
    if check:
        k = ctx.k
        _require(_le(abs(pi), ctx.rs, ctx), "|Pi| exceeds rs", "|Pi| <= rs")
        _require(_norm_within(_dot(zp, zp), ctx.tau * ctx.r, k.cprime, ctx),
                 "||alpha| - tau r| exceeds c'", "||alpha| - tau r| <= c'")
        _require(_norm_within(_dot(zm, zm), ctx.tau * ctx.s, k.cprime, ctx),
                 "||beta| - tau s| exceeds c'", "||beta| - tau s| <= c'")
        _require(_le(_term_norm2(t, x, y), k.cprime * k.cprime, ctx),
                 "rank-one coefficient exceeds c'", "|a| <= c'")
        _require(_coplanar3(x, y, _sub(zp, zm), ctx),
                 "term directions and alpha - beta are not coplanar",
                 "alpha - beta in span{x, y}")
    # |c y| just below the largest admissible shift for zm, b = t / c
    c = _sqrtb(ctx, ctx.bs * ctx.bs / _dot(y, y))
    b = t / c
    Ls, Rs, w = _pair_split(zp, zm, M, b, x, c, y, ctx)
    L = _ball(Ls[0], Ls[1], Ls[2], pi, ctx)
    R = _ball(Rs[0], Rs[1], Rs[2], pi, ctx)
    return _node(zp, zm, M, ctx.half, L, R, w, TAG_K_PAIR)


# --------------------------------------------------------------------------
# cascades of rank-one terms (five directions)


def _cascade(zp, zm, M, pi, f1term, syms, ctx: _Ctx) -> LaminateTree:
    """Peel terms off one split at a time; the last one goes to the rank-one step.

    ``f1term`` is ``(t, x, y)`` with ``x`` or ``y`` parallel to ``zp - zm``;
    ``syms`` are ``(t, g)`` for ``t g (x) g`` sorted by increasing size.
    """
    if f1term is None:
        if not syms:
            return _ball(zp, zm, M, pi, ctx)
        if len(syms) == 1:
            t, g = syms[0]
            return _rank_one(zp, zm, M, pi, t, g, g, ctx, check=False)
        (t, x), rest = syms[0], syms[1:]
        y = x
    else:
        if not syms:
            t, x, y = f1term
            return _rank_one(zp, zm, M, pi, t, x, y, ctx, check=False)
        t, x, y = f1term
        rest = syms
    b, c = _balanced_factors(t, x, y, ctx)
    Ls, Rs, w = _pair_split(zp, zm, M, b, x, c, y, ctx)
    L = _cascade(Ls[0], Ls[1], Ls[2], pi, None, rest, ctx)
    R = _cascade(Rs[0], Rs[1], Rs[2], pi, None, rest, ctx)
    return _node(zp, zm, M, ctx.half, L, R, w, TAG_K_PAIR)


def _five(zp, zm, M, pi, f1, syms, left, right, ctx: _Ctx, check=True) -> LaminateTree:
    """``M = zp (x) zm + sum t_i g_i (x) g_i + t4 f1 (x) g4 + t5 g5 (x) f1 + pi I``.

    ``left = (t4, g4)``, ``right = (t5, g5)``; ``f1`` must be parallel to
    ``zp - zm`` (any nonzero vector if they coincide).
    """
    syms = [(t, g) for t, g in syms if t != 0 and not _is_zero_vec(g)]
    if left is not None and (left[0] == 0 or _is_zero_vec(left[1])):
        left = None
    if right is not None and (right[0] == 0 or _is_zero_vec(right[1])):
        right = None
    k = ctx.k
    if check:
        _require(_le(abs(pi), ctx.rs, ctx), "|Pi| exceeds rs", "|Pi| <= rs")
        _require(_norm_within(_dot(zp, zp), ctx.tau * ctx.r, k.cdprime, ctx),
                 "||alpha| - tau r| exceeds c''", "||alpha| - tau r| <= c''")
        _require(_norm_within(_dot(zm, zm), ctx.tau * ctx.s, k.cdprime, ctx),
                 "||beta| - tau s| exceeds c''", "||beta| - tau s| <= c''")
        c2 = k.cdprime * k.cdprime
        for t, g in syms:
            _require(_le(_term_norm2(t, g, g), c2, ctx), "coefficient exceeds c''", "|d_i| <= c''")
        if left is not None or right is not None:
            _require(not _is_zero_vec(f1), "f1 must be nonzero", "f1 != 0")
            _require(_parallel(f1, _sub(zp, zm), ctx), "f1 is not parallel to alpha - beta",
                     "f1 || alpha - beta")
        if left is not None:
            _require(_le(_term_norm2(left[0], f1, left[1]), c2, ctx), "d4 exceeds c''", "|d4| <= c''")
        if right is not None:
            _require(_le(_term_norm2(right[0], right[1], f1), c2, ctx), "d5 exceeds c''", "|d5| <= c''")
    syms.sort(key=lambda tg: abs(_fl(tg[0])) * _fl(_dot(tg[1], tg[1])))
    if left is None and right is None:
        return _cascade(zp, zm, M, pi, None, syms, ctx)
    if right is None:
        return _cascade(zp, zm, M, pi, (left[0], f1, left[1]), syms, ctx)
    if left is None:
        return _cascade(zp, zm, M, pi, (right[0], right[1], f1), syms, ctx)
    # auxiliary split zm -> zm +- d6 f1 with |d6 f1| just below c''/2
    d6 = _sqrtb(ctx, k.cdprime * k.cdprime / (4 * _dot(f1, f1)))
    delta = _sc(d6, f1)
    T4 = _msc(left[0], _outer(f1, left[1]))
    T5 = _msc(right[0], _outer(right[1], f1))
    D = _madd(_outer(zp, delta), _msub(T4, T5))
    V = _cascade(zp, _add(zm, delta), _madd(M, D), pi, (2 * left[0], f1, left[1]), syms, ctx)
    W = _cascade(zp, _sub(zm, delta), _msub(M, D), pi, (2 * right[0], right[1], f1), syms, ctx)
    w, _ = _diff_witness(V, W, ctx)
    return _node(zp, zm, M, ctx.half, V, W, w, TAG_V_W)


# --------------------------------------------------------------------------
# frames


@dataclass(frozen=True)
class RationalFrame:
    """Orthogonal right-handed frame ``g1, g2, g3`` (not normalized).

    ``g1`` is parallel to ``alpha - beta`` whenever they differ.  A matrix
    ``N`` is described by coefficients ``m_ij`` with
    ``N = sum m_ij g_i (x) g_j``; the orthonormal-frame coefficient is
    ``c_ij = m_ij |g_i| |g_j|``.
    """

    g1: tuple
    g2: tuple
    g3: tuple

    @property
    def vectors(self) -> tuple:
        return (self.g1, self.g2, self.g3)

    def norms2(self) -> tuple:
        return tuple(_dot(g, g) for g in self.vectors)

    def unit_frame(self):
        """The normalized float frame (an :class:`~lambda_mhd.algebra.Frame`)."""
        import numpy as np

        from ..algebra import Frame
        fs = [np.array([_fl(x) for x in g]) for g in self.vectors]
        fs = [f / np.linalg.norm(f) for f in fs]
        return Frame(*fs)


def rational_frame(alpha, beta, z=None, backend="exact") -> RationalFrame:
    """Frame adapted to ``alpha - beta`` built with the least-aligned-axis rule.

    If ``alpha == beta`` the third vector is the axial hint ``z`` (when
    nonzero) or ``e1``.
    """
    be = get_backend(backend)
    alpha = be.vec(alpha)
    beta = be.vec(beta)
    d = _sub(alpha, beta)
    if not _is_zero_vec(d):
        g1 = _primitive(d, be)
        g2, g3 = rational_completion(g1)
        return RationalFrame(g1, _primitive(g2, be), _primitive(g3, be))
    one, zero = be.num(1), be.num(0)
    g3 = be.vec(z) if z is not None else (zero, zero, zero)
    if _is_zero_vec(g3):
        g3 = (one, zero, zero)
    g3 = _primitive(g3, be)
    # rational_completion(g3) gives (g1, g3 x g1), so g1 x g2 is along g3
    g1, g2 = rational_completion(g3)
    return RationalFrame(_primitive(g1, be), _primitive(g2, be), g3)


def _primitive(v, be):
    """Positive multiple of ``v`` with small entries.

    Exact: the primitive integer vector; float: the unit vector.
    """
    if not be.exact:
        n = math.sqrt(sum(float(x) ** 2 for x in v))
        return tuple(float(x) / n for x in v)
    L = 1
    for x in v:
        L = L * x.denominator // math.gcd(L, x.denominator)
    ints = [int(x * L) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    return tuple(mpq(x // g) for x in ints)


def frame_coefficients(N, frame: RationalFrame) -> list:
    """``m_ij`` with ``N = sum m_ij g_i (x) g_j`` (``N`` flattened or 3x3)."""
    N = _flat9(N)
    g = frame.vectors
    n2 = frame.norms2()
    Ng = [tuple(_dot(N[r * 3:(r + 1) * 3], gj) for r in range(3)) for gj in g]
    return [[_dot(g[i], Ng[j]) / (n2[i] * n2[j]) for j in range(3)] for i in range(3)]


def frame_matrix(m, frame: RationalFrame) -> tuple:
    """``sum m_ij g_i (x) g_j`` flattened."""
    g = frame.vectors
    out = None
    for i in range(3):
        for j in range(3):
            if m[i][j] != 0:
                T = _msc(m[i][j], _outer(g[i], g[j]))
                out = T if out is None else _madd(out, T)
    if out is None:
        z = g[0][0] - g[0][0]
        out = (z,) * 9
    return out


def _flat9(N):
    try:
        import numpy as np
        arr = np.asarray(N, dtype=object).ravel().tolist()
    except Exception:  # pragma: no cover - defensive
        arr = list(N)
    if len(arr) != 9:
        raise ValueError("expected a 3x3 matrix")
    return tuple(arr)


# --------------------------------------------------------------------------
# three non-vanishing terms (c23 = c32 allowed)


_OFF = ((0, 1), (0, 2), (1, 0), (2, 0))


def _copy_m(m):
    return [list(row) for row in m]


def _m_transpose(m):
    return [[m[j][i] for j in range(3)] for i in range(3)]


def _sym23(zp, zm, M, pi, frame: RationalFrame, m, ctx: _Ctx, check=True) -> LaminateTree:
    g1, g2, g3 = frame.vectors
    n2 = frame.norms2()
    if all(m[i][j] == 0 for i in range(3) for j in range(3)):
        return _ball(zp, zm, M, pi, ctx, check)
    k = ctx.k
    offs = [(i, j) for i, j in _OFF if m[i][j] != 0]
    if check:
        _require(m[1][2] == m[2][1] if ctx.exact else
                 abs(_fl(m[1][2] - m[2][1])) * math.sqrt(_fl(n2[1] * n2[2])) <= 1e-12,
                 "c23 != c32", "c23 = c32")
        _require(len(offs) <= 1, "more than one of c12, c13, c21, c31 is nonzero",
                 "at most one of c12, c13, c21, c31 nonzero")
        ct2 = k.ctprime * k.ctprime
        for i in range(3):
            for j in range(3):
                _require(_le(m[i][j] * m[i][j] * n2[i] * n2[j], ct2, ctx),
                         f"|c{i + 1}{j + 1}| exceeds c'''", "|c_ij| <= c'''")
        _require(_norm_within(_dot(zp, zp), ctx.tau * ctx.r, k.ctprime, ctx),
                 "||alpha| - tau r| exceeds c'''", "||alpha| - tau r| <= c'''")
        _require(_norm_within(_dot(zm, zm), ctx.tau * ctx.s, k.ctprime, ctx),
                 "||beta| - tau s| exceeds c'''", "||beta| - tau s| <= c'''")
        _require(_le(abs(pi) - ctx.tau * ctx.tau * ctx.rs, k.ctprime, ctx),
                 "|Pi| - tau^2 rs exceeds c'''", "|Pi| - tau^2 rs <= c'''")
        _require(_parallel(g1, _sub(zp, zm), ctx), "g1 is not parallel to alpha - beta",
                 "f1 || alpha - beta")
    which = offs[0] if offs else (0, 1)
    if which in ((1, 0), (2, 0)):
        # exchange the roles of zp and zm: (zp, zm, M) -> (zm, zp, M^T)
        Mt = tuple(M[j * 3 + i] for i in range(3) for j in range(3))
        sub = _sym23(zm, zp, Mt, pi, frame, _m_transpose(m), ctx.swapped(), check=False)
        return sub.transposed()
    lam1 = _dot(_sub(zp, zm), g1) / n2[0]
    rho = _fourthb(ctx, k.ctprime)
    ch = _approx(ctx, _fl(rho * rho) / math.sqrt(_fl(n2[1])))
    dh = _approx(ctx, _fl(rho) / math.sqrt(_fl(n2[2])))
    p = m[1][2] / (2 * ch * dh)
    if which == (0, 1):
        qh = 2 * m[0][1] / ch
        second = (-ch / 2, -2 * dh)
    else:
        qh = -2 * m[0][2] / dh
        second = (-2 * ch, -dh / 2)
    first = _sym23_half(zp, zm, pi, frame, m, lam1, p, qh, ch, dh, ctx)
    if qh == 0:
        return first
    other = _sym23_half(zp, zm, pi, frame, m, lam1, p, qh, second[0], second[1], ctx)
    w, _ = _diff_witness(first, other, ctx)
    two_thirds = 2 * ctx.one / 3
    return _node(zp, zm, M, two_thirds, first, other, w, TAG_N_SPLIT)


def _sym23_vw(zp, zm, pi, frame, m, lam1, p, qh, ch, dh, ctx):
    """One of the two states V (or W with negated ``ch, dh, qh``) and its five-term data."""
    g1, g2, g3 = frame.vectors
    zpv = _add(zp, _sc(ch, g2))
    zmv = _add(zm, _sc(dh, g3))
    D = _sub(zpv, zmv)  # = lam1 g1 + ch g2 - dh g3
    s1 = m[0][0] - qh * lam1 - 2 * p * lam1 * lam1
    s2 = m[1][1] + ch * ch * p
    s3 = m[2][2] + (3 * p - 1) * dh * dh
    w = _add(_add(_sc(p * lam1, g1), _sc(-ch * p, g2)), _sc(dh * (2 * p - 1), g3))
    g5 = _add(_sc(p * lam1 + qh, g1), _sc(dh * p, g3))
    N = _madd(_madd(_msc(s1, _outer(g1, g1)), _msc(s2, _outer(g2, g2))), _msc(s3, _outer(g3, g3)))
    N = _madd(N, _madd(_outer(D, w), _outer(g5, D)))
    M = _madd(_kstate_M(zpv, zmv, pi), N)
    return zpv, zmv, M, D, [(s1, g1), (s2, g2), (s3, g3)], (ctx.one, w), (ctx.one, g5)


def _sym23_half(zp, zm, pi, frame, m, lam1, p, qh, ch, dh, ctx) -> LaminateTree:
    V = _sym23_vw(zp, zm, pi, frame, m, lam1, p, qh, ch, dh, ctx)
    W = _sym23_vw(zp, zm, pi, frame, m, lam1, p, -qh, -ch, -dh, ctx)
    Vn = _five(V[0], V[1], V[2], pi, V[3], V[4], V[5], V[6], ctx, check=True)
    Wn = _five(W[0], W[1], W[2], pi, W[3], W[4], W[5], W[6], ctx, check=True)
    w, _ = _diff_witness(Vn, Wn, ctx)
    return branch(ctx.half, Vn, Wn, witness=w, tag=TAG_V_W)


# --------------------------------------------------------------------------
# general case


def _m_plus(base, extra):
    m = _copy_m(base)
    for (i, j), v in extra.items():
        m[i][j] = m[i][j] + v
    return m


def _same_m(a, b) -> bool:
    return all(a[i][j] == b[i][j] for i in range(3) for j in range(3))


def _general(zp, zm, M, pi, frame: RationalFrame, m, ctx: _Ctx, check=True) -> LaminateTree:
    k = ctx.k
    n2 = frame.norms2()
    if check:
        _require(m[1][2] == m[2][1] if ctx.exact else
                 abs(_fl(m[1][2] - m[2][1])) * math.sqrt(_fl(n2[1] * n2[2])) <= 1e-12,
                 "c23 != c32", "c23 = c32")
        frob2 = sum(m[i][j] * m[i][j] * n2[i] * n2[j] for i in range(3) for j in range(3))
        _require(_le(frob2, k.c * k.c, ctx, strict=True), "|N| is not below c", "|N| < c")
        _require(_norm_within(_dot(zp, zp), ctx.tau * ctx.r, k.c, ctx, strict=True),
                 "||alpha| - tau r| is not below c", "||alpha| - tau r| < c")
        _require(_norm_within(_dot(zm, zm), ctx.tau * ctx.s, k.c, ctx, strict=True),
                 "||beta| - tau s| is not below c", "||beta| - tau s| < c")
        _require(_le(abs(pi) - ctx.tau * ctx.tau * ctx.rs, k.c, ctx, strict=True),
                 "|Pi| - tau^2 rs is not below c", "|Pi| - tau^2 rs < c")
        _require(_parallel(frame.g1, _sub(zp, zm), ctx), "g1 is not parallel to alpha - beta",
                 "f1 || alpha - beta")
    if all(m[i][j] == 0 for i in range(3) for j in range(3)):
        return _ball(zp, zm, M, pi, ctx, check=False)
    c12, c13, c21, c31 = (m[i][j] for i, j in _OFF)
    Np = _copy_m(m)
    for i, j in _OFF:
        Np[i][j] = ctx.zero
    if c12 == 0 and c13 == 0 and c21 == 0 and c31 == 0:
        return _sym23(zp, zm, M, pi, frame, Np, ctx, check=False)

    def sym(zm_, m_):
        Mx = _madd(_kstate_M(zp, zm_, pi), frame_matrix(m_, frame))
        return _sym23(zp, zm_, Mx, pi, frame, m_, ctx, check=True)

    def mix(lam, left, right):
        """Convex combination of two prepared subtrees (skipped if equal)."""
        if left.zm == right.zm and left.M == right.M:
            return left
        w, _ = _diff_witness(left, right, ctx)
        tag = TAG_V_W if left.zm != right.zm else TAG_N_SPLIT
        return branch(lam, left, right, witness=w, tag=tag)

    # |delta| just below c'''/2, delta parallel to g1
    d = _sqrtb(ctx, k.ctprime * k.ctprime / (4 * n2[0]))
    delta = _sc(d, frame.g1)

    def vw(big, small):
        """(zp, zm, N' + big/2 + small/2) via zm +- delta; both dicts have one key."""
        if all(v == 0 for v in big.values()) or all(v == 0 for v in small.values()):
            both = {key: v / 2 for key, v in big.items()}
            for key, v in small.items():
                both[key] = both.get(key, 0) + v / 2
            return sym(zm, _m_plus(Np, both))
        V = sym(_add(zm, delta), _m_plus(Np, big))
        W = sym(_sub(zm, delta), _m_plus(Np, small))
        return mix(ctx.half, V, W)

    def pair(a, b):
        """(zp, zm, N' + a/2 + b/2) as an average along (0, 0, a - b)."""
        if all(v == 0 for v in a.values()) or all(v == 0 for v in b.values()):
            both = {key: v / 2 for key, v in a.items()}
            for key, v in b.items():
                both[key] = both.get(key, 0) + v / 2
            return sym(zm, _m_plus(Np, both))
        return mix(ctx.half, sym(zm, _m_plus(Np, a)), sym(zm, _m_plus(Np, b)))

    # A = N' + 2c12 f1f2 + c21 f2f1 + c31 f3f1 = (A1 + A2)/2
    A1 = vw({(0, 1): 8 * c12}, {(2, 0): 2 * c31})      # N' + 4c12 f1f2 + c31 f3f1
    A2 = pair({(1, 0): 4 * c21}, {(2, 0): 2 * c31})    # N' + 2c21 f2f1 + c31 f3f1
    A = mix(ctx.half, A1, A2)
    # B = N' + 2c13 f1f3 + c21 f2f1 + c31 f3f1 = (B1 + B2)/2
    B1 = vw({(0, 2): 8 * c13}, {(1, 0): 2 * c21})      # N' + 4c13 f1f3 + c21 f2f1
    B2 = pair({(1, 0): 2 * c21}, {(2, 0): 4 * c31})    # N' + c21 f2f1 + 2c31 f3f1
    B = mix(ctx.half, B1, B2)
    return mix(ctx.half, A, B)


# --------------------------------------------------------------------------
# public API


def _consts_and_ctx(consts) -> _Ctx:
    if not isinstance(consts, HullConstants):
        raise TypeError("consts must be a HullConstants instance")
    return _Ctx(consts)


def _check_root(tree: LaminateTree, zp, zm, M):
    if tree.zp != zp or tree.zm != zm or tree.M != M:
        raise RuntimeError("internal error: laminate root does not reproduce the input state")
    return tree


def decompose_ball(alpha, beta, Pi, r, s, backend="exact") -> LaminateTree:
    """Laminate of depth at most 2 for ``(alpha, beta, alpha (x) beta + Pi I)``.

    Requires ``|alpha| <= r``, ``|beta| <= s`` and ``|Pi| <= rs``.  A zero
    ``alpha`` (``beta``) is pushed along ``alpha - beta`` (resp. the current
    ``alpha``), falling back to ``e1``.
    """
    be = get_backend(backend)
    ctx = _Ctx(hull_constants(0, r, s, be))
    zp, zm, pi = be.vec(alpha), be.vec(beta), be.num(Pi)
    M = _kstate_M(zp, zm, pi)
    return _check_root(_ball(zp, zm, M, pi, ctx), zp, zm, M)


_MODES = ("e(x)e", "f1(x)e", "e(x)f1")


def _mode_name(mode: str) -> str:
    key = mode.replace("⊗", "(x)").replace(" ", "").replace("*", "(x)")
    aliases = {"ee": "e(x)e", "f1e": "f1(x)e", "ef1": "e(x)f1"}
    key = aliases.get(key, key)
    if key not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    return key


def _default_f1(zp, zm, be):
    d = _sub(zp, zm)
    if not _is_zero_vec(d):
        return d
    return (be.num(1), be.num(0), be.num(0))


def decompose_rank_one(alpha, beta, Pi, a_coef, mode, e, consts: HullConstants,
                       f1=None) -> LaminateTree:
    """Laminate of depth at most 3 for ``M = alpha (x) beta + a T + Pi I``.

    ``T`` is ``e (x) e``, ``f1 (x) e`` or ``e (x) f1`` according to ``mode``.
    ``e`` and ``f1`` need not be normalized; the bound applies to the
    Frobenius norm ``|a| |x| |y|`` of the term.  ``f1`` defaults to
    ``alpha - beta`` (``e1`` if they coincide).
    """
    ctx = _consts_and_ctx(consts)
    be = ctx.be
    zp, zm, pi, t = be.vec(alpha), be.vec(beta), be.num(Pi), be.num(a_coef)
    ev = be.vec(e)
    f = be.vec(f1) if f1 is not None else _default_f1(zp, zm, be)
    mode = _mode_name(mode)
    x, y = {"e(x)e": (ev, ev), "f1(x)e": (f, ev), "e(x)f1": (ev, f)}[mode]
    M = _madd(_kstate_M(zp, zm, pi), _msc(t, _outer(x, y)))
    if t == 0:
        k = ctx.k
        _require(_norm_within(_dot(zp, zp), ctx.tau * ctx.r, k.cprime, ctx),
                 "||alpha| - tau r| exceeds c'", "||alpha| - tau r| <= c'")
        _require(_norm_within(_dot(zm, zm), ctx.tau * ctx.s, k.cprime, ctx),
                 "||beta| - tau s| exceeds c'", "||beta| - tau s| <= c'")
    tree = _rank_one(zp, zm, M, pi, t, x, y, ctx, check=True)
    return _check_root(tree, zp, zm, M)


def decompose_five(alpha, beta, Pi, d: Sequence, g: Sequence, consts: HullConstants,
                   f1=None) -> LaminateTree:
    """Laminate of depth at most 7 for
    ``M = alpha (x) beta + sum_{i<=3} d_i g_i (x) g_i + d4 f1 (x) g4 + d5 g5 (x) f1 + Pi I``.

    Vectors need not be normalized (bounds apply to each term's norm).
    """
    ctx = _consts_and_ctx(consts)
    be = ctx.be
    zp, zm, pi = be.vec(alpha), be.vec(beta), be.num(Pi)
    d = [be.num(x) for x in d]
    g = [be.vec(x) for x in g]
    if len(d) != 5 or len(g) != 5:
        raise ValueError("need five coefficients and five vectors")
    f = be.vec(f1) if f1 is not None else _default_f1(zp, zm, be)
    M = _kstate_M(zp, zm, pi)
    for i in range(3):
        M = _madd(M, _msc(d[i], _outer(g[i], g[i])))
    M = _madd(M, _msc(d[3], _outer(f, g[3])))
    M = _madd(M, _msc(d[4], _outer(g[4], f)))
    tree = _five(zp, zm, M, pi, f, [(d[i], g[i]) for i in range(3)], (d[3], g[3]),
                 (d[4], g[4]), ctx, check=True)
    return _check_root(tree, zp, zm, M)


def _frame_for(zp, zm, frame, be, N=None) -> RationalFrame:
    if frame is not None:
        if isinstance(frame, RationalFrame):
            return RationalFrame(be.vec(frame.g1), be.vec(frame.g2), be.vec(frame.g3))
        vs = [be.vec(v) for v in frame]
        return RationalFrame(*vs)
    z = None
    if N is not None and _is_zero_vec(_sub(zp, zm)):
        z = (N[5] - N[7], N[6] - N[2], N[1] - N[3])  # axial vector of N - N^T (times 2)
    return rational_frame(zp, zm, z, be)


def decompose_sym23(alpha, beta, Pi, coeffs, consts: HullConstants, frame=None) -> LaminateTree:
    """Laminate of depth at most 9 when ``c23 = c32`` and at most one of
    ``c12, c13, c21, c31`` is nonzero.

    ``coeffs[i][j]`` are coefficients with respect to ``frame`` (a
    :class:`RationalFrame` or three orthogonal vectors; default: the
    adapted frame of ``alpha - beta``) in the sense
    ``N = sum coeffs_ij g_i (x) g_j``.  Float inputs go through
    :func:`_via_exact`.
    """
    ctx = _consts_and_ctx(consts)
    if not ctx.exact:
        return _via_exact(alpha, beta, Pi, coeffs, consts, frame, _sym23)
    be = ctx.be
    zp, zm, pi = be.vec(alpha), be.vec(beta), be.num(Pi)
    fr = _frame_for(zp, zm, frame, be)
    m = [[be.num(coeffs[i][j]) for j in range(3)] for i in range(3)]
    M = _madd(_kstate_M(zp, zm, pi), frame_matrix(m, fr))
    tree = _sym23(zp, zm, M, pi, fr, m, ctx, check=True)
    return _check_root(tree, zp, zm, M)


def decompose_general(alpha, beta, Pi, coeffs, consts: HullConstants, frame=None) -> LaminateTree:
    """Laminate of depth at most 12 for a state close to ``K_{r,s}``.

    ``coeffs`` as in :func:`decompose_sym23`; requires ``c23 = c32`` and all
    smallness bounds strictly below ``consts.c``.
    """
    ctx = _consts_and_ctx(consts)
    if not ctx.exact:
        return _via_exact(alpha, beta, Pi, coeffs, consts, frame, _general)
    be = ctx.be
    zp, zm, pi = be.vec(alpha), be.vec(beta), be.num(Pi)
    fr = _frame_for(zp, zm, frame, be)
    m = [[be.num(coeffs[i][j]) for j in range(3)] for i in range(3)]
    M = _madd(_kstate_M(zp, zm, pi), frame_matrix(m, fr))
    tree = _general(zp, zm, M, pi, fr, m, ctx, check=True)
    return _check_root(tree, zp, zm, M)


def _round_tree(tree: LaminateTree) -> LaminateTree:
    """Copy of an exact tree with every number rounded to float."""
    f = lambda v: tuple(float(x) for x in v)

    def rnd(node):
        if node.left is None:
            return LaminateTree(f(node.zp), f(node.zm), f(node.M),
                                pi=None if node.pi is None else float(node.pi))
        w = node.witness
        if w is not None:
            w = (f(w[0]), float(w[1]))
        return LaminateTree(f(node.zp), f(node.zm), f(node.M), lam=float(node.lam),
                            left=rnd(node.left), right=rnd(node.right), witness=w,
                            tag=node.tag)

    return rnd(tree)


def _via_exact(alpha, beta, Pi, coeffs, consts: HullConstants, frame, stage) -> LaminateTree:
    """Float inputs to the sym23 and general stages.

    The splitting amounts of these stages are tiny powers of the hull
    constant, so the intermediate states are many orders of magnitude
    larger than the differences along the tree edges, and those
    differences lose all precision in floating point.  The laminate is
    therefore built in rationals from the exact binary values of the inputs
    and rounded at the end.  Coefficients travel through the orthonormal
    frame, which keeps zero patterns and ``c23 = c32`` intact; ``frame``
    must be the adapted one (the default).
    """
    fb = consts.backend
    zp, zm, pi = fb.vec(alpha), fb.vec(beta), fb.num(Pi)
    ffr = _frame_for(zp, zm, frame, fb)
    ke = hull_constants(to_exact(float(consts.tau)), to_exact(float(consts.r)),
                        to_exact(float(consts.s)), EXACT)
    zpe = tuple(to_exact(x) for x in zp)
    zme = tuple(to_exact(x) for x in zm)
    pie = to_exact(pi)
    fre = rational_frame(zpe, zme, None, EXACT)
    fn = [math.sqrt(sum(x * x for x in g)) for g in ffr.vectors]
    en = [math.sqrt(_fl(n)) for n in fre.norms2()]
    for g, n, h, hn in zip(ffr.vectors, fn, fre.vectors, en):
        if max(abs(x / n - _fl(y) / hn) for x, y in zip(g, h)) > 1e-9:
            raise ValueError("float inputs to this stage need the adapted frame")
    c = [[float(coeffs[i][j]) * fn[i] * fn[j] for j in range(3)] for i in range(3)]
    if abs(c[1][2] - c[2][1]) <= 1e-12:
        c[1][2] = c[2][1] = 0.5 * (c[1][2] + c[2][1])
    me = [[to_exact(c[i][j] / (en[i] * en[j])) for j in range(3)] for i in range(3)]
    Me = _madd(_kstate_M(zpe, zme, pie), frame_matrix(me, fre))
    tree = stage(zpe, zme, Me, pie, fre, me, _Ctx(ke), check=True)
    return _round_tree(_check_root(tree, zpe, zme, Me))


@dataclass(frozen=True)
class InRelativeInterior:
    tree: LaminateTree
    pi: object
    frame: RationalFrame

    member = True


@dataclass(frozen=True)
class Outside:
    reason: str

    member = False


def membership_u_rs(state, r, s, tol=0.0, backend=None, tau=0):
    """Certify that a pointwise state lies in the relative interior of the hull.

    Steps: check ``a . b = 0``; pass to Elsasser form; take ``Pi`` as the
    diagonal mean of ``M - alpha (x) beta``; build the adapted frame (using
    the axial vector of ``N - N^T`` when ``alpha = beta``); check the
    smallness bounds (at ``tau``, default 0); build the general laminate.

    Raises :class:`ConstraintViolated` when ``|a . b| > tol * scale``.
    """
    import numpy as np

    from ..algebra import state_scale, to_elsasser
    exact = state.exact if backend is None else get_backend(backend).exact
    be = EXACT if exact else FLOAT
    ab = np.dot(state.a, state.b)
    scale = state_scale(state.u, state.b, state.S, state.a)
    if exact:
        if be.num(ab) != 0 and abs(float(ab)) > tol * scale:
            raise ConstraintViolated(f"a.b = {float(ab):.3e} is nonzero")
    elif abs(float(ab)) > max(tol, 1e-14) * scale:
        raise ConstraintViolated(f"a.b = {float(ab):.3e} is nonzero")
    if not exact:
        return _membership_via_exact(state, r, s, tau)
    e = to_elsasser(state)
    zp = be.vec(e.zp.tolist())
    zm = be.vec(e.zm.tolist())
    M = be.vec(e.M.ravel().tolist())
    pi = (M[0] + M[4] + M[8] - _dot(zp, zm)) / 3
    N = _msub(M, _kstate_M(zp, zm, pi))
    fr = _frame_for(zp, zm, None, be, N)
    m = frame_coefficients(N, fr)
    consts = hull_constants(tau, r, s, be)
    ctx = _Ctx(consts)
    try:
        tree = _general(zp, zm, M, pi, fr, m, ctx, check=True)
    except PreconditionViolated as err:
        return Outside(f"{err} ({err.bound})")
    _check_root(tree, zp, zm, M)
    return InRelativeInterior(tree, pi, fr)


def _membership_via_exact(state, r, s, tau):
    """Float states: exact binary values, ``a`` projected exactly onto the
    plane orthogonal to ``b`` (its float defect already passed), exact
    certificate rounded to floats (see :func:`_via_exact`)."""
    import numpy as np

    from ..algebra import State3D
    conv = lambda v: [to_exact(float(x)) for x in np.asarray(v).ravel()]
    u, b, a = conv(state.u), conv(state.b), conv(state.a)
    iu, ju = np.triu_indices(3)
    S = conv(np.asarray(state.S, dtype=float)[iu, ju])
    bb = sum(x * x for x in b)
    if bb != 0:
        ab = sum(x * y for x, y in zip(a, b))
        a = [x - ab / bb * y for x, y in zip(a, b)]
    ex = State3D.from_values(u, b, S, a, exact=True)
    f = lambda x: to_exact(float(x))
    res = membership_u_rs(ex, f(r), f(s), backend="exact", tau=f(tau))
    if not res.member:
        return res
    fr = RationalFrame(*(tuple(float(x) for x in g) for g in res.frame.vectors))
    return InRelativeInterior(_round_tree(res.tree), float(res.pi), fr)
