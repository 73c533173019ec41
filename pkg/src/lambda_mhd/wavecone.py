"""Wave-cone membership: structural case analysis and an SVD oracle.

A direction ``(zp, zm, M)`` lies in the wave cone Lambda when some
``(xi, c)`` with ``xi != 0`` satisfies

    M xi + c zp = 0,   M^T xi + c zm = 0,   zp . xi = 0,   zm . xi = 0.

``Lambda0`` only asks for ``(xi, c) != 0``.  Equivalently ``(xi, c)`` is a
common null vector of the embedding ``V = [[M, zp], [zm^T, 0]]`` and its
transpose.

The structural routines follow the four geometric cases (``zp x zm != 0``,
``zm = k zp``, ``zp = 0``, ``zp = zm = 0``) in adapted bases and work in
exact rational arithmetic when given rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateScale
from .numbers import to_exact, vcross, vdot, vsub, vscale

__all__ = [
    "ConeWitness", "StructuralResult", "LAMBDA", "LAMBDA0",
    "cone_witness_numeric", "cone_membership_structural_3d",
    "cone_membership_2d", "cone_membership", "k_difference_coplanarity",
    "witness_residual", "witness_holds_exact", "rational_completion",
]

LAMBDA = "Lambda"
LAMBDA0 = "Lambda0"

CASE_CROSS = "cross"          # zp x zm != 0
CASE_PARALLEL = "parallel"    # zp != 0, zm = k zp
CASE_ZP_ZERO = "zp_zero"      # zp = 0, zm != 0
CASE_ZERO = "zero"            # zp = zm = 0


@dataclass(frozen=True)
class ConeWitness:
    """Frequencies ``(xi, c)`` certifying a wave-cone direction."""

    xi: tuple
    c: object

    def as_floats(self) -> tuple[np.ndarray, float]:
        return np.array([float(x) for x in self.xi]), float(self.c)


@dataclass(frozen=True)
class StructuralResult:
    member: bool
    witness: Optional[ConeWitness] = None
    case: Optional[str] = None
    reason: str = ""

    def __bool__(self) -> bool:  # convenient in asserts
        return self.member


def _parts(e):
    """(zp, zm, M) as python tuples (M flattened row-major)."""
    zp = tuple(np.asarray(e.zp).tolist())
    zm = tuple(np.asarray(e.zm).tolist())
    M = tuple(np.asarray(e.M).ravel().tolist())
    return zp, zm, M


def _is_exact_tuple(values) -> bool:
    return not any(isinstance(v, float) for v in values)


# --------------------------------------------------------------------------
# Witness checks


def witness_residual(e, xi, c) -> float:
    """Largest absolute violation of the four wave-cone conditions (float)."""
    zp = np.array([float(x) for x in np.asarray(e.zp).ravel()])
    zm = np.array([float(x) for x in np.asarray(e.zm).ravel()])
    M = np.array([float(x) for x in np.asarray(e.M).ravel()]).reshape(len(zp), len(zp))
    xi = np.array([float(x) for x in xi])
    c = float(c)
    res = np.concatenate([M @ xi + c * zp, M.T @ xi + c * zm, [zp @ xi, zm @ xi]])
    return float(np.max(np.abs(res)))


def _witness_ok(zp, zm, M, xi, c) -> bool:
    """Exact check of the four conditions on tuples (``M`` flat)."""
    n = len(zp)
    if all(x == 0 for x in xi):
        return False
    if vdot(zp, xi) != 0 or vdot(zm, xi) != 0:
        return False
    for i in range(n):
        row = M[i * n:(i + 1) * n]
        if vdot(row, xi) + c * zp[i] != 0:
            return False
        col = M[i::n]
        if vdot(col, xi) + c * zm[i] != 0:
            return False
    return True


def witness_holds_exact(e, witness: ConeWitness) -> bool:
    """Exact verification of a witness against an Elsasser direction."""
    zp, zm, M = _parts(e)
    conv = lambda t: tuple(to_exact(x) for x in t)
    return _witness_ok(conv(zp), conv(zm), conv(M), conv(witness.xi), to_exact(witness.c))


# --------------------------------------------------------------------------
# Numeric oracle


def _sign_normalize(v: np.ndarray, tol: float) -> np.ndarray:
    for x in v:
        if abs(x) > tol:
            return v if x > 0 else -v
    return v


def cone_witness_numeric(e, variant: str = LAMBDA, tol: float = 1e-9) -> Optional[ConeWitness]:
    """Joint null space of ``[V; V^T]`` by SVD.

    Returns a unit vector ``(xi, c)`` (with ``xi != 0`` for Lambda), or
    ``None`` when no admissible null vector exists.  Inputs are rescaled to
    unit size first; membership is invariant under scaling.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    zp, zm, M = _parts(e)
    n = len(zp)
    V = np.zeros((n + 1, n + 1))
    V[:n, :n] = np.array([float(x) for x in M]).reshape(n, n)
    V[:n, n] = [float(x) for x in zp]
    V[n, :n] = [float(x) for x in zm]
    scale = np.max(np.abs(V))
    if scale == 0.0:
        xi = tuple(1.0 if i == 0 else 0.0 for i in range(n))
        return ConeWitness(xi, 0.0)
    V = V / scale
    A = np.vstack([V, V.T])
    _, sv, vt = np.linalg.svd(A)
    null = vt[np.nonzero(sv <= tol * sv[0])[0]]
    if null.shape[0] == 0:
        return None
    if variant == LAMBDA0:
        v = _sign_normalize(null[-1], tol)
        return ConeWitness(tuple(v[:n].tolist()), float(v[n]))
    # combination of null vectors with largest spatial part
    P = null[:, :n].T  # n x d
    u, ps, wt = np.linalg.svd(P)
    if ps[0] <= tol:
        return None
    v = wt[0] @ null
    v = v / np.linalg.norm(v)
    v = _sign_normalize(v, tol)
    return ConeWitness(tuple(v[:n].tolist()), float(v[n]))


# --------------------------------------------------------------------------
# Small kernels (exact or float)


def _kernel_2col(rows, exact: bool, tol: float):
    """Nonzero (X, Y) annihilated by every row ``(a, b)``, or None."""
    if exact:
        pivot = next((r for r in rows if r[0] != 0 or r[1] != 0), None)
        if pivot is None:
            return (to_exact(1), to_exact(0))
        cand = (-pivot[1], pivot[0])
        if all(a * cand[0] + b * cand[1] == 0 for a, b in rows):
            return cand
        return None
    # rows come from the unit-scale copy of the state, so ``tol`` is absolute
    A = np.array(rows, dtype=float)
    _, sv, vt = np.linalg.svd(A)
    if sv[-1] <= tol:
        v = vt[-1]
        return (float(v[0]), float(v[1]))
    return None


def _least_aligned_axis(v) -> int:
    mags = [abs(float(x)) for x in v]
    return mags.index(min(mags))


def _perp3(v):
    """A nonzero vector orthogonal to nonzero ``v`` (rational if ``v`` is)."""
    k = _least_aligned_axis(v)
    e = [0, 0, 0]
    e[k] = 1
    if not _is_exact_tuple(v):
        e = [float(x) for x in e]
    else:
        e = [to_exact(x) for x in e]
    return vcross(v, tuple(e))


def _kernel_3col(rows, exact: bool, tol: float):
    """Nonzero xi annihilated by every row of a k x 3 matrix, or None."""
    if exact:
        nz = [r for r in rows if any(x != 0 for x in r)]
        if not nz:
            return tuple(to_exact(x) for x in (1, 0, 0))
        first = nz[0]
        cand = None
        for r in nz[1:]:
            w = vcross(first, r)
            if any(x != 0 for x in w):
                cand = w
                break
        if cand is None:
            cand = _perp3(first)
        if all(vdot(r, cand) == 0 for r in nz):
            return cand
        return None
    # rows come from the unit-scale copy of the state, so ``tol`` is absolute
    A = np.array(rows, dtype=float)
    _, sv, vt = np.linalg.svd(A)
    if sv[-1] <= tol:
        return tuple(float(x) for x in vt[-1])
    return None


def rational_completion(g1):
    """Orthogonal (g2, g3) completing nonzero ``g1`` with rational entries.

    ``g2 = e |g1|^2 - <e, g1> g1`` for the axis ``e`` least aligned with
    ``g1`` (lowest index on ties) and ``g3 = g1 x g2``; the triple is
    right-handed.
    """
    k = _least_aligned_axis(g1)
    n2 = vdot(g1, g1)
    g2 = tuple((n2 if i == k else 0) - g1[k] * g1[i] for i in range(3))
    g3 = vcross(g1, g2)
    return g2, g3


def _coeffs(M, g, n2):
    """``C_ij`` with ``M = sum C_ij g_i (x) g_j`` for an orthogonal basis ``g``."""
    Mg = [tuple(vdot(M[r * 3:(r + 1) * 3], gj) for r in range(3)) for gj in g]
    return [[vdot(g[i], Mg[j]) / (n2[i] * n2[j]) for j in range(3)] for i in range(3)]


def _adapted_basis(v, exact: bool):
    """Orthogonal basis (v, g2, g3); orthonormal in float mode."""
    g2, g3 = rational_completion(v)
    g = (v, g2, g3)
    if exact:
        return g, tuple(vdot(x, x) for x in g)
    g = tuple(vscale(1.0 / vdot(x, x) ** 0.5, x) for x in g)
    return g, (1.0, 1.0, 1.0)


def _finish(witness_xi, c, exact: bool, case: str) -> StructuralResult:
    if not exact:
        nx = float(np.linalg.norm(np.array(witness_xi, dtype=float)))
        witness_xi = tuple(float(x) / nx for x in witness_xi)
        c = float(c) / nx
    return StructuralResult(True, ConeWitness(tuple(witness_xi), c), case)


def cone_membership_structural_3d(e, tol: float = 1e-9) -> StructuralResult:
    """Decide Lambda membership in 3D by the four geometric cases.

    Exact (zero tolerance) for rational inputs; for floats, coefficient
    tests are relative to ``tol`` times the state scale.  Witnesses are the
    ones produced by each case's construction; float witnesses are scaled to
    ``|xi| = 1``.
    """
    zp, zm, M = _parts(e)
    exact = _is_exact_tuple(zp + zm + M)
    if exact:
        zp = tuple(to_exact(x) for x in zp)
        zm = tuple(to_exact(x) for x in zm)
        M = tuple(to_exact(x) for x in M)
        scale = 1.0
        small = lambda x, ref=1.0: x == 0
    else:
        zp = tuple(float(x) for x in zp)
        zm = tuple(float(x) for x in zm)
        M = tuple(float(x) for x in M)
        scale = max(abs(x) for x in zp + zm + M)
        if scale == 0.0:
            return StructuralResult(True, ConeWitness((1.0, 0.0, 0.0), 0.0), CASE_ZERO)
        if scale < 1e-150:
            raise DegenerateScale("state magnitude below float resolution; use the exact backend")
        # work with a unit-scale copy; the four conditions are homogeneous in
        # (zp, zm, M), so witnesses of the copy serve the original
        zp = tuple(x / scale for x in zp)
        zm = tuple(x / scale for x in zm)
        M = tuple(x / scale for x in M)
        small = lambda x, ref=1.0: abs(x) <= tol * ref

    n_p = vdot(zp, zp)
    n_m = vdot(zm, zm)
    w = vcross(zp, zm)
    n_w = vdot(w, w)
    zp_zero = small(n_p) if exact else n_p <= (tol ** 2)
    zm_zero = small(n_m) if exact else n_m <= (tol ** 2)
    cross_zero = (n_w == 0) if exact else n_w <= (tol ** 2) * max(n_p * n_m, tol ** 2)

    if not zp_zero and not zm_zero and not cross_zero:
        # basis (zp, zm, w); inverse rows (zm x w, w x zp, w) / |w|^2
        rows = (vcross(zm, w), vcross(w, zp), w)
        Mcols = [tuple(vdot(M[r * 3:(r + 1) * 3], x) for r in range(3)) for x in rows]
        # C_ij = r_i . M r_j / |w|^4
        C = [[vdot(rows[i], Mcols[j]) / (n_w * n_w) for j in range(3)] for i in range(3)]
        if exact:
            ok = C[0][2] == C[2][1] and C[1][2] == 0 and C[2][0] == 0 and C[2][2] == 0
        else:
            gn = [n_p ** 0.5, n_m ** 0.5, n_w ** 0.5]
            mag = lambda i, j, x: abs(x) * gn[i] * gn[j]
            ok = (mag(0, 2, C[0][2] - C[2][1]) <= tol and mag(1, 2, C[1][2]) <= tol
                  and mag(2, 0, C[2][0]) <= tol and mag(2, 2, C[2][2]) <= tol)
        if not ok:
            return StructuralResult(False, case=CASE_CROSS,
                                    reason="coefficient conditions c13=c32, c23=c31=c33=0 fail")
        c = -C[0][2] * n_w
        return _finish(w, c, exact, CASE_CROSS)

    if not zp_zero:
        # zm = k zp; unknown xi = X g2/|g2|^2 + Y g3/|g3|^2 in zp-perp
        k = vdot(zp, zm) / n_p
        g, n2 = _adapted_basis(zp, exact)
        a1 = vdot(zp, g[0]) / n2[0]
        C = _coeffs(M, g, n2)
        rows = [(C[1][1], C[1][2]), (C[2][1], C[2][2]),
                (C[1][1], C[2][1]), (C[1][2], C[2][2]),
                (C[1][0] - k * C[0][1], C[2][0] - k * C[0][2])]
        sol = _kernel_2col(rows, exact, tol)
        if sol is None:
            return StructuralResult(False, case=CASE_PARALLEL,
                                    reason="no direction in zp-perp satisfies the block conditions")
        X, Y = sol
        xi = vadd3(vscale(X / n2[1], g[1]), vscale(Y / n2[2], g[2]))
        c = -(C[0][1] * X + C[0][2] * Y) / a1
        return _finish(xi, c, exact, CASE_PARALLEL)

    if not zm_zero:
        g, n2 = _adapted_basis(zm, exact)
        b1 = vdot(zm, g[0]) / n2[0]
        C = _coeffs(M, g, n2)
        rows = [(C[0][1], C[0][2]), (C[1][1], C[1][2]), (C[2][1], C[2][2]),
                (C[1][1], C[2][1]), (C[1][2], C[2][2])]
        sol = _kernel_2col(rows, exact, tol)
        if sol is None:
            return StructuralResult(False, case=CASE_ZP_ZERO,
                                    reason="no direction in zm-perp is annihilated by M")
        X, Y = sol
        xi = vadd3(vscale(X / n2[1], g[1]), vscale(Y / n2[2], g[2]))
        c = -(C[1][0] * X + C[2][0] * Y) / b1
        return _finish(xi, c, exact, CASE_ZP_ZERO)

    rows = [M[0:3], M[3:6], M[6:9], M[0::3], M[1::3], M[2::3]]
    xi = _kernel_3col(rows, exact, tol)
    if xi is None:
        return StructuralResult(False, case=CASE_ZERO,
                                reason="M and M^T have no common kernel direction")
    zero = to_exact(0) if exact else 0.0
    return _finish(xi, zero, exact, CASE_ZERO)


def vadd3(x, y):
    return (x[0] + y[0], x[1] + y[1], x[2] + y[2])


def cone_membership_2d(s, tol: float = 1e-9) -> StructuralResult:
    """Decide Lambda membership of a 2D direction ``(alpha, beta, M)``."""
    al, be, M = _parts(s)
    exact = _is_exact_tuple(al + be + M)
    if exact:
        al = tuple(to_exact(x) for x in al)
        be = tuple(to_exact(x) for x in be)
        M = tuple(to_exact(x) for x in M)
        is0 = lambda x: x == 0
    else:
        al = tuple(float(x) for x in al)
        be = tuple(float(x) for x in be)
        M = tuple(float(x) for x in M)
        scale = max(abs(x) for x in al + be + M)
        if scale == 0.0:
            return StructuralResult(True, ConeWitness((1.0, 0.0), 0.0), CASE_ZERO)
        al = tuple(x / scale for x in al)
        be = tuple(x / scale for x in be)
        M = tuple(x / scale for x in M)
        is0 = lambda x: abs(x) <= tol
    perp = lambda v: (-v[1], v[0])
    n_a = vdot(al, al)
    n_b = vdot(be, be)
    det = al[0] * be[1] - al[1] * be[0]
    mv = lambda v: (M[0] * v[0] + M[1] * v[1], M[2] * v[0] + M[3] * v[1])
    mtv = lambda v: (M[0] * v[0] + M[2] * v[1], M[1] * v[0] + M[3] * v[1])
    if not is0(n_a):
        if not is0(det if exact else det / max(n_a, n_b) ** 0.5 / n_a ** 0.5):
            return StructuralResult(False, case=CASE_CROSS, reason="alpha, beta independent: no xi is orthogonal to both")
        k = vdot(al, be) / n_a
        ap = perp(al)
        # coefficients in basis (alpha, alpha_perp), both of norm^2 n_a
        c12 = vdot(al, mv(ap)) / (n_a * n_a)
        c21 = vdot(ap, mv(al)) / (n_a * n_a)
        c22 = vdot(ap, mv(ap)) / (n_a * n_a)
        if exact:
            ok = c22 == 0 and c21 == k * c12
        else:
            ok = abs(c22) * n_a <= tol and abs(c21 - k * c12) * n_a <= tol
        if not ok:
            return StructuralResult(False, case=CASE_PARALLEL, reason="coefficient of alpha_perp (x) alpha_perp or the k-ratio fails")
        c = -c12 * n_a
        return _finish(ap, c, exact, CASE_PARALLEL)
    if not is0(n_b):
        bp = perp(be)
        c12 = vdot(be, mv(bp)) / (n_b * n_b)
        c21 = vdot(bp, mv(be)) / (n_b * n_b)
        c22 = vdot(bp, mv(bp)) / (n_b * n_b)
        ok = (c12 == 0 and c22 == 0) if exact else (abs(c12) * n_b <= tol and abs(c22) * n_b <= tol)
        if not ok:
            return StructuralResult(False, case=CASE_ZP_ZERO, reason="M does not annihilate beta_perp")
        c = -c21 * n_b
        return _finish(bp, c, exact, CASE_ZP_ZERO)
    rows = [M[0:2], M[2:4], M[0::2], M[1::2]]
    sol = _kernel_2col(rows, exact, tol)
    if sol is None:
        return StructuralResult(False, case=CASE_ZERO, reason="M is not a multiple of gamma (x) gamma")
    zero = to_exact(0) if exact else 0.0
    return _finish(sol, zero, exact, CASE_ZERO)


def cone_membership(e, tol: float = 1e-9) -> StructuralResult:
    """Dispatch on dimension."""
    return cone_membership_2d(e, tol) if len(np.asarray(e.zp)) == 2 else \
        cone_membership_structural_3d(e, tol)


def k_difference_coplanarity(alpha: Sequence, beta: Sequence, gamma: Sequence,
                             delta: Sequence, pi1, pi2, tol: float = 0.0) -> bool:
    """Whether ``(alpha, beta, alpha(x)beta + pi1 I) - (gamma, delta, ...)`` is a
    Lambda direction: equal pressures and four coplanar points."""
    pts = [tuple(np.asarray(p).tolist()) for p in (alpha, beta, gamma, delta)]
    vals = [x for p in pts for x in p] + [pi1, pi2]
    exact = tol == 0 and _is_exact_tuple(vals)
    if exact:
        pts = [tuple(to_exact(x) for x in p) for p in pts]
        if to_exact(pi1) != to_exact(pi2):
            return False
    else:
        pts = [tuple(float(x) for x in p) for p in pts]
        scale = max(1.0, max(abs(float(v)) for v in vals))
        if abs(float(pi1) - float(pi2)) > tol * scale:
            return False
    if len(pts[0]) == 2:
        pts = [p + ((to_exact(0) if exact else 0.0),) for p in pts]
    D = [vsub(p, pts[0]) for p in pts[1:]]
    if exact:
        return vdot(D[0], vcross(D[1], D[2])) == 0
    A = np.array(D, dtype=float)
    sv = np.linalg.svd(A, compute_uv=False)
    return bool(sv[-1] <= tol * max(scale, sv[0]))
