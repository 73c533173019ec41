"""Independent verification of laminate certificates."""

from __future__ import annotations

import math
from gmpy2 import gcd as _gcd
from gmpy2 import lcm as _lcm
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..algebra import ElsasserState, State2D
from ..numbers import _MPQ, to_exact
from ..wavecone import (LAMBDA, _witness_ok, cone_membership_2d,
                        cone_membership_structural_3d, cone_witness_numeric,
                        witness_residual)
from .tree import LaminateTree

__all__ = ["Report", "verify_laminate"]


@dataclass
class Report:
    """Largest defects found in a laminate tree.

    Defects are absolute.  A tree is accepted when each defect is at most
    ``tol * scale`` where ``scale = max(1, |root|_inf)``; on the exact
    backend ``tol = 0`` and a sound certificate reports exact zeros.
    Locations are paths from the root (``L``/``R``), ``""`` for the root.
    ``leaf_sum`` is the weighted sum of the leaves (flattened
    ``zp, zm, M``) when an exact tree passes every check.
    """

    max_leaf_defect: float
    max_edge_defect: float
    max_convexity_defect: float
    depth: int
    n_nodes: int = 0
    n_leaves: int = 0
    exact: bool = True
    tol: float = 0.0
    scale: float = 1.0
    worst_leaf: Optional[str] = None
    worst_edge: Optional[str] = None
    worst_convexity: Optional[str] = None
    edge_cases: Counter = field(default_factory=Counter)
    leaf_sum: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        lim = self.tol * self.scale
        return (self.max_leaf_defect <= lim and self.max_edge_defect <= lim
                and self.max_convexity_defect <= lim)

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "max_leaf_defect": self.max_leaf_defect,
            "max_edge_defect": self.max_edge_defect,
            "max_convexity_defect": self.max_convexity_defect,
            "depth": self.depth,
            "nodes": self.n_nodes,
            "leaves": self.n_leaves,
            "backend": "exact" if self.exact else "float",
            "tol": self.tol,
            "scale": self.scale,
            "worst_leaf": self.worst_leaf,
            "worst_edge": self.worst_edge,
            "worst_convexity": self.worst_convexity,
            "edge_cases": dict(sorted(self.edge_cases.items())),
        }


def _tree_is_exact(tree: LaminateTree) -> bool:
    return not any(isinstance(x, float) for x in tree.M + tree.zp + tree.zm)


def _maxabs(values) -> float:
    return max((abs(float(v)) for v in values), default=0.0)


def _state_of(zp, zm, M, exact):
    n = len(zp)
    dt = object if exact else float
    a = np.array(zp, dtype=dt)
    b = np.array(zm, dtype=dt)
    m = np.array(M, dtype=dt).reshape(n, n)
    return State2D(a, b, m) if n == 2 else ElsasserState(a, b, m)


def _edge_defect(diff, n: int, witness, exact: bool, tol: float, scale: float):
    """(defect, case) for the direction ``diff = left - right`` (flat zp, zm, M)."""
    zp, zm, M = diff[:n], diff[n:2 * n], diff[2 * n:]
    if witness is not None:
        xi, c = witness
        if exact:
            if _witness_ok(zp, zm, M, tuple(to_exact(x) for x in xi), to_exact(c)):
                return 0.0, "witness"
        else:
            nx = math.sqrt(sum(float(x) ** 2 for x in xi))
            if nx > 0:
                res = witness_residual(_state_of(zp, zm, M, exact), [float(x) / nx for x in xi], float(c) / nx)
                if res <= tol * scale:
                    return res, "witness"
    D = _state_of(zp, zm, M, exact)
    res = cone_membership_2d(D) if len(zp) == 2 else _structural_3d(D)
    if res is not None and res.member:
        if exact:
            return 0.0, res.case
        r = witness_residual(D, res.witness.xi, res.witness.c)
        if r <= tol * scale:
            return r, res.case
    # numeric fallback: residual of the best SVD witness (or the full size)
    w = cone_witness_numeric(D, LAMBDA, tol=1e-9)
    size = max(_maxabs(zp), _maxabs(zm), _maxabs(M))
    if w is None:
        return max(size, math.ulp(0.0)), "not_in_cone"
    r = witness_residual(D, w.xi, w.c)
    if exact:
        # the exact structural test failed: never report a clean zero
        return max(r, math.ulp(0.0)), "numeric"
    return r, "numeric"


def _structural_3d(D):
    try:
        return cone_membership_structural_3d(D)
    except Exception:  # degenerate scale on the float path: defer to numeric
        return None


def _leaf_defect(node: LaminateTree, r, s, exact: bool) -> float:
    zp, zm, M = node.zp, node.zm, node.M
    n = len(zp)
    R = [M[i * n + j] - zp[i] * zm[j] for i in range(n) for j in range(n)]
    pi = sum(R[i * n + i] for i in range(n)) / n
    off = [R[i * n + j] - (pi if i == j else 0) for i in range(n) for j in range(n)]
    if exact and all(x == 0 for x in off):
        k_def = 0.0
    else:
        k_def = _maxabs(off)
    if node.pi is not None and node.pi != pi:
        k_def = max(k_def, abs(float(node.pi) - float(pi)), math.ulp(0.0))
    if r is None or s is None:
        return k_def
    np2 = sum(x * x for x in zp)
    nm2 = sum(x * x for x in zm)
    if exact:
        dr = 0.0 if np2 == r * r else abs(math.sqrt(float(np2)) - float(r))
        ds = 0.0 if nm2 == s * s else abs(math.sqrt(float(nm2)) - float(s))
        dpi = 0.0 if abs(pi) <= r * s else float(abs(pi) - r * s)
    else:
        dr = abs(math.sqrt(float(np2)) - float(r))
        ds = abs(math.sqrt(float(nm2)) - float(s))
        dpi = max(0.0, abs(float(pi)) - float(r) * float(s))
    return max(k_def, dr, ds, dpi)


# --------------------------------------------------------------------------
# exact fast path: every node is put over a common denominator and all
# identities are checked by cross-multiplied integer arithmetic


def _intvec(vals):
    """``(Z, d)`` with integers ``Z`` and ``d > 0`` such that ``vals = Z / d``."""
    dens = [v.denominator for v in vals]
    distinct = set(dens)
    if len(distinct) == 1:
        return [v.numerator for v in vals], dens[0]
    d = 1
    for den in distinct:
        d = _lcm(d, den)
    mult = {den: d // den for den in distinct}
    return [v.numerator * mult[den] for v, den in zip(vals, dens)], d


def _node_int(node: LaminateTree):
    vals = node.zp + node.zm + node.M
    if type(vals[0]) is not _MPQ or not all(type(v) is _MPQ for v in vals):
        vals = tuple(map(to_exact, vals))
    return _intvec(vals)


def _combine(lam, L, R):
    """Reduced ``(Z, d)`` of ``lam left + (1 - lam) right``, or None if ``lam``
    lies outside ``[0, 1]``."""
    p, q = lam.numerator, lam.denominator
    if p < 0 or p > q:
        return None
    (ZL, dL), (ZR, dR) = L, R
    a, b = p * dR, (q - p) * dL
    Z = [a * x + b * y for x, y in zip(ZL, ZR)]
    d = q * dL * dR
    g = d
    for z in Z:
        g = _gcd(g, z)
        if g == 1:
            break
    if g != 1:
        Z = [z // g for z in Z]
        d //= g
    return Z, d


def _fast_edge_ok(n, L, R, witness) -> bool:
    if witness is None:
        return False
    (ZL, dL), (ZR, dR) = L, R
    W = [dR * a - dL * b for a, b in zip(ZL, ZR)]
    xi, c = witness
    X, dx = _intvec(tuple(map(to_exact, xi)))
    if not any(X):
        return False
    c = to_exact(c)
    K, C = c.denominator, c.numerator * dx
    if n == 3:
        x0, x1, x2 = X
        p0, p1, p2, m0, m1, m2, a, b, cc, d, e, f, g, h, i = W
        return not (p0 * x0 + p1 * x1 + p2 * x2 or m0 * x0 + m1 * x1 + m2 * x2
                    or K * (a * x0 + b * x1 + cc * x2) + C * p0
                    or K * (d * x0 + e * x1 + f * x2) + C * p1
                    or K * (g * x0 + h * x1 + i * x2) + C * p2
                    or K * (a * x0 + d * x1 + g * x2) + C * m0
                    or K * (b * x0 + e * x1 + h * x2) + C * m1
                    or K * (cc * x0 + f * x1 + i * x2) + C * m2)
    zp, zm, M = W[:n], W[n:2 * n], W[2 * n:]
    if sum(a * b for a, b in zip(zp, X)) or sum(a * b for a, b in zip(zm, X)):
        return False
    for i in range(n):
        row = sum(M[i * n + j] * X[j] for j in range(n))
        if K * row + C * zp[i]:
            return False
        col = sum(M[j * n + i] * X[j] for j in range(n))
        if K * col + C * zm[i]:
            return False
    return True


def _fast_leaf_ok(n, node: LaminateTree, Z, r, s) -> bool:
    Zv, d = Z
    zp, zm, M = Zv[:n], Zv[n:2 * n], Zv[2 * n:]
    # R = d^2 (M - zp (x) zm) must be d^2 pi I
    diag = d * M[0] - zp[0] * zm[0]
    for i in range(n):
        for j in range(n):
            v = d * M[i * n + j] - zp[i] * zm[j]
            if (i != j and v) or (i == j and v != diag):
                return False
    d2 = d * d
    if node.pi is not None:
        pi = to_exact(node.pi)
        if diag * pi.denominator != pi.numerator * d2:
            return False
    if r is None or s is None:
        return True
    rn, rd, sn, sd = r.numerator, r.denominator, s.numerator, s.denominator
    if sum(x * x for x in zp) * rd * rd != rn * rn * d2:
        return False
    if sum(x * x for x in zm) * sd * sd != sn * sn * d2:
        return False
    return abs(diag) * rd * sd <= rn * sn * d2


def _verify_exact_fast(tree: LaminateTree, r, s):
    """Exact checks in one post-order pass.

    Every internal value is recomputed from its children's recomputed
    values, so the value reaching the root is the weighted leaf sum; it
    must agree with each stored state on the way up.  Returns
    ``(depth, nodes, leaves, leaf_sum)`` or None on the first failure.
    """
    n = len(tree.zp)
    depth = n_nodes = n_leaves = 0
    done = {}
    stack = [(tree, 0, False)]
    while stack:
        node, d, expanded = stack.pop()
        if node.left is None:
            n_nodes += 1
            n_leaves += 1
            depth = max(depth, d)
            Z = _node_int(node)
            if not _fast_leaf_ok(n, node, Z, r, s):
                return None
            done[id(node)] = Z
            continue
        if not expanded:
            stack.append((node, d, True))
            stack.append((node.left, d + 1, False))
            stack.append((node.right, d + 1, False))
            continue
        n_nodes += 1
        ZL, ZR = done.pop(id(node.left)), done.pop(id(node.right))
        Z = _combine(to_exact(node.lam), ZL, ZR)
        if Z is None or Z != _node_int(node):
            return None
        if not _fast_edge_ok(n, ZL, ZR, node.witness):
            return None
        done[id(node)] = Z
    Z, d = done[id(tree)]
    return depth, n_nodes, n_leaves, tuple(_MPQ(z, d) for z in Z)


def verify_laminate(tree: LaminateTree, r=None, s=None, tol: float = 0.0) -> Report:
    """Recheck every branch identity, edge direction and leaf of ``tree``.

    * branches: ``state = lam left + (1 - lam) right`` with ``0 <= lam <= 1``;
    * edges: ``left - right`` is a wave-cone direction (stored witness first,
      then the structural case analysis, then the SVD oracle);
    * leaves: ``M = zp (x) zm + pi I`` and, if ``r, s`` are given,
      ``|zp| = r``, ``|zm| = s``, ``|pi| <= rs``.

    Exact trees (rational entries) are checked exactly and ``tol`` is
    ignored for the zero tests.
    """
    exact = _tree_is_exact(tree)
    if exact:
        if r is not None:
            r = to_exact(r)
        if s is not None:
            s = to_exact(s)
    scale = max(1.0, _maxabs(tree.zp), _maxabs(tree.zm), _maxabs(tree.M))
    if exact:
        fast = _verify_exact_fast(tree, r, s)
        if fast is not None:
            depth, n_nodes, n_leaves, total = fast
            return Report(0.0, 0.0, 0.0, depth, n_nodes, n_leaves, True, 0.0, scale,
                          edge_cases=Counter({"witness": n_nodes - n_leaves}),
                          leaf_sum=total)
    leaf_d = edge_d = conv_d = 0.0
    w_leaf = w_edge = w_conv = None
    depth = n_nodes = n_leaves = 0
    cases: Counter = Counter()
    stack = [(tree, 0, "")]
    while stack:
        node, d, path = stack.pop()
        n_nodes += 1
        if node.left is None:
            n_leaves += 1
            depth = max(depth, d)
            ld = _leaf_defect(node, r, s, exact)
            if ld > leaf_d or (w_leaf is None and ld > 0):
                leaf_d, w_leaf = ld, path
            continue
        L, R, lam = node.left, node.right, node.lam
        rvals = R.zp + R.zm + R.M
        D = tuple(a - b for a, b in zip(L.zp + L.zm + L.M, rvals))
        # state - (lam left + (1 - lam) right) = state - right - lam (left - right)
        diff = [p - b - lam * d for p, b, d in zip(node.zp + node.zm + node.M, rvals, D)]
        if exact and all(x == 0 for x in diff):
            cd = 0.0
        else:
            cd = _maxabs(diff)
            if exact and cd == 0.0:
                cd = math.ulp(0.0)
        if lam < 0 or lam > 1:
            cd = max(cd, float(max(-lam, lam - 1)))
        if cd > conv_d or (w_conv is None and cd > 0):
            conv_d, w_conv = cd, path
        ed, case = _edge_defect(D, len(node.zp), node.witness, exact, tol, scale)
        cases[case] += 1
        if ed > edge_d or (w_edge is None and ed > 0):
            edge_d, w_edge = ed, path
        stack.append((L, d + 1, path + "L"))
        stack.append((R, d + 1, path + "R"))
    return Report(leaf_d, edge_d, conv_d, depth, n_nodes, n_leaves, exact,
                  0.0 if exact else tol, scale, w_leaf, w_edge, w_conv, cases)
