"""Independently derived reference values, frozen as literals.

Each value below was worked out by hand or with sympy, never by running
the package; the tests compare the package against these numbers.
"""

import math

import numpy as np
import pytest
import sympy as sp

from lambda_mhd import State2D, k_membership
from lambda_mhd.hull import decompose_ball, hull_constants, verify_laminate
from lambda_mhd.numbers import mpq
from lambda_mhd.spectral import diagnostics, jacobian_2d
from lambda_mhd.subsolution import Bump, bump_profile, gen_euler_pair, gen_magnetic_pair

# --- hull constants -------------------------------------------------------
# c' = (1-tau)^2 rs / (4 (r+s+1)^2), c'' = c'^2/16,
# c''' = c''^4 / (1000 (r+s+1)^8), c = c'''/8
FROZEN_CONSTANTS = {
    (0, 1, 1): ("1/36", "1/20736"),
    (0, 2, 1): ("1/32", "1/16384"),
    ("1/2", 1, 1): ("1/144", "1/331776"),
}


@pytest.mark.parametrize("triple", list(FROZEN_CONSTANTS))
def test_hull_constants_frozen(triple):
    k = hull_constants(*triple)
    cp, cdp = FROZEN_CONSTANTS[triple]
    assert k.cprime == mpq(cp)
    assert k.cdprime == mpq(cdp)
    w = k.r + k.s + 1
    assert k.ctprime == mpq(cdp) ** 4 / (1000 * w ** 8)
    assert k.c == k.ctprime / 8


def test_c_value_011():
    # 1 / (8 * 1000 * 3^8 * 20736^4)
    k = hull_constants(0, 1, 1)
    assert k.c == mpq(1, 8 * 1000 * 3 ** 8 * 20736 ** 4)
    assert math.isclose(float(k.c), 1.0305e-25, rel_tol=1e-4)


# --- the two-dimensional hull point ----------------------------------------

def test_2d_hull_point_root_defect():
    # leaves (+-3, 1), (+-2, 1) average to alpha = beta = (0, 1) and
    # M = [[6, 0], [0, 1]]; M - alpha (x) beta = diag(6, 0), pressure 3,
    # off-pressure part diag(3, -3): defect 3
    root = State2D.from_values([0, 1], [0, 1], [[6, 0], [0, 1]], exact=True)
    res = k_membership(root)
    assert not res.in_k
    assert res.defect == 3.0
    assert res.pi == 3


# --- a single ball chord ----------------------------------------------------

def test_ball_chord_weights():
    # alpha = (3/10, 0, 0) inside the unit ball: the chord along e1 ends at
    # +-e1 with weights 13/20 and 7/20; beta is already on the sphere
    al = (mpq(3, 10), mpq(0), mpq(0))
    be = (mpq(0), mpq(1), mpq(0))
    tree = decompose_ball(al, be, mpq(0), 1, 1)
    assert tree.lam == mpq(13, 20)
    assert tree.left.zp == (1, 0, 0)
    assert tree.right.zp == (-1, 0, 0)
    assert tree.depth() == 1
    assert verify_laminate(tree, 1, 1).ok


# --- spectral values ---------------------------------------------------------

def _grid(n, dim):
    x = np.arange(n) / n
    return np.meshgrid(*([x] * dim), indexing="ij")


def test_beltrami_helicity_frozen():
    # b = (sin 2 pi z, cos 2 pi z, 0) has curl b = 2 pi b, so psi = b / (2 pi)
    # and H = int |b|^2 / (2 pi) = 1 / (2 pi); energy = 1/2
    n = 16
    _, _, z = _grid(n, 3)
    b = np.stack([np.sin(2 * np.pi * z), np.cos(2 * np.pi * z), 0 * z])[None]
    d = diagnostics(np.zeros_like(b), b)
    assert abs(d.magnetic_helicity[0] - 0.15915494309189535) <= 1e-14
    assert abs(d.energy[0] - 0.5) <= 1e-14


def test_msmp_frozen():
    # psi = sin(2 pi x1) / (2 pi): b = -perp(psi) = (0, -cos 2 pi x1),
    # int psi^2 = 1 / (8 pi^2)
    n = 16
    x, _ = _grid(n, 2)
    b = np.stack([0 * x, -np.cos(2 * np.pi * x)])[None]
    d = diagnostics(np.zeros_like(b), b)
    assert abs(d.msmp[0] - 0.012665147955292222) <= 1e-15


def test_jacobian_frozen():
    # J(sin 2 pi x, sin 2 pi y) = 4 pi^2 cos 2 pi x cos 2 pi y
    n = 16
    x, y = _grid(n, 2)
    J = jacobian_2d(np.sin(2 * np.pi * x), np.sin(2 * np.pi * y))
    ref = 39.47841760435743 * np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y)
    assert np.max(np.abs(J - ref)) <= 1e-11


# --- bump profile and potential pairs, against sympy ------------------------

_s, _p = sp.symbols("s p", real=True)
_F = sp.exp(_p - _p / (1 - _s ** 2))


@pytest.mark.parametrize("order", [0, 1, 2])
@pytest.mark.parametrize("p", [1.0, 8.0])
def test_bump_profile_matches_sympy(order, p):
    f = sp.lambdify(_s, sp.diff(_F, _s, order).subs(_p, p), "numpy")
    s = np.linspace(-0.95, 0.95, 39)
    got = bump_profile(s, order, p)
    assert np.allclose(got, f(s), rtol=1e-12, atol=1e-14)
    assert np.all(bump_profile(np.array([-1.0, 1.0, 1.5]), order, p) == 0.0)


def _sym_bump(b: Bump, X, t):
    expr = sp.Integer(1)
    for i in range(3):
        expr *= _F.subs(_s, (X[i] - b.center[i]) / b.radii[i])
    expr *= _F.subs(_s, (t - b.t_center) / b.t_radius)
    return b.amplitude * expr.subs(_p, b.sharpness)


def _sample_points():
    return np.array([0.3, 0.55, 0.7]), 0.45


def test_magnetic_pair_matches_sympy():
    X = sp.symbols("x1:4", real=True)
    t = sp.Symbol("t", real=True)
    E = Bump(center=(0.5, 0.45, 0.55), radii=(0.5, 0.45, 0.4), sharpness=3.0)
    ep, e4 = (0.3, -0.5, 0.8), 0.7
    Es = _sym_bump(E, X, t)
    grad = [sp.diff(Es, xi) for xi in X]
    b = [grad[1] * ep[2] - grad[2] * ep[1], grad[2] * ep[0] - grad[0] * ep[2],
         grad[0] * ep[1] - grad[1] * ep[0]]
    a = [-sp.diff(Es, t) * ep[i] + e4 * grad[i] for i in range(3)]
    xs, tv = _sample_points()
    bn, an = gen_magnetic_pair(E, ep, e4, xs, tv)
    sub = {X[0]: xs[0], X[1]: xs[1], X[2]: xs[2], t: tv}
    for i in range(3):
        assert math.isclose(bn[i, 0, 1, 2], float(b[i].subs(sub)), rel_tol=1e-11, abs_tol=1e-14)
        assert math.isclose(an[i, 0, 1, 2], float(a[i].subs(sub)), rel_tol=1e-11, abs_tol=1e-14)


def test_euler_pair_matches_sympy():
    X = sp.symbols("x1:4", real=True)
    t = sp.Symbol("t", real=True)
    B = Bump(center=(0.5, 0.5, 0.45), radii=(0.45, 0.5, 0.5), sharpness=2.0)
    p = (1.0, 0.5, -0.25)
    Bs = _sym_bump(B, X, t)
    H = [[sp.diff(Bs, X[i], X[j]) for j in range(3)] for i in range(3)]
    lap = H[0][0] + H[1][1] + H[2][2]
    u = [p[i] * lap - sum(H[i][j] * p[j] for j in range(3)) for i in range(3)]
    gt = [sp.diff(Bs, X[i], t) for i in range(3)]
    pg = sum(p[j] * gt[j] for j in range(3))
    S = [[-(p[i] * gt[j] + gt[i] * p[j]) + (2 * pg if i == j else 0) for j in range(3)]
         for i in range(3)]
    xs, tv = _sample_points()
    un, Sn = gen_euler_pair(B, p, xs, tv)
    sub = {X[0]: xs[0], X[1]: xs[1], X[2]: xs[2], t: tv}
    for i in range(3):
        assert math.isclose(un[i, 0, 1, 2], float(u[i].subs(sub)), rel_tol=1e-10, abs_tol=1e-13)
        for j in range(3):
            assert math.isclose(Sn[i, j, 0, 1, 2], float(S[i][j].subs(sub)),
                                rel_tol=1e-10, abs_tol=1e-13)


def test_potential_pairs_solve_the_linear_system_symbolically():
    """div b = div u = 0, d_t b + curl a = 0, d_t u + div S = 0 and a . b = 0
    hold identically for the potential formulas with generic E and B."""
    X = sp.symbols("x1:4", real=True)
    t = sp.Symbol("t", real=True)
    E = sp.Function("E")(*X, t)
    B = sp.Function("B")(*X, t)
    ep = sp.symbols("e1:4", real=True)
    e4 = sp.Symbol("e4", real=True)
    p = sp.symbols("p1:4", real=True)
    g = [sp.diff(E, xi) for xi in X]
    b = [g[1] * ep[2] - g[2] * ep[1], g[2] * ep[0] - g[0] * ep[2], g[0] * ep[1] - g[1] * ep[0]]
    a = [-sp.diff(E, t) * ep[i] + e4 * g[i] for i in range(3)]
    curl = lambda v: [sp.diff(v[2], X[1]) - sp.diff(v[1], X[2]),
                      sp.diff(v[0], X[2]) - sp.diff(v[2], X[0]),
                      sp.diff(v[1], X[0]) - sp.diff(v[0], X[1])]
    div = lambda v: sum(sp.diff(v[i], X[i]) for i in range(3))
    assert sp.simplify(div(b)) == 0
    ca = curl(a)
    assert all(sp.simplify(sp.diff(b[i], t) + ca[i]) == 0 for i in range(3))
    assert sp.expand(sum(a[i] * b[i] for i in range(3))) == 0
    H = [[sp.diff(B, X[i], X[j]) for j in range(3)] for i in range(3)]
    lap = H[0][0] + H[1][1] + H[2][2]
    u = [p[i] * lap - sum(H[i][j] * p[j] for j in range(3)) for i in range(3)]
    gt = [sp.diff(B, X[i], t) for i in range(3)]
    pg = sum(p[j] * gt[j] for j in range(3))
    S = [[-(p[i] * gt[j] + gt[i] * p[j]) + (2 * pg if i == j else 0) for j in range(3)]
         for i in range(3)]
    assert sp.simplify(div(u)) == 0
    for i in range(3):
        assert sp.simplify(sp.diff(u[i], t) + sum(sp.diff(S[i][j], X[j]) for j in range(3))) == 0
