"""Smooth compactly supported strict subsolutions of 3D ideal MHD.

Fields come from potentials built of separable space-time bumps

    phi(s) = exp(-1 / (1 - s^2))  for |s| < 1,   0 otherwise,

raised to a sharpness power ``p`` (default 8, which keeps the residual
stencils in their second-order regime from 32 points per axis).

* magnetic pair from a scalar ``E`` and ``eta = (eta', eta4)``:
  ``b = grad E x eta'``, ``a = -(d_t E) eta' + eta4 grad E``;
* Euler pair from ``psi = p B`` (constant vector ``p``, bump ``B``):
  ``u = lap psi - grad div psi``,
  ``S = -d_t(grad psi + grad psi^T) + 2 (d_t div psi) I``.

Both pairs solve the linear constraints identically and ``a . b = 0``
pointwise.  Derivatives are evaluated in closed form; finite differences
are used only to measure residuals.  The box is the periodic unit cube
sampled at ``x_j = j / n`` so the output doubles as torus field data.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import NontrivialityFailed, NoScaleFound, ParseError
from .hull.constants import hull_constants
from .threads import parallel_map

__all__ = [
    "bump_profile", "Bump", "PotentialSpec", "Grid", "SliceFields",
    "gen_magnetic_pair", "gen_euler_pair", "evaluate_slice", "ScaleResult",
    "scale_into_hull", "Residuals", "residuals", "SampledSubsolution",
    "assemble_subsolution", "default_config", "spec_from_config",
    "certify_sample", "check_tolerances", "load_config",
]


def bump_profile(s, order: int = 0, p: float = 1.0):
    """``e^p phi^p = exp(p - p / (1 - s^2))`` and its derivatives up to second order.

    The factor ``e^p`` makes the peak value 1.  With ``w = 1 - s^2`` and
    ``g = -p / w``: ``g' = -2 p s / w^2``, ``g'' = -2 p / w^2 - 8 p s^2 / w^3``,
    ``f' = f g'`` and ``f'' = f (g'^2 + g'')``.  Larger ``p`` flattens the
    edges of the support, which keeps high derivatives resolvable on
    coarse grids.
    """
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    w = np.where(inside, 1.0 - s * s, 1.0)
    phi = np.where(inside, np.exp(-p * s * s / w), 0.0)
    if order == 0:
        return phi
    g1 = -2.0 * p * s / w ** 2
    if order == 1:
        return phi * g1
    if order == 2:
        return phi * (g1 * g1 - 2.0 * p / w ** 2 - 8.0 * p * s * s / w ** 3)
    raise ValueError("order must be 0, 1 or 2")


@dataclass(frozen=True)
class Bump:
    """``amplitude * prod_i f((x_i - c_i) / R_i) * f((t - t0) / T)`` with ``f`` the
    normalized profile of :func:`bump_profile` (peak value ``amplitude``)."""

    center: tuple = (0.5, 0.5, 0.5)
    radii: tuple = (0.5, 0.5, 0.5)
    t_center: float = 0.5
    t_radius: float = 0.5
    amplitude: float = 1.0
    sharpness: float = 8.0

    def axis(self, i: int, x, order: int):
        """``d^order/dx^order`` of the i-th spatial factor."""
        R = self.radii[i]
        return bump_profile((np.asarray(x) - self.center[i]) / R, order, self.sharpness) / R ** order

    def time(self, t: float, order: int) -> float:
        T = self.t_radius
        return float(bump_profile((t - self.t_center) / T, order, self.sharpness)) / T ** order

    def support_box(self) -> list:
        return [(c - r, c + r) for c, r in zip(self.center, self.radii)]


@dataclass(frozen=True)
class PotentialSpec:
    """Potentials ``E``, ``eta = (eta', eta4)`` and ``psi = p * B``."""

    E: Bump = Bump()
    eta_prime: tuple = (0.3, -0.5, 0.8)
    eta4: float = 0.7
    psi: Bump = Bump()
    psi_dir: tuple = (1.0, 0.5, -0.25)


@dataclass(frozen=True)
class Grid:
    """``n^3`` periodic nodes ``j / n`` on the unit cube; ``nt`` times
    ``t0 + (k + 1/2) dt`` with ``dt = (t1 - t0) / nt``."""

    n: int = 32
    nt: int = 16
    t0: float = 0.0
    t1: float = 1.0

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.nt

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) / self.n

    @property
    def times(self) -> np.ndarray:
        return self.t0 + (np.arange(self.nt) + 0.5) * self.dt

    def refined(self) -> "Grid":
        return Grid(2 * self.n, 2 * self.nt, self.t0, self.t1)


@dataclass
class SliceFields:
    """Fields at one time: ``u, b, a`` of shape (3, n, n, n), ``S`` (3, 3, n, n, n)."""

    u: np.ndarray
    b: np.ndarray
    S: np.ndarray
    a: np.ndarray


def _outer3(X, Y, Z):
    return X[:, None, None] * Y[None, :, None] * Z[None, None, :]


class _Separable:
    """Derivatives of a separable bump on a tensor grid at fixed time."""

    def __init__(self, bump: Bump, x: np.ndarray, t: float):
        self.f = [[bump.axis(i, x, k) for k in range(3)] for i in range(3)]
        self.tf = [bump.time(t, k) for k in range(2)]
        self.A = bump.amplitude

    def d(self, orders: Sequence[int], t_order: int = 0) -> np.ndarray:
        """``d^{orders} d_t^{t_order}`` of the bump as a 3D array."""
        scale = self.A * self.tf[t_order]
        if scale == 0.0:
            n = len(self.f[0][0])
            return np.zeros((n, n, n))
        return scale * _outer3(self.f[0][orders[0]], self.f[1][orders[1]], self.f[2][orders[2]])


def _grad_orders(i):
    o = [0, 0, 0]
    o[i] = 1
    return o


def gen_magnetic_pair(E: Bump, eta_prime, eta4: float, x: np.ndarray, t: float):
    """``b = grad E x eta'`` and ``a = -(d_t E) eta' + eta4 grad E`` on the grid."""
    sep = _Separable(E, x, t)
    g = np.stack([sep.d(_grad_orders(i)) for i in range(3)])
    Et = sep.d([0, 0, 0], 1)
    ep = np.asarray(eta_prime, dtype=float)
    b = np.stack([g[1] * ep[2] - g[2] * ep[1],
                  g[2] * ep[0] - g[0] * ep[2],
                  g[0] * ep[1] - g[1] * ep[0]])
    a = -Et[None] * ep[:, None, None, None] + eta4 * g
    return b, a


def gen_euler_pair(psi: Bump, p, x: np.ndarray, t: float):
    """``u = p lap B - H p``, ``S = -(p (x) grad B_t + grad B_t (x) p) + 2 (p . grad B_t) I``."""
    sep = _Separable(psi, x, t)
    p = np.asarray(p, dtype=float)
    H = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(i, 3):
            o = [0, 0, 0]
            o[i] += 1
            o[j] += 1
            H[i][j] = H[j][i] = sep.d(o)
    lap = H[0][0] + H[1][1] + H[2][2]
    u = np.stack([p[i] * lap - sum(H[i][j] * p[j] for j in range(3)) for i in range(3)])
    gt = [sep.d(_grad_orders(i), 1) for i in range(3)]
    div_t = sum(p[j] * gt[j] for j in range(3))
    S = np.empty((3, 3) + u.shape[1:])
    for i in range(3):
        for j in range(3):
            S[i, j] = -(p[i] * gt[j] + gt[i] * p[j])
        S[i, i] += 2.0 * div_t
    return u, S


def evaluate_slice(spec: PotentialSpec, x: np.ndarray, t: float) -> SliceFields:
    b, a = gen_magnetic_pair(spec.E, spec.eta_prime, spec.eta4, x, t)
    u, S = gen_euler_pair(spec.psi, spec.psi_dir, x, t)
    return SliceFields(u, b, S, a)


# --------------------------------------------------------------------------
# residuals by centered differences


def _dx(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Second-order centered derivative on the periodic grid."""
    return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * h)


_RES_KEYS = ("div_b", "div_u", "induction", "momentum")


@dataclass
class Residuals:
    """Largest absolute residuals of the four linear constraints.

    ``scales`` holds, per constraint, the largest absolute value of any
    single term (for example ``max |d_t u|`` and ``max |div S|``), which
    is the natural reference for relative tolerances.
    """

    div_b: float
    div_u: float
    induction: float   # d_t b + curl a
    momentum: float    # d_t u + div S
    scales: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in _RES_KEYS}

    def relative(self) -> dict:
        return {k: (getattr(self, k) / self.scales[k] if self.scales.get(k) else 0.0)
                for k in _RES_KEYS}

    def ratios(self, finer: "Residuals") -> dict:
        return {k: (v / getattr(finer, k) if getattr(finer, k) > 0 else math.inf)
                for k, v in self.as_dict().items()}


def _amax(*arrays) -> float:
    return max(float(np.max(np.abs(x))) for x in arrays)


def _slice_residuals(spec: PotentialSpec, grid: Grid, t: float) -> tuple:
    x, h, dt = grid.x, grid.h, grid.dt
    F = evaluate_slice(spec, x, t)
    Fp = evaluate_slice(spec, x, t + dt)
    Fm = evaluate_slice(spec, x, t - dt)
    db = [_dx(F.b[i], i, h) for i in range(3)]
    du = [_dx(F.u[i], i, h) for i in range(3)]
    bt = (Fp.b - Fm.b) / (2.0 * dt)
    a = F.a
    curl_a = np.stack([_dx(a[2], 1, h) - _dx(a[1], 2, h),
                       _dx(a[0], 2, h) - _dx(a[2], 0, h),
                       _dx(a[1], 0, h) - _dx(a[0], 1, h)])
    ut = (Fp.u - Fm.u) / (2.0 * dt)
    divS = np.stack([sum(_dx(F.S[i, j], j, h) for j in range(3)) for i in range(3)])
    return (_amax(sum(db)), _amax(sum(du)), _amax(bt + curl_a), _amax(ut + divS),
            _amax(*db), _amax(*du), _amax(bt, curl_a), _amax(ut, divS))


def residuals(spec: PotentialSpec, grid: Grid) -> Residuals:
    """Max-norm residuals over all grid samples (time derivatives from the
    closed form at ``t +- dt``)."""
    per = parallel_map(lambda t: _slice_residuals(spec, grid, float(t)), grid.times)
    worst = [float(v) for v in np.max(np.array(per), axis=0)]
    return Residuals(*worst[:4], scales=dict(zip(_RES_KEYS, worst[4:])))


# --------------------------------------------------------------------------
# scaling into the hull


def _axial_matrix(a: np.ndarray) -> np.ndarray:
    """``A`` with ``A xi = xi x a`` for axial ``a = (a23, a31, a12)``; shape (3, 3, ...)."""
    z = np.zeros_like(a[0])
    return np.array([[z, a[2], -a[1]],
                     [-a[2], z, a[0]],
                     [a[1], -a[0], z]])


def _hull_norms(F: SliceFields, eps: float) -> np.ndarray:
    """max(|alpha|, |beta|, |N|, |Pi|) per sample for the scaled state."""
    al = eps * (F.u + F.b)
    be = eps * (F.u - F.b)
    M = eps * (F.S + _axial_matrix(F.a))
    R = M - al[:, None] * be[None, :]
    Pi = (R[0, 0] + R[1, 1] + R[2, 2]) / 3.0
    N = R.copy()
    for i in range(3):
        N[i, i] -= Pi
    nN = np.sqrt(np.sum(N * N, axis=(0, 1)))
    return np.maximum.reduce([np.sqrt(np.sum(al * al, axis=0)), np.sqrt(np.sum(be * be, axis=0)),
                              nN, np.abs(Pi)])


def _helicity_defect(F: SliceFields) -> float:
    """max |a . b| / max(1, |a| |b|) over the slice."""
    ab = np.abs(np.sum(F.a * F.b, axis=0))
    den = np.maximum(1.0, np.sqrt(np.sum(F.a ** 2, axis=0) * np.sum(F.b ** 2, axis=0)))
    return float(np.max(ab / den))


@dataclass
class ScaleResult:
    """``eps = 2^-k`` and the relative margin ``1 - max_norm / c`` (> 0 inside)."""

    eps: float
    k: int
    margin: float
    c: float
    worst_time_index: int = -1
    worst_index: tuple = ()


def scale_into_hull(spec: PotentialSpec, r, s, grid: Grid, ab_tol: float = 1e-12,
                    slices: Optional[list] = None) -> ScaleResult:
    """Largest ``eps = 2^-k`` (``k >= 0``) with every scaled sample strictly
    inside the certified neighbourhood of the origin (``tau = 0``).

    Raises :class:`NoScaleFound` if ``a . b`` is nonzero somewhere beyond
    ``ab_tol`` (relative), since no scaling can fix that.
    """
    c = float(hull_constants(0, r, s).c)
    if slices is None:
        slices = parallel_map(lambda t: evaluate_slice(spec, grid.x, float(t)), grid.times)
    hd = max(_helicity_defect(F) for F in slices)
    if hd > ab_tol:
        raise NoScaleFound(f"a.b is nonzero (relative defect {hd:.3e})")
    lin = max(float(np.max(_hull_norms(F, 1.0))) for F in slices)
    if lin == 0.0:
        return ScaleResult(1.0, 0, 1.0, c)

    def worst(eps):
        vals = [float(np.max(_hull_norms(F, eps))) for F in slices]
        return max(vals), int(np.argmax(vals))

    k = max(0, math.ceil(math.log2(lin / c)) - 1)
    while worst(2.0 ** -k)[0] >= c:
        k += 1
    while k > 0 and worst(2.0 ** -(k - 1))[0] < c:
        k -= 1
    eps = 2.0 ** -k
    w, ti = worst(eps)
    idx = np.unravel_index(int(np.argmax(_hull_norms(slices[ti], eps))), slices[ti].u.shape[1:])
    return ScaleResult(eps, k, 1.0 - w / c, c, ti, tuple(int(i) for i in idx))


# --------------------------------------------------------------------------
# assembly


@dataclass
class SampledSubsolution:
    """Scaled fields on the base grid (arrays of shape (nt, comps, n, n, n))."""

    grid: Grid
    u: np.ndarray
    b: np.ndarray
    S: np.ndarray
    a: np.ndarray
    eps: float
    margin: float
    residuals: Residuals
    residuals_fine: Optional[Residuals] = None
    helicity_defect: float = 0.0
    certificate: Optional[dict] = None
    summary: dict = field(default_factory=dict)


def certify_sample(F: SliceFields, idx: tuple, eps: float, r, s) -> dict:
    """Exact certificate for one scaled sample.

    The float sample is converted exactly to rationals, ``a`` is projected
    to be exactly orthogonal to ``b`` and the general laminate is built and
    verified on the rational backend.
    """
    from .algebra import State3D
    from .hull import membership_u_rs, verify_laminate
    from .numbers import to_exact
    i, j, k = idx
    e = to_exact(eps)
    u = [to_exact(float(F.u[m, i, j, k])) * e for m in range(3)]
    b = [to_exact(float(F.b[m, i, j, k])) * e for m in range(3)]
    a = [to_exact(float(F.a[m, i, j, k])) * e for m in range(3)]
    S = [to_exact(float(F.S[p, q, i, j, k])) * e for p in range(3) for q in range(3) if q >= p]
    bb = sum(x * x for x in b)
    if bb != 0:
        ab = sum(x * y for x, y in zip(a, b))
        a = [x - ab / bb * y for x, y in zip(a, b)]
    st = State3D.from_values(u, b, S, a, exact=True)
    res = membership_u_rs(st, r, s)
    if not res.member:
        return {"member": False, "reason": res.reason}
    rep = verify_laminate(res.tree, r, s)
    return {"member": True, "verified": rep.ok, "depth": rep.depth, "nodes": rep.n_nodes}


def assemble_subsolution(spec: PotentialSpec, r=1, s=1, grid: Grid = Grid(),
                         refine: bool = True, certify: bool = False) -> SampledSubsolution:
    """Sample, scale and check a subsolution.

    Raises :class:`NontrivialityFailed` if ``u`` or ``b`` vanishes on the grid.
    """
    slices = parallel_map(lambda t: evaluate_slice(spec, grid.x, float(t)), grid.times)
    if all(not np.any(F.b) for F in slices):
        raise NontrivialityFailed("b vanishes identically on the grid")
    if all(not np.any(F.u) for F in slices):
        raise NontrivialityFailed("u vanishes identically on the grid")
    hd = max(_helicity_defect(F) for F in slices)
    sc = scale_into_hull(spec, r, s, grid, slices=slices)
    res = residuals(spec, grid)
    fine = residuals(spec, grid.refined()) if refine else None
    cert = None
    if certify and sc.worst_index:
        cert = certify_sample(slices[sc.worst_time_index], sc.worst_index, sc.eps, r, s)
    eps = sc.eps
    u = eps * np.stack([F.u for F in slices])
    b = eps * np.stack([F.b for F in slices])
    iu, ju = np.triu_indices(3)
    S = eps * np.stack([F.S[iu, ju] for F in slices])
    a = eps * np.stack([F.a for F in slices])
    summary = {
        "eps": eps, "log2_eps": -sc.k, "c": sc.c, "margin": sc.margin,
        "helicity_defect": hd, "grid": asdict(grid),
        "residuals": res.as_dict(),
        "residual_scales": res.scales,
        "residuals_relative": res.relative(),
        "residuals_refined": fine.as_dict() if fine else None,
        "ratios": res.ratios(fine) if fine else None,
        "certificate": cert,
        "note": "residuals are for the unscaled fields; the scaled fields' residuals are eps times these",
    }
    return SampledSubsolution(grid, u, b, S, a, eps, sc.margin, res, fine, hd, cert, summary)


def check_tolerances(sub: SampledSubsolution, tol: dict) -> list:
    """Failure messages (empty when every check passes)."""
    fails = []
    for k, v in sub.residuals.relative().items():
        if not v <= tol["residual_rel"]:
            fails.append(f"relative residual {k} = {v:.3e} > {tol['residual_rel']}")
    if sub.residuals_fine is not None:
        for k, q in sub.residuals.ratios(sub.residuals_fine).items():
            if not tol["ratio_low"] <= q <= tol["ratio_high"]:
                fails.append(f"refinement ratio {k} = {q:.3f} outside "
                             f"[{tol['ratio_low']}, {tol['ratio_high']}]")
    if not sub.margin > 0:
        fails.append(f"hull margin {sub.margin:.3e} is not positive")
    if sub.certificate is not None and not sub.certificate.get("verified", False):
        fails.append("exact certificate of the worst sample failed")
    return fails


# --------------------------------------------------------------------------
# configuration


def default_config() -> dict:
    spec = PotentialSpec()
    return {
        "E": asdict(spec.E),
        "eta_prime": list(spec.eta_prime),
        "eta4": spec.eta4,
        "psi": asdict(spec.psi),
        "psi_dir": list(spec.psi_dir),
        "grid": asdict(Grid()),
        "r": 1, "s": 1,
        "refine": True,
        "certify": False,
        "tolerances": {"ratio_low": 3.5, "ratio_high": 4.5, "residual_rel": 0.1},
    }


def _bump(obj: dict, base: Bump) -> Bump:
    d = asdict(base)
    unknown = set(obj or {}) - set(d)
    if unknown:
        raise ParseError(f"unknown bump keys: {sorted(unknown)}")
    d.update(obj or {})
    for key in ("center", "radii"):
        d[key] = tuple(float(v) for v in d[key])
        if len(d[key]) != 3:
            raise ParseError(f"bump {key} needs three entries")
    return Bump(**{k: d[k] for k in asdict(base)})


def spec_from_config(cfg: dict) -> tuple:
    """``(spec, grid, options)`` from a (partial) config dict merged with defaults."""
    base = default_config()
    unknown = set(cfg) - set(base)
    if unknown:
        raise ParseError(f"unknown config keys: {sorted(unknown)}")
    merged = {**base, **cfg}
    try:
        spec = PotentialSpec(
            E=_bump(merged["E"], PotentialSpec().E),
            eta_prime=tuple(float(v) for v in merged["eta_prime"]),
            eta4=float(merged["eta4"]),
            psi=_bump(merged["psi"], PotentialSpec().psi),
            psi_dir=tuple(float(v) for v in merged["psi_dir"]),
        )
        g = {**base["grid"], **(cfg.get("grid") or {})}
        grid = Grid(int(g["n"]), int(g["nt"]), float(g["t0"]), float(g["t1"]))
    except (TypeError, ValueError, KeyError) as err:
        raise ParseError(f"bad config: {err}") from err
    if len(spec.eta_prime) != 3 or len(spec.psi_dir) != 3:
        raise ParseError("eta_prime and psi_dir need three entries")
    if grid.n < 4 or grid.n & (grid.n - 1):
        raise ParseError("grid.n must be a power of two >= 4")
    tol = {**base["tolerances"], **(cfg.get("tolerances") or {})}
    opts = {"r": merged["r"], "s": merged["s"], "refine": bool(merged["refine"]),
            "certify": bool(merged["certify"]), "tolerances": tol}
    return spec, grid, opts


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as err:
        raise ParseError(f"malformed config JSON: {err}") from err
