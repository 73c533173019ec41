"""Fourier-spectral potentials and conservation diagnostics on the torus.

The torus is ``[0,1]^d`` sampled at ``x_j = j / N`` with ``N`` a power of
two; array axis ``i`` of a grid corresponds to coordinate ``x_{i+1}``.
Vector fields are arrays ``(..., m, N, ..., N)`` and scalar fields
``(..., N, ..., N)``; any leading axes (typically time) are batched.

Conventions:

* wavenumbers are ``2 pi k``; the Nyquist mode is dropped from every
  derivative, and division by ``|k|^2`` at ``k = 0`` gives 0;
* ``perp(f) = (-d_2 f, d_1 f)``, so stream functions satisfy ``v = -perp(theta)``;
* integrals over the unit torus are sample means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotSolenoidal
from .threads import parallel_map

__all__ = [
    "wavenumbers", "grad", "div", "curl", "perp", "curl_2d", "laplacian",
    "inverse_laplacian", "stream_function_2d", "helmholtz_3d", "vector_potential_3d",
    "jacobian_2d", "Diagnostics", "diagnostics", "time_derivative",
    "induction_residual_2d", "BalanceResult", "helicity_balance_3d",
    "pfaffian_identity_check", "ohm_defect", "integral",
]

DIV_TOL = 1e-10


def _axes(dim):
    return tuple(range(-dim, 0))


def _fft(f, dim):
    return np.fft.rfftn(f, axes=_axes(dim))


def _ifft(F, n, dim):
    return np.fft.irfftn(F, s=(n,) * dim, axes=_axes(dim))


def wavenumbers(n: int, dim: int) -> list:
    """``2 pi k_j`` for the real-FFT layout, broadcastable, Nyquist set to 0."""
    full = np.fft.fftfreq(n, 1.0 / n)
    full[n // 2] = 0.0
    half = np.arange(n // 2 + 1, dtype=float)
    half[n // 2] = 0.0
    ks = []
    for j in range(dim):
        k = half if j == dim - 1 else full
        shape = [1] * dim
        shape[j] = k.size
        ks.append(2.0 * np.pi * k.reshape(shape))
    return ks


def _k2(ks):
    k2 = sum(k * k for k in ks)
    inv = np.zeros_like(k2)
    np.divide(1.0, k2, out=inv, where=k2 > 0)
    return k2, inv


def grad(f, dim: int):
    """Spectral gradient of a scalar field; component axis before the grid."""
    n = f.shape[-1]
    F = _fft(f, dim)
    ks = wavenumbers(n, dim)
    return np.stack([_ifft(1j * k * F, n, dim) for k in ks], axis=-dim - 1)


def div(v, dim: int):
    n = v.shape[-1]
    ks = wavenumbers(n, dim)
    V = _fft(v, dim)
    return _ifft(sum(1j * ks[j] * _comp(V, j, dim) for j in range(dim)), n, dim)


def _comp(v, j, dim):
    return v[(Ellipsis, j) + (slice(None),) * dim]


def curl(v):
    """Spectral curl of a 3D vector field."""
    n = v.shape[-1]
    ks = wavenumbers(n, 3)
    V = _fft(v, 3)
    c = [_comp(V, j, 3) for j in range(3)]
    out = [ks[1] * c[2] - ks[2] * c[1], ks[2] * c[0] - ks[0] * c[2], ks[0] * c[1] - ks[1] * c[0]]
    return np.stack([_ifft(1j * o, n, 3) for o in out], axis=-4)


def perp(f):
    """``(-d_2 f, d_1 f)`` for a 2D scalar field."""
    g = grad(f, 2)
    return np.stack([-_comp(g, 1, 2), _comp(g, 0, 2)], axis=-3)


def curl_2d(v):
    """Scalar curl ``d_1 v_2 - d_2 v_1``."""
    n = v.shape[-1]
    k1, k2 = wavenumbers(n, 2)
    V = _fft(v, 2)
    return _ifft(1j * (k1 * _comp(V, 1, 2) - k2 * _comp(V, 0, 2)), n, 2)


def laplacian(f, dim: int):
    n = f.shape[-1]
    k2, _ = _k2(wavenumbers(n, dim))
    return _ifft(-k2 * _fft(f, dim), n, dim)


def inverse_laplacian(f, dim: int):
    """Mean-zero ``u`` with ``lap u = f`` (the mean of ``f`` is discarded)."""
    n = f.shape[-1]
    _, inv = _k2(wavenumbers(n, dim))
    return _ifft(-inv * _fft(f, dim), n, dim)


def integral(f, dim: int):
    """Integral over the unit torus (mean of samples over the grid axes)."""
    return np.mean(f, axis=_axes(dim))


def _scale(*arrays) -> float:
    return max([1.0] + [float(np.max(np.abs(a))) for a in arrays if np.size(a)])


def _check_solenoidal(v, dim, tol):
    scale = _scale(v)
    d = float(np.max(np.abs(div(v, dim))))
    if d > tol * scale:
        raise NotSolenoidal(f"spectral divergence {d:.3e} exceeds {tol:.1e} * scale", d)
    m = float(np.max(np.abs(integral(v, dim))))
    if m > tol * scale:
        raise NotSolenoidal(f"field mean {m:.3e} is not zero", m)


def stream_function_2d(v, tol: float = DIV_TOL, check: bool = True):
    """Mean-zero ``theta`` with ``-perp(theta) = v``, i.e. ``v = (d_2 theta, -d_1 theta)``.

    ``theta = -lap^{-1}(d_1 v_2 - d_2 v_1)``.  Raises :class:`NotSolenoidal`
    if ``v`` has divergence or mean above ``tol * max(1, |v|)``.
    """
    v = np.asarray(v, dtype=float)
    if check:
        _check_solenoidal(v, 2, tol)
    return -inverse_laplacian(curl_2d(v), 2)


def helmholtz_3d(v):
    """``v = u + grad g`` with ``u`` solenoidal and ``g`` mean-zero.

    ``u_hat = v_hat - (v_hat . k) k / |k|^2`` and ``g_hat = -i (v_hat . k) / |k|^2``.
    The mean of ``v`` (zero for admissible input) stays in ``u``.
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[-1]
    ks = wavenumbers(n, 3)
    _, inv = _k2(ks)
    V = _fft(v, 3)
    kv = sum(ks[j] * _comp(V, j, 3) for j in range(3)) * inv
    u = np.stack([_ifft(_comp(V, j, 3) - kv * ks[j], n, 3) for j in range(3)], axis=-4)
    g = _ifft(-1j * kv, n, 3)
    return u, g


def vector_potential_3d(b, tol: float = DIV_TOL, check: bool = True):
    """``psi_hat = i k x b_hat / |k|^2``: mean-zero, divergence-free, ``curl psi = b``."""
    b = np.asarray(b, dtype=float)
    if check:
        _check_solenoidal(b, 3, tol)
    n = b.shape[-1]
    ks = wavenumbers(n, 3)
    _, inv = _k2(ks)
    B = _fft(b, 3)
    c = [_comp(B, j, 3) for j in range(3)]
    out = [ks[1] * c[2] - ks[2] * c[1], ks[2] * c[0] - ks[0] * c[2], ks[0] * c[1] - ks[1] * c[0]]
    return np.stack([_ifft(1j * o * inv, n, 3) for o in out], axis=-4)


def _dealias(f, dim):
    n = f.shape[-1]
    F = _fft(f, dim)
    cut = n / 3.0
    mask = np.ones(F.shape[-dim:], dtype=bool)
    for k in wavenumbers(n, dim):
        mask &= np.abs(k) / (2.0 * np.pi) <= cut
    return _ifft(F * mask, n, dim)


def jacobian_2d(f, g, dealias: bool = False):
    """``J(f, g) = d_1 f d_2 g - d_2 f d_1 g`` with spectral derivatives.

    ``dealias`` applies the 2/3 rule to the inputs and the product.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if dealias:
        f, g = _dealias(f, 2), _dealias(g, 2)
    df, dg = grad(f, 2), grad(g, 2)
    J = _comp(df, 0, 2) * _comp(dg, 1, 2) - _comp(df, 1, 2) * _comp(dg, 0, 2)
    return _dealias(J, 2) if dealias else J


def time_derivative(series, dt: float):
    """Second-order centered differences along axis 0, one-sided second
    order at the two ends (needs at least three samples)."""
    series = np.asarray(series, dtype=float)
    if series.shape[0] < 3:
        raise ValueError("time derivative needs at least three slices")
    return np.gradient(series, dt, axis=0, edge_order=2)


@dataclass
class Diagnostics:
    """Per-slice functionals; ``nan`` where a quantity does not apply."""

    t: np.ndarray
    energy: np.ndarray
    cross_helicity: np.ndarray
    magnetic_helicity: np.ndarray
    msmp: np.ndarray

    COLUMNS = ("t", "energy", "cross_helicity", "magnetic_helicity", "msmp")

    def rows(self):
        for i in range(len(self.t)):
            yield tuple(float(getattr(self, c)[i]) for c in self.COLUMNS)

    def to_csv(self) -> str:
        lines = [",".join(self.COLUMNS)]
        lines += [",".join(f"{x:.17g}" for x in row) for row in self.rows()]
        return "\n".join(lines) + "\n"

    def drift(self, name: str) -> float:
        """``max_t |Q(t) - Q(0)|``."""
        q = getattr(self, name)
        return float(np.max(np.abs(q - q[0]))) if q.size else 0.0


def _slice_diag(u, b, dim, tol, check):
    e = 0.5 * float(integral(np.sum(u * u, axis=0) + np.sum(b * b, axis=0), dim))
    x = float(integral(np.sum(u * b, axis=0), dim))
    if dim == 3:
        psi = vector_potential_3d(b, tol, check)
        return e, x, float(integral(np.sum(psi * b, axis=0), dim)), np.nan
    theta = stream_function_2d(b, tol, check)
    return e, x, np.nan, float(integral(theta * theta, dim))


def diagnostics(u, b, dt: float = 1.0, tol: float = DIV_TOL, check: bool = True) -> Diagnostics:
    """Energy, cross helicity and magnetic helicity (3D) or mean-square
    magnetic potential (2D) for series ``u, b`` of shape ``(T, d, N, ...)``."""
    u = np.asarray(u, dtype=float)
    b = np.asarray(b, dtype=float)
    if u.shape != b.shape:
        raise ValueError("u and b must have the same shape")
    dim = b.ndim - 2
    rows = np.array(parallel_map(lambda i: _slice_diag(u[i], b[i], dim, tol, check),
                                 range(b.shape[0])), dtype=float).reshape(-1, 4)
    t = np.arange(b.shape[0]) * dt
    return Diagnostics(t, rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3])


def induction_residual_2d(Psi, Phi, dt: float, dealias: bool = False):
    """``d_t Psi + J(Psi, Phi)`` for ``b = -perp(Psi)``, ``u = -perp(Phi)``.

    This is the potential form of ``d_t b + div(b (x) u - u (x) b) = 0``:
    applying ``-perp`` to the residual returns that expression.
    """
    Psi = np.asarray(Psi, dtype=float)
    Phi = np.asarray(Phi, dtype=float)
    return time_derivative(Psi, dt) + jacobian_2d(Psi, Phi, dealias)


@dataclass
class BalanceResult:
    """``defect = dH/dt + 2 int a.b`` per slice, with its ingredients."""

    defect: np.ndarray
    helicity: np.ndarray
    ab_integral: np.ndarray
    induction_residual: float

    @property
    def max_defect(self) -> float:
        return float(np.max(np.abs(self.defect)))


def helicity_balance_3d(b, a, dt: float, tol: float = DIV_TOL, check: bool = True) -> BalanceResult:
    """Magnetic helicity balance for series ``b, a`` of shape ``(T, 3, N, N, N)``.

    Also reports ``max |d_t b + curl a|`` (the balance presumes it is small).
    """
    b = np.asarray(b, dtype=float)
    a = np.asarray(a, dtype=float)
    T = b.shape[0]

    def one(i):
        psi = vector_potential_3d(b[i], tol, check)
        return (float(integral(np.sum(psi * b[i], axis=0), 3)),
                float(integral(np.sum(a[i] * b[i], axis=0), 3)))

    H, ab = np.array(parallel_map(one, range(T))).T
    dH = time_derivative(H, dt)
    ind = float(np.max(np.abs(time_derivative(b, dt) + curl(a))))
    return BalanceResult(dH + 2.0 * ab, H, ab, ind)


def _jac_tx(f, ft, g, gt, fx, gx):
    return ft * gx - fx * gt


def pfaffian_identity_check(Psi, g, dt: float) -> float:
    """Largest pointwise gap between ``(-d_t Psi + grad g) . curl Psi`` and

    ``d(Psi1,Psi2)/d(t,x3) + d(Psi2,Psi3)/d(t,x1) + d(Psi3,Psi1)/d(t,x2) + grad g . curl Psi``,

    with ``d(f,h)/d(t,x) = f_t h_x - f_x h_t``.
    """
    Psi = np.asarray(Psi, dtype=float)
    g = np.asarray(g, dtype=float)
    Pt = time_derivative(Psi, dt)
    D = [grad(_comp(Psi, j, 3), 3) for j in range(3)]   # D[j][..., i, ...] = d_i Psi_j
    d = lambda j, i: _comp(D[j], i, 3)
    P = [_comp(Psi, j, 3) for j in range(3)]
    Q = [_comp(Pt, j, 3) for j in range(3)]
    w = [d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)]
    gg = grad(g, 3)
    gw = sum(_comp(gg, i, 3) * w[i] for i in range(3))
    lhs = -sum(Q[i] * w[i] for i in range(3)) + gw
    rhs = (Q[0] * d(1, 2) - d(0, 2) * Q[1]
           + Q[1] * d(2, 0) - d(1, 0) * Q[2]
           + Q[2] * d(0, 1) - d(2, 1) * Q[0]
           + gw)
    return float(np.max(np.abs(lhs - rhs)))


def ohm_defect(u, b, a, dim: int):
    """Largest deviation from ideal Ohm's law.

    3D: ``max |a - b x u|``.  2D: ``a`` is the single entry ``A_12`` of the
    antisymmetric ``A = b (x) u - u (x) b``, so the defect is
    ``max |a - (b_1 u_2 - u_1 b_2)|``.
    """
    u = np.asarray(u, dtype=float)
    b = np.asarray(b, dtype=float)
    a = np.asarray(a, dtype=float)
    if dim == 3:
        U = [_comp(u, j, 3) for j in range(3)]
        B = [_comp(b, j, 3) for j in range(3)]
        bu = np.stack([B[1] * U[2] - B[2] * U[1], B[2] * U[0] - B[0] * U[2],
                       B[0] * U[1] - B[1] * U[0]], axis=-4)
        return float(np.max(np.abs(a - bu)))
    A12 = _comp(b, 0, 2) * _comp(u, 1, 2) - _comp(u, 0, 2) * _comp(b, 1, 2)
    return float(np.max(np.abs(np.reshape(a, A12.shape) - A12)))
