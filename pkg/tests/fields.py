"""Band-limited and closed-form periodic fields on the unit torus."""

from __future__ import annotations

import numpy as np

from lambda_mhd.spectral import curl, grad, perp, time_derivative

TWO_PI = 2.0 * np.pi


def grid(n: int, dim: int):
    x = np.arange(n) / n
    return np.meshgrid(*([x] * dim), indexing="ij")


def band_limited(rng, n: int, dim: int, kmax: int = 4, lead: tuple = ()):
    """Random real field with modes ``|k_j| <= kmax`` and unit max amplitude."""
    k = np.fft.fftfreq(n, 1.0 / n)
    mask = np.ones((n,) * dim, dtype=bool)
    for j in range(dim):
        shape = [1] * dim
        shape[j] = n
        mask &= (np.abs(k) <= kmax).reshape(shape)
    shape = lead + (n,) * dim
    F = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * mask
    f = np.real(np.fft.ifftn(F, axes=tuple(range(-dim, 0))))
    return f / np.max(np.abs(f))


def solenoidal_2d(rng, n: int, kmax: int = 4, lead: tuple = ()):
    theta = band_limited(rng, n, 2, kmax, lead)
    return -perp(theta), theta


def solenoidal_3d(rng, n: int, kmax: int = 4, lead: tuple = ()):
    b = curl(band_limited(rng, n, 3, kmax, lead + (3,)))
    return b / np.max(np.abs(b))


def beltrami_x3(n: int):
    """``(sin 2 pi x3, cos 2 pi x3, 0)``: curl equals ``2 pi`` times the field."""
    _, _, x3 = grid(n, 3)
    return np.stack([np.sin(TWO_PI * x3), np.cos(TWO_PI * x3), np.zeros_like(x3)])


def beltrami_x1(n: int, k: int = 1):
    """``(0, sin 2 pi k x1, cos 2 pi k x1)``: curl equals ``2 pi k`` times the field."""
    x1, _, _ = grid(n, 3)
    w = TWO_PI * k * x1
    return np.stack([np.zeros_like(x1), np.sin(w), np.cos(w)])


def oscillating_beltrami(n: int, T: int, dt: float, omega: float = TWO_PI):
    """``b = cos(w t) B1 + sin(w t) B2`` with ``a`` solving ``d_t b + curl a = 0``.

    ``B1, B2`` are Beltrami with curl eigenvalues ``2 pi`` and ``4 pi``, so
    ``H(t) = cos^2 / (2 pi) + sin^2 / (4 pi)`` and
    ``int a.b = w cos sin / (4 pi)`` are not constant: ideal Ohm's law fails
    and ``dH/dt = -2 int a.b`` is the balance to test.
    """
    B1, B2 = beltrami_x3(n), beltrami_x1(n, 2)
    t = (np.arange(T) * dt)[:, None, None, None, None]
    b = np.cos(omega * t) * B1 + np.sin(omega * t) * B2
    a = omega * (np.sin(omega * t) * B1 / TWO_PI - np.cos(omega * t) * B2 / (2 * TWO_PI))
    return b, a


def pfaffian_scale(Psi, g, dt: float) -> float:
    """Size of the largest product in the Pfaffian expansion:
    ``max|D Psi| (max|d_t Psi| + max|grad g|)``."""
    D = np.stack([grad(Psi[:, j], 3) for j in range(3)])
    return float(np.max(np.abs(D)) * (np.max(np.abs(time_derivative(Psi, dt)))
                                      + np.max(np.abs(grad(g, 3)))))
