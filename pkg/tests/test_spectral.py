import numpy as np
import pytest

from fields import (TWO_PI, band_limited, beltrami_x1, beltrami_x3, grid,
                    oscillating_beltrami, pfaffian_scale, solenoidal_2d, solenoidal_3d)
from lambda_mhd import NotSolenoidal
from lambda_mhd.spectral import (curl, diagnostics, div, grad, helicity_balance_3d,
                                 helmholtz_3d, induction_residual_2d, integral,
                                 inverse_laplacian, jacobian_2d, laplacian, ohm_defect,
                                 perp, pfaffian_identity_check, stream_function_2d,
                                 time_derivative, vector_potential_3d)

N = 32


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def test_stream_function_closed_form():
    x1, _ = grid(N, 2)
    v = np.stack([np.zeros_like(x1), -np.cos(TWO_PI * x1)])
    theta = stream_function_2d(v)
    assert np.max(np.abs(theta - np.sin(TWO_PI * x1) / TWO_PI)) < 1e-14


def test_stream_function_round_trip(rng):
    v, theta0 = solenoidal_2d(rng, N)
    theta = stream_function_2d(v)
    assert np.max(np.abs(-perp(theta) - v)) < 1e-12
    assert np.max(np.abs(theta - (theta0 - theta0.mean()))) < 1e-12
    assert abs(theta.mean()) < 1e-15


def test_stream_function_rejects_divergence(rng):
    g = grad(band_limited(rng, N, 2), 2)
    with pytest.raises(NotSolenoidal):
        stream_function_2d(g)
    with pytest.raises(NotSolenoidal):
        stream_function_2d(np.ones((2, N, N)))


def test_helmholtz_split(rng):
    v = band_limited(rng, N, 3, lead=(3,))
    v = v - integral(v, 3)[:, None, None, None]
    u, g = helmholtz_3d(v)
    assert np.max(np.abs(u + grad(g, 3) - v)) < 1e-12
    assert np.max(np.abs(div(u, 3))) < 1e-11
    assert abs(float(integral(np.sum(u * grad(g, 3), axis=0), 3))) < 1e-12
    u2, g2 = helmholtz_3d(u)
    assert np.max(np.abs(u2 - u)) < 1e-12 and np.max(np.abs(g2)) < 1e-12


def test_vector_potential_beltrami():
    b = beltrami_x3(N)
    assert np.max(np.abs(vector_potential_3d(b) - b / TWO_PI)) < 1e-14


def test_vector_potential_round_trip(rng):
    b = solenoidal_3d(rng, N)
    psi = vector_potential_3d(b)
    assert np.max(np.abs(curl(psi) - b)) < 1e-12
    assert np.max(np.abs(div(psi, 3))) < 1e-11
    with pytest.raises(NotSolenoidal):
        vector_potential_3d(grad(band_limited(rng, N, 3), 3))


def test_laplacian_inverse(rng):
    f = band_limited(rng, N, 3)
    f = f - f.mean()
    assert np.max(np.abs(laplacian(inverse_laplacian(f, 3), 3) - f)) < 1e-12


def test_jacobian_antisymmetric_and_dealias(rng):
    f, g = band_limited(rng, N, 2), band_limited(rng, N, 2)
    J = jacobian_2d(f, g)
    assert np.max(np.abs(J + jacobian_2d(g, f))) < 1e-9
    # modes up to 4 stay below the 2/3 cutoff, products up to 8 too
    assert np.max(np.abs(jacobian_2d(f, g, dealias=True) - J)) < 1e-9


def test_time_derivative_quadratic_exact():
    t = np.arange(6) * 0.25
    series = (t ** 2)[:, None] * np.ones((6, 3))
    assert np.max(np.abs(time_derivative(series, 0.25) - 2 * t[:, None])) < 1e-13
    with pytest.raises(ValueError):
        time_derivative(series[:2], 0.25)


def test_diagnostics_beltrami_and_csv():
    b = np.stack([beltrami_x3(16)] * 4)
    d = diagnostics(np.zeros_like(b), b, dt=0.5)
    assert np.allclose(d.magnetic_helicity, 1 / TWO_PI, atol=1e-14)
    assert np.allclose(d.energy, 0.5, atol=1e-15)
    assert np.all(np.abs(d.cross_helicity) < 1e-15) and np.all(np.isnan(d.msmp))
    assert d.drift("energy") == 0.0
    lines = d.to_csv().splitlines()
    assert lines[0] == "t,energy,cross_helicity,magnetic_helicity,msmp" and len(lines) == 5
    assert float(lines[2].split(",")[0]) == 0.5


def test_diagnostics_2d_msmp():
    x1, _ = grid(N, 2)
    psi = np.sin(TWO_PI * x1) / TWO_PI
    b = -perp(psi)[None]
    d = diagnostics(b, b)
    assert abs(d.msmp[0] - 1 / (8 * np.pi ** 2)) < 1e-15
    assert np.isnan(d.magnetic_helicity[0])
    with pytest.raises(ValueError):
        diagnostics(b, b[:, :1])


def test_ohm_defect_and_mechanism(rng):
    u, b = band_limited(rng, N, 3, lead=(3,)), band_limited(rng, N, 3, lead=(3,))
    a = np.cross(b, u, axis=0)
    assert ohm_defect(u, b, a, 3) == 0.0
    assert abs(float(integral(np.sum(a * b, axis=0), 3))) < 1e-15
    u2, b2 = band_limited(rng, N, 2, lead=(2,)), band_limited(rng, N, 2, lead=(2,))
    A12 = b2[0] * u2[1] - u2[0] * b2[1]
    assert ohm_defect(u2, b2, A12[None], 2) == 0.0
    assert ohm_defect(u2, b2, A12 + 1e-3, 2) == pytest.approx(1e-3)


def test_induction_curl_consistency(rng):
    """``-perp`` of ``J(Psi, Phi)`` equals ``div(b (x) u - u (x) b)``."""
    Psi, Phi = band_limited(rng, N, 2), band_limited(rng, N, 2)
    b, u = -perp(Psi), -perp(Phi)
    F = b[:, None] * u[None, :] - u[:, None] * b[None, :]
    divF = np.stack([sum(grad(F[i, j], 2)[j] for j in range(2)) for i in range(2)])
    lhs = -perp(jacobian_2d(Psi, Phi))
    assert np.max(np.abs(lhs - divF)) < 1e-10 * np.max(np.abs(divF))


def test_induction_residual_steady():
    x1, x2 = grid(N, 2)
    Psi = np.sin(TWO_PI * x1) * np.cos(TWO_PI * x2)
    series = np.stack([Psi] * 5)
    assert np.max(np.abs(induction_residual_2d(series, series, 0.1))) < 1e-10


def test_helicity_balance_second_order():
    defects = []
    for T, dt in ((17, 1 / 32), (33, 1 / 64)):
        b, a = oscillating_beltrami(16, T, dt)
        res = helicity_balance_3d(b, a, dt)
        assert res.induction_residual < 2.0
        defects.append(res.max_defect)
        t = np.arange(T) * dt
        ab = TWO_PI * np.cos(TWO_PI * t) * np.sin(TWO_PI * t) / (2 * TWO_PI)
        assert np.max(np.abs(res.ab_integral - ab)) < 1e-14
    assert 3.5 < defects[0] / defects[1] < 4.5


def test_pfaffian_identity(rng):
    Psi = band_limited(rng, 16, 3, lead=(8, 3))
    g = band_limited(rng, 16, 3, lead=(8,))
    assert pfaffian_identity_check(Psi, g, 0.1) < 1e-11 * pfaffian_scale(Psi, g, 0.1)


def test_beltrami_second_mode():
    B = beltrami_x1(N, 2)
    assert np.max(np.abs(curl(B) - 2 * TWO_PI * B)) < 1e-12
