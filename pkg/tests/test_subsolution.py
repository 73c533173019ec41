import json

import numpy as np
import pytest

from lambda_mhd import NontrivialityFailed, NoScaleFound, ParseError
from lambda_mhd.hull import hull_constants
from lambda_mhd.subsolution import (Bump, _hull_norms, Grid, PotentialSpec, assemble_subsolution,
                                    bump_profile, check_tolerances, default_config,
                                    evaluate_slice, load_config, residuals,
                                    scale_into_hull, spec_from_config)

SMALL = Grid(16, 8)


def test_bump_profile_support_and_peak():
    s = np.array([-1.5, -1.0, 0.0, 0.5, 1.0, 2.0])
    f = bump_profile(s, 0, 8.0)
    assert f[2] == 1.0
    assert np.all(f[[0, 1, 4, 5]] == 0.0) and 0.0 < f[3] < 1.0
    assert bump_profile(0.0, 1, 8.0) == 0.0
    with pytest.raises(ValueError):
        bump_profile(s, 3)


def test_bump_derivative_matches_difference():
    s = np.linspace(-0.9, 0.9, 41)
    h = 1e-6
    for order in (1, 2):
        fd = (bump_profile(s + h, order - 1, 3.0) - bump_profile(s - h, order - 1, 3.0)) / (2 * h)
        assert np.max(np.abs(fd - bump_profile(s, order, 3.0))) < 1e-5


def test_pairs_solve_constraints_pointwise():
    spec = PotentialSpec()
    F = evaluate_slice(spec, SMALL.x, 0.4)
    assert np.max(np.abs(np.sum(F.a * F.b, axis=0))) < 1e-14 * max(1.0, np.max(np.abs(F.a)) * np.max(np.abs(F.b)))
    assert np.all(F.S == np.swapaxes(F.S, 0, 1))


def test_residuals_second_order():
    spec = PotentialSpec()
    coarse, fine = residuals(spec, SMALL.refined()), residuals(spec, SMALL.refined().refined())
    for k, q in coarse.ratios(fine).items():
        assert 3.0 < q < 5.0, k


def test_scale_is_power_of_two_below_c():
    spec = PotentialSpec()
    sc = scale_into_hull(spec, 1, 1, SMALL)
    assert sc.eps == 2.0 ** -sc.k
    assert sc.eps <= float(hull_constants(0, 1, 1).c)
    assert 0.0 < sc.margin < 1.0
    # the returned power of two is the largest one that fits
    worst = max(float(np.max(_hull_norms(evaluate_slice(spec, SMALL.x, float(t)), 2 * sc.eps)))
                for t in SMALL.times)
    assert worst >= sc.c


def test_scale_rejects_helicity():
    spec = PotentialSpec()
    slices = [evaluate_slice(spec, SMALL.x, float(t)) for t in SMALL.times]
    for F in slices:
        F.a = F.a + F.b
    with pytest.raises(NoScaleFound):
        scale_into_hull(spec, 1, 1, SMALL, slices=slices)


def test_assemble_small_grid():
    sub = assemble_subsolution(PotentialSpec(), 1, 1, SMALL, refine=False, certify=True)
    assert np.any(sub.u) and np.any(sub.b)
    assert sub.u.shape == (8, 3, 16, 16, 16) and sub.S.shape == (8, 6, 16, 16, 16)
    assert sub.margin > 0
    assert sub.certificate["verified"] and sub.certificate["depth"] <= 12
    tol = default_config()["tolerances"]
    assert all("ratio" not in f for f in check_tolerances(sub, tol))


def test_trivial_configuration():
    spec = PotentialSpec(eta_prime=(0.0, 0.0, 0.0))
    with pytest.raises(NontrivialityFailed):
        assemble_subsolution(spec, 1, 1, SMALL, refine=False)
    spec = PotentialSpec(psi=Bump(amplitude=0.0))
    with pytest.raises(NontrivialityFailed):
        assemble_subsolution(spec, 1, 1, SMALL, refine=False)


def test_check_tolerances_reports_failures():
    sub = assemble_subsolution(PotentialSpec(), 1, 1, Grid(8, 4), refine=True)
    fails = check_tolerances(sub, {"ratio_low": 10.0, "ratio_high": 20.0, "residual_rel": 1e-9})
    assert any("ratio" in f for f in fails) and any("relative residual" in f for f in fails)


def test_config_merge_and_errors(tmp_path):
    spec, grid, opts = spec_from_config({"grid": {"n": 16}, "E": {"amplitude": 2.0}})
    assert grid == Grid(16, 16) and spec.E.amplitude == 2.0 and opts["refine"]
    for bad in ({"nope": 1}, {"grid": {"n": 12}}, {"eta_prime": [1, 2]},
                {"E": {"center": [0.5]}}, {"eta4": "x"}, {"psi": {"width": 1}}):
        with pytest.raises(ParseError):
            spec_from_config(bad)
    p = tmp_path / "cfg.json"
    p.write_text("{broken")
    with pytest.raises(ParseError):
        load_config(p)
    p.write_text(json.dumps(default_config()))
    assert spec_from_config(load_config(p))[1] == Grid()
