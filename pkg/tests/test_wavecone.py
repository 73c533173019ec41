import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cone_cases import CASES_3D, member_2d, member_3d, perturbed, to_float
from lambda_mhd import ElsasserState
from lambda_mhd.errors import DegenerateScale
from lambda_mhd.wavecone import (LAMBDA0, cone_membership, cone_membership_2d,
                                 cone_membership_structural_3d, cone_witness_numeric,
                                 k_difference_coplanarity, witness_holds_exact,
                                 witness_residual)

seeds = st.integers(0, 2 ** 32 - 1)


@pytest.mark.parametrize("case", CASES_3D)
@given(seed=seeds)
def test_structural_members_have_exact_witnesses(case, seed):
    state, _, _ = member_3d(case, random.Random(seed))
    res = cone_membership_structural_3d(state)
    assert res.member and res.case == case
    assert witness_holds_exact(state, res.witness)


@pytest.mark.parametrize("case", CASES_3D)
@given(seed=seeds)
def test_structural_agrees_with_svd(case, seed):
    rng = random.Random(seed)
    state, _, _ = member_3d(case, rng)
    for s in (state, perturbed(state, rng)):
        res = cone_membership_structural_3d(s)
        w = cone_witness_numeric(to_float(s))
        assert res.member == (w is not None)
        if w is not None:
            xi, c = w.as_floats()
            nx = np.linalg.norm(xi)
            assert nx > 1e-6
            assert witness_residual(s, xi / nx, c / nx) <= 1e-10 * max(1.0, float(np.max(np.abs(to_float(s).M))))


@pytest.mark.parametrize("case", CASES_3D)
@given(seed=seeds)
def test_float_structural_matches_exact(case, seed):
    rng = random.Random(seed)
    state, _, _ = member_3d(case, rng)
    for s in (state, perturbed(state, rng)):
        exact = cone_membership_structural_3d(s)
        flt = cone_membership_structural_3d(to_float(s))
        assert exact.member == flt.member
        if flt.member:
            xi, c = flt.witness.as_floats()
            assert abs(np.linalg.norm(xi) - 1.0) < 1e-12
            assert witness_residual(s, xi, c) <= 1e-9 * max(1.0, float(np.max(np.abs(to_float(s).M))))


@given(seed=seeds, zero=st.booleans())
def test_2d_members(seed, zero):
    rng = random.Random(seed)
    state, _, _ = member_2d(rng, zero)
    res = cone_membership_2d(state)
    assert res.member and witness_holds_exact(state, res.witness)
    bad = perturbed(state, rng)
    assert cone_membership(bad).member == (cone_witness_numeric(to_float(bad)) is not None)


def test_identity_is_not_in_lambda_but_in_lambda0_only_with_c():
    e = ElsasserState.from_values([1, 0, 0], [0, 1, 0], [[1, 0, 0], [0, 1, 0], [0, 0, 1]], exact=True)
    assert not cone_membership_structural_3d(e).member
    assert cone_witness_numeric(to_float(e)) is None


def test_lambda0_accepts_xi_zero_when_zp_zm_vanish():
    e = ElsasserState.from_values([0.0] * 3, [0.0] * 3, np.eye(3).tolist(), exact=False)
    assert cone_witness_numeric(e) is None
    w = cone_witness_numeric(e, LAMBDA0)
    xi, c = w.as_floats()
    assert np.allclose(xi, 0.0) and abs(abs(c) - 1.0) < 1e-12


def test_tiny_float_states_are_refused():
    e = ElsasserState.from_values([1e-200, 0, 0], [0, 1e-200, 0], np.zeros((3, 3)).tolist(), exact=False)
    with pytest.raises(DegenerateScale):
        cone_membership_structural_3d(e)


def test_numeric_rejects_nonpositive_tol():
    e = ElsasserState.from_values([1.0, 0, 0], [0, 1.0, 0], np.zeros((3, 3)).tolist(), exact=False)
    with pytest.raises(ValueError):
        cone_witness_numeric(e, tol=0.0)


def test_k_difference_coplanarity():
    # four points in the plane x3 = 0
    assert k_difference_coplanarity([1, 0, 0], [0, 1, 0], [2, 3, 0], [5, -1, 0], 1, 1)
    assert not k_difference_coplanarity([1, 0, 0], [0, 1, 0], [2, 3, 0], [5, -1, 1], 1, 1)
    assert not k_difference_coplanarity([1, 0, 0], [0, 1, 0], [2, 3, 0], [5, -1, 0], 1, 2)


@given(seed=seeds, zero=st.booleans())
def test_2d_float_structural_matches_exact(seed, zero):
    rng = random.Random(seed)
    state, _, _ = member_2d(rng, zero)
    for s in (state, perturbed(state, rng)):
        exact = cone_membership_2d(s)
        flt = cone_membership_2d(to_float(s))
        assert exact.member == flt.member
        if flt.member:
            xi, c = flt.witness.as_floats()
            assert witness_residual(s, xi, c) <= 1e-9 * max(1.0, float(np.max(np.abs(to_float(s).M))))
