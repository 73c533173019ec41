import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lambda_mhd import ElsasserState, State2D, State3D, k_membership
from lambda_mhd.algebra import (axial_to_matrix, from_elsasser, lambda_convex_f2d,
                                matrix_to_axial, q_helicity, state_from_json, to_elsasser)
from lambda_mhd.numbers import mpq

ints = st.integers(-20, 20)
fracs = st.fractions(min_value=-5, max_value=5, max_denominator=12)


def _exact_state(vals):
    return State3D.from_values(vals[0:3], vals[3:6], vals[6:12], vals[12:15], exact=True)


@given(st.lists(fracs, min_size=15, max_size=15))
def test_elsasser_round_trip_exact(vals):
    s = _exact_state([mpq(v) for v in vals])
    back = from_elsasser(to_elsasser(s))
    for x, y in ((s.u, back.u), (s.b, back.b), (s.S, back.S), (s.a, back.a)):
        assert np.all(x == y)


@given(st.lists(ints, min_size=3, max_size=3), st.lists(ints, min_size=3, max_size=3))
def test_axial_matrix_acts_as_cross_product(a, xi):
    A = axial_to_matrix(np.array(a))
    assert np.array_equal(A @ np.array(xi), np.cross(xi, a))
    assert np.array_equal(matrix_to_axial(A), np.array(a))


def test_symmetric_S_required():
    with pytest.raises(ValueError):
        State3D.from_values([0] * 3, [0] * 3, [[1, 2, 0], [0, 1, 0], [0, 0, 1]], [0] * 3)


def test_q_is_a_dot_b():
    s = State3D.from_values([1, 2, 3], [1, -1, 2], [0] * 6, [4, 0, -2], exact=True)
    assert q_helicity(s) == 0
    assert q_helicity(s.scaled(mpq(3))) == 0


@given(st.lists(fracs, min_size=6, max_size=6), fracs)
def test_k_membership_of_k_states(v, pi):
    zp, zm = [mpq(x) for x in v[:3]], [mpq(x) for x in v[3:]]
    M = np.outer(np.array(zp, dtype=object), np.array(zm, dtype=object)) + mpq(pi) * np.eye(3, dtype=int)
    res = k_membership(ElsasserState.from_values(zp, zm, M, exact=True))
    assert res.in_k and res.defect == 0.0 and res.pi == mpq(pi)
    M[0, 1] += mpq(1, 7)
    res = k_membership(ElsasserState.from_values(zp, zm, M, exact=True))
    assert not res.in_k and res.defect > 0


def test_k_rs_membership():
    e = ElsasserState.from_values([3, 4, 0], [0, 0, 2], [[0, 0, 6], [0, 0, 8], [0, 0, 0]], exact=True)
    assert k_membership(e, 5, 2).in_krs
    assert not k_membership(e, 5, 3).in_krs
    assert k_membership(e, 5, 3).in_k


def test_f2d_vanishes_on_k_and_is_a_square():
    s = State2D.from_values([1, 2], [3, 4], [[3, 4], [6, 8]], exact=True)
    assert lambda_convex_f2d(s) == 0
    s = State2D.from_values([0, 0], [0, 0], [[0, 2], [-1, 0]], exact=True)
    assert lambda_convex_f2d(s) == 9


def test_state_from_json_variants():
    s = state_from_json({"u": ["1/2", 0, 0], "b": [0, 1, 0], "S": [0] * 6, "a": [0, 0, 0]})
    assert isinstance(s, State3D) and s.u[0] == mpq(1, 2)
    e = state_from_json({"alpha": [1, 0], "beta": [0, 1], "M": [0, 1, 0, 0]})
    assert isinstance(e, State2D) and e.M[0, 1] == 1
    f = state_from_json({"u": [0.5, 0, 0], "b": [0, 1, 0], "S": [0] * 6, "a": [0, 0, 0]})
    assert not f.exact
