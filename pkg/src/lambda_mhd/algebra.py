"""Pointwise state algebra.

A pointwise MHD state is ``(u, b, S, a)``: velocity, magnetic field, a
symmetric stress slot and the axial vector of the antisymmetric electric
matrix ``A`` (``A xi = xi x a``).  The Elsasser view is ``z+ = u + b``,
``z- = u - b``, ``M = S + A``.  In two dimensions states are handled
directly in Elsasser form ``(alpha, beta, M)``.

Arrays hold either floats or exact rationals (``dtype=object``); every
function here is backend-generic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numbers import EXACT, FLOAT, to_exact

__all__ = [
    "State3D", "ElsasserState", "State2D", "Frame", "KMembership",
    "axial_to_matrix", "matrix_to_axial", "to_elsasser", "from_elsasser",
    "q_helicity", "lambda_convex_f2d", "k_membership", "build_frame",
    "state_scale", "as_array", "state_from_json",
]


def as_array(values, exact: Optional[bool] = None) -> np.ndarray:
    """1-D or 2-D array; object dtype holding rationals when ``exact``.

    With ``exact=None`` the backend is inferred: any float makes the array
    float, otherwise values are converted to rationals.
    """
    arr = np.asarray(values, dtype=object)
    if exact is None:
        flat = arr.ravel().tolist()
        exact = not any(isinstance(v, float) or isinstance(v, np.floating) for v in flat)
    if exact:
        out = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            out[idx] = to_exact(v)
        return out
    out = np.empty(arr.shape, dtype=float)
    for idx, v in np.ndenumerate(arr):
        out[idx] = FLOAT.num(v)
    return out


def _is_exact_array(a: np.ndarray) -> bool:
    return a.dtype == object


def _zero_like(a: np.ndarray):
    return to_exact(0) if _is_exact_array(a) else 0.0


def axial_to_matrix(a) -> np.ndarray:
    """Antisymmetric ``A`` with ``A xi = xi x a``.

    With ``a = (a23, a31, a12)`` this is
    ``[[0, a12, -a31], [-a12, 0, a23], [a31, -a23, 0]]``.
    """
    a = np.asarray(a)
    z = _zero_like(a)
    return np.array([[z, a[2], -a[1]],
                     [-a[2], z, a[0]],
                     [a[1], -a[0], z]], dtype=a.dtype)


def matrix_to_axial(A) -> np.ndarray:
    """Inverse of :func:`axial_to_matrix` applied to the antisymmetric part."""
    A = np.asarray(A)
    half = to_exact(1) / 2 if _is_exact_array(A) else 0.5
    K = (A - A.T) * half
    return np.array([K[1, 2], K[2, 0], K[0, 1]], dtype=A.dtype)


@dataclass(frozen=True)
class State3D:
    """Pointwise state (u, b, S, a) in three dimensions."""

    u: np.ndarray
    b: np.ndarray
    S: np.ndarray
    a: np.ndarray

    @classmethod
    def from_values(cls, u, b, S, a, exact: Optional[bool] = None) -> "State3D":
        vals = list(u) + list(b) + list(np.asarray(S, dtype=object).ravel()) + list(a)
        arr = as_array(vals, exact)
        S_arr = arr[6:-3]
        if S_arr.size == 6:
            i, j = np.triu_indices(3)
            full = np.empty((3, 3), dtype=arr.dtype)
            full[i, j] = S_arr
            full[j, i] = S_arr
            S_arr = full
        else:
            S_arr = S_arr.reshape(3, 3)
            if not np.all(S_arr == S_arr.T):
                raise ValueError("S must be symmetric")
        return cls(arr[0:3], arr[3:6], S_arr, arr[-3:])

    @classmethod
    def zero(cls, exact: bool = True) -> "State3D":
        return cls.from_values([0] * 3, [0] * 3, [0] * 6, [0] * 3,
                               exact=exact) if exact else cls.from_values(
            [0.0] * 3, [0.0] * 3, [0.0] * 6, [0.0] * 3, exact=False)

    @property
    def exact(self) -> bool:
        return _is_exact_array(self.u)

    @property
    def A(self) -> np.ndarray:
        return axial_to_matrix(self.a)

    def scaled(self, t) -> "State3D":
        return State3D(self.u * t, self.b * t, self.S * t, self.a * t)

    def to_json(self) -> dict:
        i, j = np.triu_indices(3)
        return {"u": _json_list(self.u), "b": _json_list(self.b),
                "S": _json_list(self.S[i, j]), "a": _json_list(self.a)}


@dataclass(frozen=True)
class ElsasserState:
    """Elsasser form (z+, z-, M) in two or three dimensions."""

    zp: np.ndarray
    zm: np.ndarray
    M: np.ndarray

    @classmethod
    def from_values(cls, zp, zm, M, exact: Optional[bool] = None) -> "ElsasserState":
        n = len(zp)
        vals = list(zp) + list(zm) + list(np.asarray(M, dtype=object).ravel())
        arr = as_array(vals, exact)
        return cls(arr[:n], arr[n:2 * n], arr[2 * n:].reshape(n, n))

    @property
    def dim(self) -> int:
        return len(self.zp)

    @property
    def exact(self) -> bool:
        return _is_exact_array(self.zp)

    def __sub__(self, other: "ElsasserState") -> "ElsasserState":
        return ElsasserState(self.zp - other.zp, self.zm - other.zm, self.M - other.M)

    def __add__(self, other: "ElsasserState") -> "ElsasserState":
        return ElsasserState(self.zp + other.zp, self.zm + other.zm, self.M + other.M)

    def scaled(self, t) -> "ElsasserState":
        return ElsasserState(self.zp * t, self.zm * t, self.M * t)

    def embedding(self) -> np.ndarray:
        """The (n+1)x(n+1) matrix ``[[M, zp], [zm^T, 0]]``."""
        n = self.dim
        V = np.empty((n + 1, n + 1), dtype=self.M.dtype)
        V[:n, :n] = self.M
        V[:n, n] = self.zp
        V[n, :n] = self.zm
        V[n, n] = _zero_like(self.M)
        return V

    def to_json(self) -> dict:
        if self.dim == 2:
            return State2D(self.zp, self.zm, self.M).to_json()
        return from_elsasser(self).to_json()


@dataclass(frozen=True)
class State2D:
    """Two-dimensional state in Elsasser form (alpha = z+, beta = z-)."""

    alpha: np.ndarray
    beta: np.ndarray
    M: np.ndarray

    @classmethod
    def from_values(cls, alpha, beta, M, exact: Optional[bool] = None) -> "State2D":
        e = ElsasserState.from_values(alpha, beta, M, exact)
        return cls(e.zp, e.zm, e.M)

    # Elsasser aliases so 2D states can be passed where (zp, zm, M) is expected
    @property
    def zp(self) -> np.ndarray:
        return self.alpha

    @property
    def zm(self) -> np.ndarray:
        return self.beta

    @property
    def dim(self) -> int:
        return 2

    @property
    def exact(self) -> bool:
        return _is_exact_array(self.alpha)

    def as_elsasser(self) -> ElsasserState:
        return ElsasserState(self.alpha, self.beta, self.M)

    def embedding(self) -> np.ndarray:
        return self.as_elsasser().embedding()

    def to_json(self) -> dict:
        return {"alpha": _json_list(self.alpha), "beta": _json_list(self.beta),
                "M": _json_list(self.M.ravel())}


def _json_list(arr) -> list:
    out = []
    for v in np.asarray(arr).ravel().tolist():
        if isinstance(v, float):
            out.append(v)
        else:
            q = to_exact(v)
            out.append(str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}")
    return out


def to_elsasser(s: State3D) -> ElsasserState:
    """``z+ = u + b``, ``z- = u - b``, ``M = S + A``."""
    return ElsasserState(s.u + s.b, s.u - s.b, s.S + s.A)


def from_elsasser(e: ElsasserState) -> State3D:
    """Inverse of :func:`to_elsasser`."""
    half = to_exact(1) / 2 if e.exact else 0.5
    u = (e.zp + e.zm) * half
    b = (e.zp - e.zm) * half
    S = (e.M + e.M.T) * half
    a = matrix_to_axial(e.M)
    return State3D(u, b, S, a)


def state_scale(*arrays) -> float:
    """``max(1, |inputs|_inf)`` used to make tolerances relative."""
    m = 1.0
    for arr in arrays:
        arr = np.asarray(arr)
        if arr.size:
            m = max(m, float(np.max(np.abs(arr.astype(float) if arr.dtype == object else arr))))
    return m


def q_helicity(s: State3D):
    """The quadratic form ``Q(u, b, S, a) = a . b``."""
    return np.dot(s.a, s.b)


def lambda_convex_f2d(s) -> object:
    """``|(m12 - a1 b2) - (m21 - a2 b1)|^2`` for a 2D Elsasser state."""
    al, be, M = s.zp, s.zm, s.M
    g = (M[0, 1] - al[0] * be[1]) - (M[1, 0] - al[1] * be[0])
    return g * g


@dataclass(frozen=True)
class KMembership:
    """Result of :func:`k_membership`.

    ``status`` is one of ``"InKrs"``, ``"InK"``, ``"NotInK"``.  ``pi`` is the
    extracted pressure (diagonal mean of ``M - z+ (x) z-``); ``defect`` is the
    largest violated residual (0 for members).
    """

    status: str
    pi: object
    defect: float

    @property
    def in_k(self) -> bool:
        return self.status in ("InK", "InKrs")

    @property
    def in_krs(self) -> bool:
        return self.status == "InKrs"


def _norm_defect(v, target, exact: bool) -> float:
    """``| |v| - target |`` as a float; exactly 0.0 when equal in rationals."""
    n2 = np.dot(v, v)
    if exact and target is not None and n2 == target * target:
        return 0.0
    return abs(float(n2) ** 0.5 - float(target))


def k_membership(e, r=None, s=None, tol=0.0) -> KMembership:
    """Test ``M = z+ (x) z- + Pi I`` and, when ``r, s`` are given, ``K_{r,s}``.

    With exact inputs and ``tol = 0`` the test is exact.  Without ``r, s``
    only membership in ``K`` is decided.
    """
    zp, zm, M = e.zp, e.zm, e.M
    n = len(zp)
    exact = _is_exact_array(np.asarray(M))
    R = M - np.outer(zp, zm)
    pi = sum(R[i, i] for i in range(n)) / n
    off = R - pi * np.eye(n, dtype=int) if exact else R - pi * np.eye(n)
    k_def = max(abs(float(x)) for x in off.ravel())
    if exact and all(x == 0 for x in off.ravel()):
        k_def = 0.0
    if k_def > tol:
        return KMembership("NotInK", pi, k_def)
    if r is None or s is None:
        return KMembership("InK", pi, k_def)
    if exact:
        r, s = to_exact(r), to_exact(s)
    dr = _norm_defect(zp, r, exact)
    ds = _norm_defect(zm, s, exact)
    dpi = max(0.0, float(abs(pi) - r * s)) if not (exact and abs(pi) <= r * s) else 0.0
    worst = max(dr, ds, dpi)
    if worst <= tol:
        return KMembership("InKrs", pi, max(k_def, worst))
    return KMembership("InK", pi, worst)


@dataclass(frozen=True)
class Frame:
    """Right-handed orthonormal frame (f1, f2, f3), float valued."""

    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray

    def matrix(self) -> np.ndarray:
        """Columns f1, f2, f3."""
        return np.column_stack([self.f1, self.f2, self.f3])

    def coefficients(self, N) -> np.ndarray:
        """``c_ij = f_i . N f_j``."""
        F = self.matrix()
        return F.T @ np.asarray(N, dtype=float) @ F


def _least_aligned_axis(v) -> int:
    """Index of the coordinate axis minimizing ``|<e, v>|`` (lowest on ties)."""
    mags = [abs(x) for x in v]
    return mags.index(min(mags))


def build_frame(alpha, beta, z=None) -> Frame:
    """Adapted orthonormal frame with ``f1 = (alpha - beta)/|alpha - beta|``.

    When ``alpha == beta`` the third vector is ``z/|z|`` for a nonzero axial
    hint ``z`` (the axial vector of ``N - N^T``), else ``e1``; the first two
    vectors then complete it with the same axis rule.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    d = alpha - beta
    nd = np.linalg.norm(d)
    if nd > 0:
        f1 = d / nd
        k = _least_aligned_axis(f1)
        e = np.zeros(3)
        e[k] = 1.0
        f2 = e - np.dot(e, f1) * f1
        f2 /= np.linalg.norm(f2)
        f3 = np.cross(f1, f2)
        return Frame(f1, f2, f3)
    z = np.zeros(3) if z is None else np.asarray(z, dtype=float)
    nz = np.linalg.norm(z)
    f3 = z / nz if nz > 0 else np.array([1.0, 0.0, 0.0])
    k = _least_aligned_axis(f3)
    e = np.zeros(3)
    e[k] = 1.0
    f1 = e - np.dot(e, f3) * f3
    f1 /= np.linalg.norm(f1)
    f2 = np.cross(f3, f1)
    return Frame(f1, f2, f3)


# re-exported for callers that only need the backend singletons
BACKENDS = {"exact": EXACT, "float": FLOAT}


def state_from_json(obj: dict, exact: Optional[bool] = None):
    """Parse ``{u, b, S, a}`` (S as 6 upper-triangular entries) or
    ``{alpha, beta, M}`` (2D, M row-major) into a state.

    Strings ``"p/q"`` and integers give exact states; JSON floats give float
    states unless ``exact`` is forced.
    """
    if not isinstance(obj, dict):
        raise ValueError("state must be a JSON object")
    if {"u", "b", "S", "a"} <= obj.keys():
        u, b, S, a = obj["u"], obj["b"], obj["S"], obj["a"]
        if len(u) != 3 or len(b) != 3 or len(a) != 3 or len(S) not in (6, 9):
            raise ValueError("3D state needs u, b, a of length 3 and S of length 6")
        return State3D.from_values(u, b, S, a, exact=exact)
    if {"alpha", "beta", "M"} <= obj.keys():
        al, be, M = obj["alpha"], obj["beta"], obj["M"]
        if len(al) != len(be) or len(M) != len(al) ** 2 or len(al) not in (2, 3):
            raise ValueError("Elsasser state needs alpha, beta of length n and M of length n^2")
        if len(al) == 2:
            return State2D.from_values(al, be, M, exact=exact)
        return ElsasserState.from_values(al, be, M, exact=exact)
    raise ValueError("state must have keys {u, b, S, a} or {alpha, beta, M}")
