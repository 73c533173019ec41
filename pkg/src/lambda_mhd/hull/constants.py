"""Smallness constants of the hull construction ladder."""

from __future__ import annotations

from dataclasses import dataclass

from ..numbers import Backend, EXACT, get_backend

__all__ = ["HullConstants", "hull_constants"]


@dataclass(frozen=True)
class HullConstants:
    """``c' >= c'' >= c''' >= c`` for given ``(tau, r, s)``.

    ``cprime = (1-tau)^2 r s / (4 (r+s+1)^2)``, ``cdprime = cprime^2 / 16``,
    ``ctprime = cdprime^4 / (1000 (r+s+1)^8)``, ``c = ctprime / 8``.
    Values are exact rationals on the exact backend.
    """

    tau: object
    r: object
    s: object
    cprime: object
    cdprime: object
    ctprime: object
    c: object
    backend: Backend = EXACT

    @property
    def br(self):
        """Largest admissible ``|b x|`` shift in the rank-one split."""
        return (1 - self.tau) * self.r / (2 * (self.r + self.s + 1))

    @property
    def bs(self):
        """Largest admissible ``|c y|`` shift in the rank-one split."""
        return (1 - self.tau) * self.s / (2 * (self.r + self.s + 1))

    def swapped(self) -> "HullConstants":
        """Constants with the roles of ``r`` and ``s`` exchanged (same values)."""
        return HullConstants(self.tau, self.s, self.r, self.cprime, self.cdprime,
                             self.ctprime, self.c, self.backend)

    def as_floats(self) -> dict:
        return {k: float(getattr(self, k)) for k in
                ("tau", "r", "s", "cprime", "cdprime", "ctprime", "c")}


def hull_constants(tau, r, s, backend="exact") -> HullConstants:
    """Evaluate the ladder of constants for ``0 <= tau < 1`` and ``r, s > 0``."""
    be = get_backend(backend)
    tau, r, s = be.num(tau), be.num(r), be.num(s)
    if not (0 <= tau < 1):
        raise ValueError("tau must lie in [0, 1)")
    if r <= 0 or s <= 0:
        raise ValueError("r and s must be positive")
    w = r + s + 1
    cp = (1 - tau) ** 2 * r * s / (4 * w ** 2)
    cdp = cp ** 2 / 16
    ctp = cdp ** 4 / (1000 * w ** 8)
    return HullConstants(tau, r, s, cp, cdp, ctp, ctp / 8, be)
