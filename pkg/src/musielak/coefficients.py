"""Exponent and weight values frozen at a set of points."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, CriticalExponentError


def _arr(v):
    return None if v is None else np.asarray(v, dtype=float)


def sobolev_exponent(r, N):
    """Critical exponent N r / (N - r); requires r < N."""
    r = np.asarray(r, dtype=float)
    if np.any(r >= N):
        raise CriticalExponentError(f"exponent reaches N={N}; Sobolev exponent undefined")
    return N * r / (N - r)


@dataclass(frozen=True)
class Coeffs:
    """Pointwise values of a, b, p, q, s (and optionally the subcritical
    p_star, q_star, s_star) together with the ambient dimension N.

    Arrays broadcast against the ``t`` arguments of the pointwise functions,
    so a single point is just a set of 0-d arrays.
    """

    a: np.ndarray
    b: np.ndarray
    p: np.ndarray
    q: np.ndarray
    s: np.ndarray
    N: float = 3.0
    p_star: np.ndarray | None = None
    q_star: np.ndarray | None = None
    s_star: np.ndarray | None = None
    points: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for name in ("a", "b", "p", "q", "s", "p_star", "q_star", "s_star"):
            object.__setattr__(self, name, _arr(getattr(self, name)))

    @classmethod
    def constant(cls, p=2.0, q=2.0, s=0.0, a=1.0, b=1.0, N=3, p_star=None, q_star=None, s_star=None):
        return cls(a=a, b=b, p=p, q=q, s=s, N=float(N), p_star=p_star, q_star=q_star, s_star=s_star)

    @property
    def has_subcritical(self) -> bool:
        return self.p_star is not None and self.q_star is not None and self.s_star is not None

    def require_subcritical(self):
        if not self.has_subcritical:
            raise ConfigError("subcritical fields p_star, q_star, s_star are not configured")

    @property
    def p_crit(self) -> np.ndarray:
        return sobolev_exponent(self.p, self.N)

    @property
    def q_crit(self) -> np.ndarray:
        return sobolev_exponent(self.q, self.N)

    def __getitem__(self, idx) -> "Coeffs":
        """Restrict every array to ``idx`` (an index or index array)."""
        def pick(v):
            return None if v is None else np.broadcast_to(v, self.shape)[idx]
        pts = None if self.points is None else self.points[idx]
        return replace(self, a=pick(self.a), b=pick(self.b), p=pick(self.p), q=pick(self.q),
                       s=pick(self.s), p_star=pick(self.p_star), q_star=pick(self.q_star),
                       s_star=pick(self.s_star), points=pts)

    @property
    def shape(self):
        arrs = [self.a, self.b, self.p, self.q, self.s]
        if self.has_subcritical:
            arrs += [self.p_star, self.q_star, self.s_star]
        return np.broadcast_shapes(*(v.shape for v in arrs))

    def expand(self, axis_len: int) -> "Coeffs":
        """Append a trailing axis so values broadcast against (n, axis_len) grids."""
        def up(v):
            return None if v is None else v[..., None]
        return replace(self, a=up(self.a), b=up(self.b), p=up(self.p), q=up(self.q), s=up(self.s),
                       p_star=up(self.p_star), q_star=up(self.q_star), s_star=up(self.s_star))
