"""Sobolev conjugate of the hatted function by quadrature.

Above the splice level the defining integral of tau^{-(N+1)/N} times the
inverse function is computed after the substitution tau = S(x, t), which
turns it into

    int_ell^T  t S'(x,t) S(x,t)^{-(N+1)/N} dt,   T = S^{-1}(x, s),

so no root solve is needed inside the quadrature.  Panels are log-spaced
in t (hence in tau) and use 16-point Gauss-Legendre nodes.
"""

from __future__ import annotations

import numpy as np

from .coefficients import Coeffs
from .errors import AccuracyError, BracketOverflowError, DomainError
from .phi_functions import _dS, eval_S, eval_S_star_critical, inverse_S
from .reports import InequalityReport, combine, worst

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
QUAD_TOL = 1e-10
MAX_PANELS = 2**20
KNOT_RATIO = 2.0
MAX_KNOTS = 400


def _scalar_coeffs(c: Coeffs) -> Coeffs:
    if c.shape not in ((), (1,)):
        raise ValueError("the Sobolev conjugate is built at a single point x")
    return c if c.shape == () else c[0]


class SobolevConjugate:
    """S_* and its inverse at a fixed point x for splice level ``ell``."""

    def __init__(self, coeffs: Coeffs, ell: float, tol: float = QUAD_TOL, panel_factor: int = 1):
        if ell < 1:
            raise DomainError("splice level ell must be >= 1")
        self.c = _scalar_coeffs(coeffs)
        self.N = float(self.c.N)
        self.ell = float(ell)
        self.tol = tol
        self.panel_factor = panel_factor
        self.S_ell = float(eval_S(self.c, self.ell))
        if not self.S_ell > 0:
            raise DomainError("S(x, ell) must be positive")
        N = self.N
        self.splice_image = N * self.ell / (N - 1) * self.S_ell ** (-1.0 / N)
        self.knots = [self.ell]
        self.cumulative = [0.0]
        self.panels = [0]

    # integrand in u = log t:   t^2 S'(t) S(t)^{-(N+1)/N}
    def _integrand_u(self, t):
        S = eval_S(self.c, t)
        return t * t * _dS(self.c, t) * np.power(S, -(self.N + 1) / self.N)

    def _gl(self, lo, hi, n):
        """Composite GL over n equal panels in log t on [lo, hi] (vectorized in hi)."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        ulo, uhi = np.log(lo), np.log(hi)
        edges = ulo[..., None] + (uhi - ulo)[..., None] * np.arange(n + 1) / n
        a, b = edges[..., :-1], edges[..., 1:]
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        u = mid[..., None] + half[..., None] * GL_NODES
        vals = self._integrand_u(np.exp(u))
        return np.sum(half * np.sum(vals * GL_WEIGHTS, axis=-1), axis=-1)

    def _adaptive(self, lo, hi, scale):
        n = self.panel_factor
        prev = self._gl(lo, hi, n)
        while True:
            n *= 2
            if n > MAX_PANELS:
                raise AccuracyError("quadrature did not converge within 2^20 panels")
            cur = self._gl(lo, hi, n)
            if abs(cur - prev) <= self.tol * (scale + abs(cur)):
                return float(cur), n
            prev = cur

    def _extend(self):
        if len(self.knots) >= MAX_KNOTS:
            raise BracketOverflowError("conjugate table exceeded its knot budget")
        lo = self.knots[-1]
        hi = lo * KNOT_RATIO
        scale = self.splice_image + self.cumulative[-1]
        val, n = self._adaptive(lo, hi, scale)
        self.knots.append(hi)
        self.cumulative.append(self.cumulative[-1] + val)
        self.panels.append(n)

    def _cover_T(self, T_max):
        while self.knots[-1] < T_max:
            self._extend()

    def _F(self, T):
        """S_*^{-1} as a function of T = S^{-1}(s), for T >= ell."""
        T = np.asarray(T, dtype=float)
        self._cover_T(float(np.max(T)))
        knots = np.asarray(self.knots)
        k = np.clip(np.searchsorted(knots, T, side="right") - 1, 0, len(knots) - 2)
        n = max(self.panels[1:] or [2])
        base = self.splice_image + np.asarray(self.cumulative)[k]
        part = np.where(T > knots[k], self._gl(knots[k], np.maximum(T, knots[k]), n), 0.0)
        return base + part

    def inverse(self, s) -> np.ndarray:
        """S_*^{-1}(x, s)."""
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise DomainError("s must be >= 0")
        N = self.N
        near = self.ell / ((N - 1) / N * self.S_ell) * np.power(s, (N - 1) / N)
        above = s > self.S_ell
        if not np.any(above):
            return near
        T = inverse_S(self.c, np.where(above, s, self.S_ell))
        T = np.maximum(T, self.ell)
        return np.where(above, self._F(T), near)

    def value(self, t) -> np.ndarray:
        """S_*(x, t), the inverse of :meth:`inverse`."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("t must be >= 0")
        N = self.N
        near = (self.S_ell * (N - 1) / (N * self.ell)) ** (N / (N - 1)) * np.power(t, N / (N - 1))
        above = t > self.splice_image
        if not np.any(above):
            return near
        tmax = float(np.max(t))
        while self.splice_image + self.cumulative[-1] < tmax:
            self._extend()
        knots = np.asarray(self.knots)
        F_knots = self.splice_image + np.asarray(self.cumulative)
        tt = np.where(above, t, F_knots[0])
        k = np.clip(np.searchsorted(F_knots, tt, side="right") - 1, 0, len(knots) - 2)
        lo, hi = knots[k].copy(), knots[k + 1].copy()
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            up = self._F(mid) < tt
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
            if np.all(hi - lo <= 4 * np.finfo(float).eps * hi):
                break
        T = 0.5 * (lo + hi)
        return np.where(above, eval_S(self.c, T), near)

    def table(self, s_values) -> dict[str, np.ndarray]:
        s_values = np.asarray(s_values, dtype=float)
        inv = self.inverse(s_values)
        return {"s": s_values, "S_star_inv": inv, "t": inv, "S_star": self.value(inv)}

    def quadrature_drift(self, s_values) -> float:
        """Largest relative change of S_*^{-1} on ``s_values`` when panels double."""
        fine = SobolevConjugate(self.c, self.ell, self.tol, panel_factor=2 * self.panel_factor)
        a = self.inverse(s_values)
        b = fine.inverse(s_values)
        return float(np.max(np.abs(a - b) / np.abs(b)))


def conjugate_inverse(c: Coeffs, s, ell: float) -> np.ndarray:
    return SobolevConjugate(c, ell).inverse(s)


def conjugate_value(c: Coeffs, t, ell: float) -> np.ndarray:
    return SobolevConjugate(c, ell).value(t)


def a1_bound(c: Coeffs, t, ell: float, shifted: bool = True) -> np.ndarray:
    """Lower bound for S_* where a(x) > 0; equality when b(x) = 0."""
    c = _scalar_coeffs(c)
    N, p = float(c.N), float(c.p)
    pc = float(c.p_crit)
    a = float(c.a)
    t = np.asarray(t, dtype=float)
    if shifted:
        S_ell = float(eval_S(c, ell))
        shift = S_ell ** (-1.0 / N) * (pc * (S_ell / a) ** (1.0 / p) - N * ell / (N - 1))
        t = t + shift
    return (a ** (1.0 / p) / pc * t) ** pc


def a2_bound(c: Coeffs, t) -> np.ndarray:
    """The q-phase lower bound shape with unit constant."""
    c = _scalar_coeffs(c)
    q, s, b = float(c.q), float(c.s), float(c.b)
    qc = float(c.q_crit)
    t = np.asarray(t, dtype=float)
    return ((b ** (1.0 / q) / qc) * np.log1p(t) ** (s / q)) ** qc * t ** qc


def _t_grid(conj: SobolevConjugate, t_grid):
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < conj.splice_image * (1 - 1e-12)):
        raise DomainError("t_grid must start at the splice image S_*^{-1}(x, S(x, ell))")
    return t_grid


def check_lower_bounds(c: Coeffs, t_grid, ell: float, tol: float = 1e-8) -> InequalityReport:
    """Empirical inf of S_*/bound for the A1 and A2 regimes at the point x.

    A1 (a > 0): ratio must be >= 1.  A2 (b > 0, split by sign of s): the
    inf ratio is the unnamed constant C, reported and required positive.
    """
    c = _scalar_coeffs(c)
    conj = SobolevConjugate(c, ell)
    t = _t_grid(conj, t_grid)
    St = conj.value(t)
    parts = []
    if float(c.a) > 0:
        ratio = St / a1_bound(c, t, ell)
        plain = St / a1_bound(c, t, ell, shifted=False)
        parts.append(worst("A1", ratio - 1.0, {"t": t}, tol,
                           {"inf_ratio": float(np.min(ratio)), "max_ratio": float(np.max(ratio)),
                            "inf_ratio_unshifted": float(np.min(plain))}))
    if float(c.b) > 0:
        ratio = St / a2_bound(c, t)
        name = "A2_s_pos" if float(c.s) > 0 else "A2_s_nonpos"
        C = float(np.min(ratio))
        parts.append(worst(name, ratio, {"t": t}, 0.0, {"C": C}))
        parts[-1].worst_margin = C if C > 0 and np.isfinite(C) else -np.inf
    return combine("sobolev_lower_bounds", parts, tol)


def check_critical_comparison(c: Coeffs, t_grid, ell: float) -> InequalityReport:
    """inf over the grid of S_*(x,t) / S^*(x,t); must be strictly positive."""
    c = _scalar_coeffs(c)
    conj = SobolevConjugate(c, ell)
    t = _t_grid(conj, t_grid)
    ratio = conj.value(t) / eval_S_star_critical(c, t)
    inf = float(np.min(ratio))
    rep = worst("critical_comparison", ratio, {"t": t}, 0.0, {"inf_ratio": inf})
    rep.worst_margin = inf if inf > 0 else -np.inf
    return rep


def ell_stability(c: Coeffs, ell: float, t_grid) -> dict[str, float]:
    """Ratio range of S_* built with ell and 2 ell on t >= 2 * splice image."""
    c = _scalar_coeffs(c)
    one = SobolevConjugate(c, ell)
    two = SobolevConjugate(c, 2 * ell)
    t = np.asarray(t_grid, dtype=float)
    t = t[t >= 2 * max(one.splice_image, two.splice_image)]
    r = one.value(t) / two.value(t)
    return {"min_ratio": float(np.min(r)), "max_ratio": float(np.max(r))}
