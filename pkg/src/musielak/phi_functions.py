"""Pointwise generalized Phi-functions of the log double phase problem.

Every function takes a :class:`Coeffs` (values frozen at one or many points)
and an array argument; both broadcast together.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .coefficients import Coeffs
from .errors import AccuracyError, BracketOverflowError, DomainError, SingularPointError

LOG2 = np.log(2.0)
TINY = 1e-300
BRACKET_CAP = 1e30
MAX_BISECT = 200


def _check_nonneg(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise DomainError("argument must be >= 0")
    return t


def _power_log(t, k, e):
    """t^k * log(1+t)^e for t > 0, robust to overflow/underflow."""
    with np.errstate(all="ignore"):
        L = np.log1p(t)
        v = np.power(t, k) * np.power(L, e)
        bad = ~np.isfinite(v) | ((v == 0) & (t > 0))
        if np.any(bad):
            lt = np.log(np.maximum(t, TINY))
            ll = np.log(np.maximum(L, TINY))
            alt = np.exp(k * lt + e * ll)
            v = np.where(bad, alt, v)
    return v


def _pow(t, k):
    with np.errstate(all="ignore"):
        return np.power(t, k)


def _zero_at_origin(t, v):
    return np.where(t > 0, v, 0.0)


# ---------------------------------------------------------------- S itself

def eval_S(c: Coeffs, t) -> np.ndarray:
    """a t^p + b t^q log^s(1+t), with S(x, 0) = 0."""
    t = _check_nonneg(t)
    tt = np.maximum(t, TINY)
    v = c.a * _pow(tt, c.p) + c.b * _power_log(tt, c.q, c.s)
    return _zero_at_origin(t, v)


def _dS(c: Coeffs, t):
    tt = np.maximum(t, TINY)
    L = np.log1p(tt)
    bracket = c.q * L + c.s * tt / (1 + tt)
    v = c.a * c.p * _pow(tt, c.p - 1) + c.b * _power_log(tt, c.q - 1, c.s - 1) * bracket
    return _zero_at_origin(t, v)


def _singular_at_zero(c: Coeffs):
    a = np.broadcast_to(c.a, c.shape)
    b = np.broadcast_to(c.b, c.shape)
    return ((a > 0) & (c.p < 2)) | ((b > 0) & (c.q + c.s < 2))


def _guard_zero(c, t):
    t = _check_nonneg(t)
    at0 = np.broadcast_to(t == 0, np.broadcast_shapes(t.shape, c.shape))
    if np.any(at0 & np.broadcast_to(_singular_at_zero(c), at0.shape)):
        raise SingularPointError("derivative at t=0 with p<2 or q+s<2; use one-sided limits")
    return t


def eval_dS(c: Coeffs, t) -> np.ndarray:
    """dS/dt = a p t^{p-1} + b t^{q-1} log^{s-1}(1+t) [q log(1+t) + s t/(1+t)]."""
    t = _guard_zero(c, t)
    return _dS(c, t)


def eval_d2S(c: Coeffs, t) -> np.ndarray:
    """Second derivative in t, written with the bracket M of the convexity proof."""
    t = _guard_zero(c, t)
    tt = np.maximum(t, TINY)
    L = np.log1p(tt)
    w = tt / (1 + tt)
    M = (c.q * (c.q - 1) * L**2 + 2 * c.q * c.s * L * w
         + c.s * (c.s - 1) * w**2 - c.s * L * w**2)
    v = c.a * c.p * (c.p - 1) * _pow(tt, c.p - 2) + c.b * _power_log(tt, c.q - 2, c.s - 2) * M
    # limits at t = 0 in the non-singular case
    lim = np.where(c.p == 2, 2 * c.a, 0.0) + np.where(c.q + c.s == 2, 2 * c.b, 0.0)
    return np.where(t > 0, v, lim)


# ---------------------------------------------------------------- hatted S

def eval_S_hat(c: Coeffs, t, ell: float) -> np.ndarray:
    """Linear splice t S(x, ell)/ell below ell, S above."""
    if ell < 1:
        raise DomainError("splice level ell must be >= 1")
    t = _check_nonneg(t)
    S_ell = eval_S(c, np.asarray(ell, dtype=float))
    return np.where(t <= ell, t * S_ell / ell, eval_S(c, t))


def _dS_hat(c: Coeffs, t, ell):
    S_ell = eval_S(c, np.asarray(ell, dtype=float))
    return np.where(t < ell, S_ell / ell, _dS(c, t))


# ---------------------------------------------------------------- critical and subcritical

def eval_S_star_critical(c: Coeffs, t) -> np.ndarray:
    """(a^{1/p} t)^{p*} + ((b log^s(1+t))^{1/q} t)^{q*}."""
    t = _check_nonneg(t)
    tt = np.maximum(t, TINY)
    pc, qc = c.p_crit, c.q_crit
    v = _pow(c.a, pc / c.p) * _pow(tt, pc) + _pow(c.b, qc / c.q) * _power_log(tt, qc, c.s * qc / c.q)
    return _zero_at_origin(t, v)


def eval_dS_star_critical(c: Coeffs, t) -> np.ndarray:
    t = _check_nonneg(t)
    tt = np.maximum(t, TINY)
    pc, qc = c.p_crit, c.q_crit
    e = c.s * qc / c.q
    L = np.log1p(tt)
    v = (pc * _pow(c.a, pc / c.p) * _pow(tt, pc - 1)
         + _pow(c.b, qc / c.q) * _power_log(tt, qc - 1, e - 1) * (qc * L + e * tt / (1 + tt)))
    return _zero_at_origin(t, v)


def eval_S_star_sub(c: Coeffs, t) -> np.ndarray:
    """(a^{1/p} t)^{p_star} + ((b log^{s_star}(1+t))^{1/q} t)^{q_star}."""
    c.require_subcritical()
    t = _check_nonneg(t)
    tt = np.maximum(t, TINY)
    ps, qs = c.p_star, c.q_star
    v = (_pow(c.a, ps / c.p) * _pow(tt, ps)
         + _pow(c.b, qs / c.q) * _power_log(tt, qs, c.s_star * qs / c.q))
    return _zero_at_origin(t, v)


# ---------------------------------------------------------------- densities and integrands

def density_M(c: Coeffs, r) -> np.ndarray:
    """a/p r^p + b/q r^q log^s(1+r) for r = |xi| >= 0."""
    r = _check_nonneg(r)
    rr = np.maximum(r, TINY)
    v = c.a / c.p * _pow(rr, c.p) + c.b / c.q * _power_log(rr, c.q, c.s)
    return _zero_at_origin(r, v)


def density_M_critical(c: Coeffs, r) -> np.ndarray:
    """Critical density with 1/p*, 1/q* weights."""
    r = _check_nonneg(r)
    rr = np.maximum(r, TINY)
    pc, qc = c.p_crit, c.q_crit
    v = (_pow(c.a, pc / c.p) * _pow(rr, pc) / pc
         + _pow(c.b, qc / c.q) * _power_log(rr, qc, c.s * qc / c.q) / qc)
    return _zero_at_origin(r, v)


def density_M_sub(c: Coeffs, r) -> np.ndarray:
    """Subcritical density with 1/p_star, 1/q_star weights."""
    c.require_subcritical()
    r = _check_nonneg(r)
    rr = np.maximum(r, TINY)
    ps, qs = c.p_star, c.q_star
    v = (_pow(c.a, ps / c.p) * _pow(rr, ps) / ps
         + _pow(c.b, qs / c.q) * _power_log(rr, qs, c.s_star * qs / c.q) / qs)
    return _zero_at_origin(r, v)


def flux_coefficient(c: Coeffs, r) -> np.ndarray:
    """g(r) with flux(xi) = g(|xi|) xi; zero at r = 0."""
    r = np.asarray(r, dtype=float)
    rr = np.maximum(r, TINY)
    L = np.log1p(rr)
    v = (c.a * _pow(rr, c.p - 2)
         + c.b * _power_log(rr, c.q - 2, c.s - 1) * (L + c.s / c.q * rr / (1 + rr)))
    return _zero_at_origin(r, v)


def flux(c: Coeffs, xi) -> np.ndarray:
    """a|xi|^{p-2}xi + b|xi|^{q-2}log^{s-1}(1+|xi|)[log(1+|xi|) + (s/q)|xi|/(1+|xi|)]xi."""
    xi = np.asarray(xi, dtype=float)
    r = np.linalg.norm(xi, axis=-1)
    return flux_coefficient(c, r)[..., None] * xi


def _reaction(t, wa, k, wb, j, e, ratio):
    u = np.abs(t)
    uu = np.maximum(u, TINY)
    L = np.log1p(uu)
    corr = 1.0 + ratio * uu / (L * (1 + uu))
    v = wa * _pow(uu, k - 1) + wb * _power_log(uu, j - 1, e) * corr
    return np.where(u > 0, np.sign(t) * v, 0.0)


def reaction_critical(c: Coeffs, t) -> np.ndarray:
    """Derivative in u of the critical density at u = t (signed)."""
    t = np.asarray(t, dtype=float)
    pc, qc = c.p_crit, c.q_crit
    return _reaction(t, _pow(c.a, pc / c.p), pc, _pow(c.b, qc / c.q), qc,
                     c.s * qc / c.q, c.s / c.q)


def reaction_sub(c: Coeffs, t) -> np.ndarray:
    """Derivative in u of the subcritical density at u = t (signed)."""
    c.require_subcritical()
    t = np.asarray(t, dtype=float)
    ps, qs = c.p_star, c.q_star
    return _reaction(t, _pow(c.a, ps / c.p), ps, _pow(c.b, qs / c.q), qs,
                     c.s_star * qs / c.q, c.s_star / c.q)


# ---------------------------------------------------------------- sub-multiplicative functions

def log_growth_constant(delta) -> np.ndarray:
    """C(delta) = sup_{z >= 1} log(1+z) z^{-delta}."""
    delta = np.asarray(delta, dtype=float)
    out = np.empty(delta.shape)
    flat = delta.ravel()
    res = out.ravel()
    cache: dict[float, float] = {}
    for i, d in enumerate(flat):
        d = float(d)
        if d not in cache:
            cache[d] = _log_growth_scalar(d)
        res[i] = cache[d]
    return res.reshape(delta.shape)


def _log_growth_scalar(d: float) -> float:
    if d <= 0:
        return np.inf
    # stationarity of log log(1+z) - d log z in u = log z
    def g(u):
        z = np.exp(u)
        return z / ((1 + z) * np.log1p(z)) - d
    if g(0.0) <= 0:
        return LOG2
    hi = 1.0
    while g(hi) > 0:
        hi *= 2
        if hi > 1e4:
            raise BracketOverflowError("log growth constant bracket")
    u = brentq(g, 0.0, hi, xtol=1e-14, rtol=1e-14)
    return float(np.log1p(np.exp(u)) * np.exp(-d * u))


def eval_M_eps(c: Coeffs, z, eps: float) -> np.ndarray:
    """z^{m_-} for z < 1 and z^{n_eps} for z >= 1."""
    z = _check_nonneg(z)
    m_minus = np.minimum(c.p, c.q + np.minimum(c.s, 0.0))
    n_eps = np.maximum(c.p, c.q + eps)
    return np.where(z < 1, _pow(z, m_minus), _pow(z, n_eps))


def M_eps_log(c: Coeffs, z, eps: float) -> np.ndarray:
    """Four-branch logarithmic factor; the s<0 branch uses C(eps q / (|s| q*))."""
    z = _check_nonneg(z)
    qc = c.q_crit
    e = c.s * qc / c.q
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(c.s < 0, eps / np.where(e != 0, np.abs(e), 1.0), 1.0)
    C = log_growth_constant(np.broadcast_to(delta, np.shape(delta)))
    with np.errstate(all="ignore"):
        pos_lo = np.power(np.log1p(z), e)
        pos_hi = np.power(LOG2, e) * np.power(z, eps)
        neg_hi = np.power(C / LOG2, e) * np.power(z, -eps)
    pos = np.where(z <= 1, pos_lo, pos_hi)
    neg = np.where(z <= 1, 1.0, neg_hi)
    return np.where(c.s >= 0, pos, neg)


def eval_M_eps_star(c: Coeffs, z, eps: float) -> np.ndarray:
    """min{z^{p*}, z^{q*} M_{eps,log}(z)}, zero at z = 0."""
    z = _check_nonneg(z)
    zz = np.maximum(z, TINY)
    with np.errstate(all="ignore"):
        second = np.power(zz, c.q_crit) * M_eps_log(c, zz, eps)
    v = np.minimum(np.power(zz, c.p_crit), second)
    return _zero_at_origin(z, v)


# ---------------------------------------------------------------- inverses and conjugates

def bisect_increasing(f, y, hi0: float = 1.0, cap: float = BRACKET_CAP,
                      rtol: float = 1e-14, max_iter: int = MAX_BISECT) -> np.ndarray:
    """Vectorized min{t >= 0 : f(t) >= y} for increasing f with f(0) = 0.

    The bracket [0, hi] grows by doubling from ``hi0``; bisection stops per
    element at floating-point resolution or when |f(t) - y| <= rtol * y.
    """
    y = np.asarray(y, dtype=float)
    lo = np.zeros(y.shape)
    hi = np.full(y.shape, float(hi0))
    while True:
        short = f(hi) < y
        if not np.any(short):
            break
        if np.any(hi[short] > cap):
            raise BracketOverflowError(f"bracket exceeded {cap:g}")
        hi = np.where(short, hi * 2.0, hi)
    # already at or above y just right of 0: the answer is 0
    at_zero = f(np.full(y.shape, TINY)) >= y
    hi = np.where(at_zero, TINY, hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        up = fm < y
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
        done = ((hi - lo <= 2 * np.finfo(float).eps * hi) | (np.abs(fm - y) <= rtol * y)
                | (y <= 0) | (hi <= TINY))
        if np.all(done):
            break
    else:
        raise AccuracyError("bisection did not converge")
    fh = f(hi)
    return np.where(y > 0, np.where(np.abs(fh - y) <= np.abs(f(lo) - y), hi, lo), 0.0)


_VALUE = {
    "S": lambda ev, t: eval_S(ev.coeffs, t),
    "S_hat": lambda ev, t: eval_S_hat(ev.coeffs, t, ev.ell),
    "S_star_critical": lambda ev, t: eval_S_star_critical(ev.coeffs, t),
    "S_star_sub": lambda ev, t: eval_S_star_sub(ev.coeffs, t),
    "M_eps": lambda ev, t: eval_M_eps(ev.coeffs, t, ev.eps),
    "M_eps_star": lambda ev, t: eval_M_eps_star(ev.coeffs, t, ev.eps),
}

_DERIV = {
    "S": lambda ev, t: _dS(ev.coeffs, t),
    "S_hat": lambda ev, t: _dS_hat(ev.coeffs, t, ev.ell),
    "S_star_critical": lambda ev, t: eval_dS_star_critical(ev.coeffs, t),
}

KINDS = tuple(_VALUE) + ("conjugate",)


class PhiEvaluator:
    """A Phi-function of a given kind with value, derivative, inverse, conjugate.

    ``kind="conjugate"`` wraps another evaluator ``base`` and evaluates its
    convex conjugate.
    """

    def __init__(self, kind: str, coeffs: Coeffs, ell: float | None = None,
                 eps: float | None = None, base: "PhiEvaluator | None" = None):
        if kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
        if kind == "S_hat" and ell is None:
            raise ValueError("S_hat needs a splice level ell")
        if kind in ("M_eps", "M_eps_star") and not (eps is not None and 0 < eps < 1):
            raise ValueError("M_eps kinds need eps in (0, 1)")
        if kind == "conjugate" and base is None:
            raise ValueError("conjugate kind needs a base evaluator")
        self.kind, self.coeffs, self.ell, self.eps, self.base = kind, coeffs, ell, eps, base

    def value(self, t) -> np.ndarray:
        if self.kind == "conjugate":
            return conjugate(self.base, t)
        return _VALUE[self.kind](self, np.asarray(t, dtype=float))

    @property
    def has_derivative(self) -> bool:
        return self.kind in _DERIV

    def derivative(self, t) -> np.ndarray:
        if not self.has_derivative:
            raise NotImplementedError(f"no derivative for kind {self.kind}")
        return _DERIV[self.kind](self, _check_nonneg(t))

    def inverse(self, y) -> np.ndarray:
        return inverse_S(self, y)

    def conjugate(self, s) -> np.ndarray:
        return conjugate(self, s)


def inverse_S(phi: PhiEvaluator | Coeffs, y) -> np.ndarray:
    """phi^{-1}(y) = inf{t >= 0 : phi(t) >= y} by bracketed bisection."""
    if isinstance(phi, Coeffs):
        phi = PhiEvaluator("S", phi)
    y = _check_nonneg(y)
    shape = np.broadcast_shapes(y.shape, phi.coeffs.shape)
    y = np.broadcast_to(y, shape).astype(float)
    return bisect_increasing(phi.value, y)


def conjugate(phi: PhiEvaluator, s) -> np.ndarray:
    """phi^#(s) = sup_{t >= 0} (t s - phi(t)).

    With a derivative available the maximizer is the smallest t with
    phi'(t) >= s (bisection); otherwise golden-section search is used.
    """
    s = _check_nonneg(s)
    shape = np.broadcast_shapes(s.shape, phi.coeffs.shape)
    s = np.broadcast_to(s, shape).astype(float)
    if phi.has_derivative:
        t_star = bisect_increasing(phi.derivative, s, rtol=0.0)
    else:
        t_star = _golden_argmax(phi, s)
    val = t_star * s - phi.value(t_star)
    return np.maximum(val, 0.0)


def _golden_argmax(phi: PhiEvaluator, s):
    out = np.empty(s.shape)
    coeffs = phi.coeffs
    for idx in np.ndindex(s.shape):
        sub = PhiEvaluator(phi.kind, coeffs[idx] if coeffs.shape else coeffs,
                           phi.ell, phi.eps, phi.base)
        si = float(s[idx])
        if si == 0:
            out[idx] = 0.0
            continue
        hi = 1.0
        while hi * si - float(sub.value(hi)) > 0 or hi < 2:
            hi *= 2
            if hi > BRACKET_CAP:
                raise BracketOverflowError("conjugate supremum unbounded within cap")
        res = minimize_scalar(lambda t: float(sub.value(t)) - t * si, bounds=(0.0, hi),
                              method="bounded", options={"xatol": 1e-12 * hi})
        out[idx] = res.x
    return out
