"""Problem data (p, q, s, a, b, N, domain) and hypothesis validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .coefficients import Coeffs, sobolev_exponent
from .errors import ConfigError, CriticalExponentError, HypothesisInconsistencyError
from .expressions import DerivedField, ScalarField

DEFAULT_RES_1D = 10_000
DEFAULT_RES_2D = 256
CONSTANT_SLACK = 1e-9


@dataclass(frozen=True)
class Domain:
    """Unit interval (dim=1) or unit square (dim=2)."""

    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"domain dimension must be 1 or 2, got {self.dim}")

    def default_resolution(self) -> int:
        return DEFAULT_RES_1D if self.dim == 1 else DEFAULT_RES_2D

    def grid(self, resolution: int | None = None) -> np.ndarray:
        n = resolution or self.default_resolution()
        if n < 2:
            raise ValueError("grid_resolution must be >= 2")
        xs = np.linspace(0.0, 1.0, n)
        if self.dim == 1:
            return xs
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])


def _field(value, name, dim):
    if value is None:
        return None
    if isinstance(value, ScalarField):
        return value
    return ScalarField(value, name, dim)


class ProblemData:
    """Exponent and weight fields of the log double phase problem.

    ``N`` is the ambient dimension entering the Sobolev exponents; it is
    independent of the mesh dimension of ``domain``.
    """

    def __init__(self, p, q, s, a, b, N: int = 3, domain: Domain | int = 1,
                 p_star=None, q_star=None, s_star=None,
                 r: float | None = None, d: float | None = None,
                 ell: float | None = None, regime: str | None = None):
        self.domain = domain if isinstance(domain, Domain) else Domain(int(domain))
        dim = self.domain.dim
        if int(N) != N or N < 2:
            raise ConfigError(f"N must be an integer >= 2, got {N}")
        self.N = int(N)
        self.p = _field(p, "p", dim)
        self.q = _field(q, "q", dim)
        self.s = _field(s, "s", dim)
        self.a = _field(a, "a", dim)
        self.b = _field(b, "b", dim)
        self.p_star = _field(p_star, "p_star", dim)
        self.q_star = _field(q_star, "q_star", dim)
        self.s_star = _field(s_star, "s_star", dim)
        sub = [f is not None for f in (self.p_star, self.q_star, self.s_star)]
        if any(sub) and not all(sub):
            raise ConfigError("subcritical data needs all of p_star, q_star, s_star")
        if regime not in (None, "sub", "sup"):
            raise ConfigError(f"regime must be 'sub' or 'sup', got {regime!r}")
        self.regime = regime
        self._r = r
        self._d = d
        self.ell = ell

    @property
    def has_subcritical(self) -> bool:
        return self.p_star is not None

    def fields(self) -> dict[str, ScalarField]:
        out = {"p": self.p, "q": self.q, "s": self.s, "a": self.a, "b": self.b}
        if self.has_subcritical:
            out.update(p_star=self.p_star, q_star=self.q_star, s_star=self.s_star)
        return out

    def coefficients(self, points) -> Coeffs:
        """Evaluate every field at ``points``."""
        pts = np.asarray(points, dtype=float)
        vals = {k: f.evaluate(pts) for k, f in self.fields().items()}
        if self.domain.dim == 1 and pts.ndim == 0:
            vals = {k: v.reshape(()) for k, v in vals.items()}
        return Coeffs(N=float(self.N), points=pts, **vals)

    def at(self, x) -> Coeffs:
        """Coefficients at a single point (0-d arrays)."""
        pts = np.atleast_1d(np.asarray(x, dtype=float))
        if self.domain.dim == 2:
            pts = pts.reshape(1, 2)
        c = self.coefficients(pts)
        return c[0]

    @cached_property
    def _default_scan(self) -> Coeffs:
        return self.coefficients(self.domain.grid())

    @property
    def r(self) -> float:
        """Uniform lower bound for q+s (and q_star+s_star when present)."""
        if self._r is not None:
            return float(self._r)
        c = self._default_scan
        lo = np.min(c.q + c.s)
        if self.has_subcritical:
            lo = min(lo, np.min(c.q_star + c.s_star))
        return float(lo) - CONSTANT_SLACK

    @property
    def d(self) -> float:
        """Uniform lower bound for a+b."""
        if self._d is not None:
            return float(self._d)
        c = self._default_scan
        return float(np.min(c.a + c.b)) - CONSTANT_SLACK

    def default_ell(self, eps: float | None = None, zeta: float = 0.5) -> float:
        """Splice level used by the hatted function when none is configured."""
        if self.ell is not None:
            return float(self.ell)
        c = self._default_scan
        if eps is None:
            try:
                eps = pick_epsilon(self)
            except HypothesisInconsistencyError:
                eps = 0.01
        h1 = np.maximum(c.p, c.q + eps)
        s_plus = max(float(np.max(c.s)), 0.0)
        q_crit_plus = max(float(np.max(sobolev_exponent(c.q, self.N))), 0.0)
        expo = s_plus * q_crit_plus / (self.r * float(np.min(h1)) * (1.0 - zeta))
        return float(max(np.e - 1.0, np.expm1(expo) ** float(np.max(h1))))


@dataclass
class HypothesisEntry:
    hypothesis: str
    passed: bool
    worst_point: list | None
    margin: float

    def to_dict(self) -> dict:
        return {"hypothesis": self.hypothesis, "pass": bool(self.passed),
                "worst_point": self.worst_point, "margin": float(self.margin)}


@dataclass
class HypothesisReport:
    entries: list[HypothesisEntry]
    r: float
    d: float
    grid_resolution: int
    lipschitz: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def __getitem__(self, name: str) -> HypothesisEntry:
        for e in self.entries:
            if e.hypothesis == name:
                return e
        raise KeyError(name)

    def names(self) -> list[str]:
        return [e.hypothesis for e in self.entries]

    def to_list(self) -> list[dict]:
        return [e.to_dict() for e in self.entries]

    def to_json(self) -> str:
        return json.dumps(self.to_list(), indent=2)


def _point(points, i):
    pt = np.asarray(points)[i]
    return [float(v) for v in np.atleast_1d(pt)]


def _pointwise(name, margins, points, strict):
    i = int(np.argmin(margins))
    m = float(margins[i])
    ok = m > 0 if strict else m >= 0
    return HypothesisEntry(name, ok, _point(points, i), m)


def _scalar(name, margin, strict):
    ok = margin > 0 if strict else margin >= 0
    return HypothesisEntry(name, ok, None, float(margin))


def _crit_or_inf(r, N):
    r = np.asarray(r, dtype=float)
    out = np.full(r.shape, np.inf)
    ok = r < N
    out[ok] = N * r[ok] / (N - r[ok])
    return out


def _lipschitz(values, points, dim):
    """Largest finite-difference slope along grid lines."""
    if dim == 1:
        h = points[1] - points[0]
        return float(np.max(np.abs(np.diff(values))) / h) if values.size > 1 else 0.0
    n = int(round(np.sqrt(values.size)))
    v = values.reshape(n, n)
    h = 1.0 / (n - 1)
    return float(max(np.max(np.abs(np.diff(v, axis=0))), np.max(np.abs(np.diff(v, axis=1)))) / h)


def sandwich_margins(c: Coeffs) -> dict[str, float]:
    """Right minus left side of the two sandwich conditions on a scan."""
    q_low = np.min(c.q + np.minimum(c.s, 0.0))
    q_high = np.max(c.q + np.maximum(c.s, 0.0))
    p_lo, p_hi = np.min(c.p), np.max(c.p)
    out = {}
    if c.has_subcritical:
        star_hi = np.max(c.q_star + np.maximum(c.s_star, 0.0) * c.q_star / c.q)
        star_lo = np.min(c.q_star + np.minimum(c.s_star, 0.0) * c.q_star / c.q)
        out["sub"] = float(min(p_lo, q_low) - max(np.max(c.p_star), star_hi))
        out["sup"] = float(min(np.min(c.p_star), star_lo) - max(p_hi, q_high))
    return out


def validate_hypotheses(data: ProblemData, grid_resolution: int | None = None) -> HypothesisReport:
    """Check every hypothesis on a dense grid.

    Strict inequalities pass with margin > 0, non-strict ones with margin >= 0.
    """
    if grid_resolution is not None and grid_resolution < 2:
        raise ValueError("grid_resolution must be >= 2")
    res = grid_resolution or data.domain.default_resolution()
    pts = data.domain.grid(res)
    c = data.coefficients(pts)
    N = data.N
    r, d = data.r, data.d
    E = []
    E.append(_pointwise("H0.p>1", c.p - 1.0, pts, True))
    E.append(_pointwise("H0.p<N", N - c.p, pts, True))
    E.append(_pointwise("H0.q>1", c.q - 1.0, pts, True))
    E.append(_pointwise("H0.q<N", N - c.q, pts, True))
    E.append(_scalar("H0.r>1", r - 1.0, True))
    E.append(_pointwise("H0.q+s>=r", c.q + c.s - r, pts, False))
    E.append(_pointwise("H0.a>=0", c.a, pts, False))
    E.append(_pointwise("H0.b>=0", c.b, pts, False))
    E.append(_scalar("H0.d>0", d, True))
    E.append(_pointwise("H0.a+b>=d", c.a + c.b - d, pts, False))
    ratio = np.maximum(c.p, c.q) / np.minimum(c.p, c.q)
    E.append(_pointwise("H1.ratio", 1.0 + 1.0 / N - ratio, pts, True))
    if data.has_subcritical:
        E.append(_pointwise("Hstar.p_star>1", c.p_star - 1.0, pts, True))
        E.append(_pointwise("Hstar.p_star<N", N - c.p_star, pts, True))
        E.append(_pointwise("Hstar.q_star>1", c.q_star - 1.0, pts, True))
        E.append(_pointwise("Hstar.q_star<N", N - c.q_star, pts, True))
        E.append(_pointwise("Hstar.p_star<p_crit", _crit_or_inf(c.p, N) - c.p_star, pts, True))
        E.append(_pointwise("Hstar.q_star<q_crit", _crit_or_inf(c.q, N) - c.q_star, pts, True))
        E.append(_pointwise("Hstar.s_star<s", c.s - c.s_star, pts, True))
        E.append(_pointwise("Hstar.q_star+s_star>=r", c.q_star + c.s_star - r, pts, False))
        sw = sandwich_margins(c)
        if data.regime == "sub":
            E.append(_pointwise("Hstar_sub.p_star<p", c.p - c.p_star, pts, True))
            E.append(_pointwise("Hstar_sub.q_star<q", c.q - c.q_star, pts, True))
            E.append(_scalar("sandwich_sub", sw["sub"], True))
        elif data.regime == "sup":
            E.append(_pointwise("Hstar_sup.p<=p_star", c.p_star - c.p, pts, False))
            E.append(_pointwise("Hstar_sup.q<=q_star", c.q_star - c.q, pts, False))
            E.append(_pointwise("Hstar_sup.s_star<=s", c.s - c.s_star, pts, False))
            E.append(_pointwise("Hstar_sup.q_star+s_star>r", c.q_star + c.s_star - r, pts, True))
            E.append(_scalar("sandwich_sup", sw["sup"], True))
    lip = {k: _lipschitz(getattr(c, k), pts, data.domain.dim) for k in data.fields()}
    return HypothesisReport(E, r, d, res, lip)


@dataclass
class ExponentSummary:
    """Extremal exponents from a grid scan plus pointwise exponent fields."""

    eps: float
    p_minus: float
    p_plus: float
    q_minus: float
    q_plus: float
    s_minus: float
    s_plus: float
    ell_minus: float
    ell_plus: float
    points: np.ndarray
    fields: dict[str, DerivedField]

    def __getattr__(self, name):
        f = self.__dict__.get("fields", {})
        if name in f:
            return f[name]
        raise AttributeError(name)


def _exponent_fields(data: ProblemData, eps: float) -> dict[str, DerivedField]:
    N, dim = data.N, data.domain.dim

    def wrap(fn, name):
        def g(pts):
            return fn(data.coefficients(pts))
        return DerivedField(g, name, dim)

    def pc(c):
        return sobolev_exponent(c.p, N)

    def qc(c):
        return sobolev_exponent(c.q, N)

    return {
        "m_minus": wrap(lambda c: np.minimum(c.p, c.q + np.minimum(c.s, 0.0)), "m_minus"),
        "n_plus": wrap(lambda c: np.maximum(c.p, c.q + np.maximum(c.s, 0.0)), "n_plus"),
        "m_eps": wrap(lambda c: np.minimum(c.p, c.q + eps), "m_eps"),
        "n_eps": wrap(lambda c: np.maximum(c.p, c.q + eps), "n_eps"),
        "m_star_eps": wrap(lambda c: np.minimum(pc(c), qc(c) + eps), "m_star_eps"),
        "n_star_eps": wrap(lambda c: np.maximum(pc(c), qc(c) + eps), "n_star_eps"),
        "m_star_minus": wrap(lambda c: np.minimum(pc(c), qc(c) * (1 + np.minimum(c.s, 0.0) / c.q)),
                             "m_star_minus"),
        "n_star_plus": wrap(lambda c: np.maximum(pc(c), qc(c) * (1 + np.maximum(c.s, 0.0) / c.q)),
                            "n_star_plus"),
        "p_crit": wrap(pc, "p_crit"),
        "q_crit": wrap(qc, "q_crit"),
    }


def exponent_summary(data: ProblemData, eps: float = 0.0, grid_resolution: int | None = None) -> ExponentSummary:
    """Scan extremal exponents; ``ell_minus``/``ell_plus`` drive norm-modular bounds."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    pts = data.domain.grid(grid_resolution)
    c = data.coefficients(pts)
    if np.any(c.p >= data.N) or np.any(c.q >= data.N):
        raise CriticalExponentError("p(x) or q(x) reaches N; critical exponents undefined")
    low = c.q + np.minimum(c.s, 0.0)
    high = c.q + np.maximum(c.s, 0.0)
    return ExponentSummary(
        eps=eps,
        p_minus=float(np.min(c.p)), p_plus=float(np.max(c.p)),
        q_minus=float(np.min(c.q)), q_plus=float(np.max(c.q)),
        s_minus=float(np.min(c.s)), s_plus=float(np.max(c.s)),
        ell_minus=float(min(np.min(c.p), np.min(low))),
        ell_plus=float(max(np.max(c.p), np.max(high))),
        points=pts, fields=_exponent_fields(data, eps),
    )


def critical_of_m(c: Coeffs, eps: float) -> np.ndarray:
    """Sobolev exponent of min{p, q + eps}; with eps < 0 this is the
    threshold that n_eps must stay below."""
    m = np.minimum(c.p, c.q + eps)
    return sobolev_exponent(m, c.N)


def epsilon_margin(c: Coeffs, eps: float) -> float:
    """min over points of (critical exponent of m_{-eps}) - n_eps."""
    n_eps = np.maximum(c.p, c.q + eps)
    return float(np.min(critical_of_m(c, -eps) - n_eps))


def pick_epsilon(data: ProblemData, grid_resolution: int | None = None, kmax: int = 40) -> float:
    """Largest 2^-k (k = 1..kmax) with n_eps < (m_{-eps})^* on the scan grid.

    k starts at 1 so the result always lies in (0, 1), as M_eps requires.
    """
    c = data.coefficients(data.domain.grid(grid_resolution))
    if np.any(np.maximum(c.p, c.q) >= data.N):
        raise CriticalExponentError("p(x) or q(x) reaches N")
    for k in range(1, kmax + 1):
        eps = 2.0 ** (-k)
        if epsilon_margin(c, eps) > 0:
            return eps
    raise HypothesisInconsistencyError(f"no eps in 2^-k, k <= {kmax}, satisfies n_eps < m*_(-eps)")
