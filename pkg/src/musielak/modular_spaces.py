"""Modulars, Luxemburg norms and norm-modular relation checks on P1 meshes."""

from __future__ import annotations

import numpy as np

from .errors import AccuracyError, ConfigError
from .mesh import Mesh, MeshFunction, make_mesh, random_mesh_function
from .phi_functions import eval_S
from .problem_data import ProblemData, exponent_summary
from .reports import combine, relative_margin, worst

NORM_TOL = 1e-12
MAX_NORM_ITER = 200
NORM_TARGETS = np.round(np.arange(1, 101) * 0.1, 10)  # 0.1, ..., 1.0, ..., 10.0


class Discretization:
    """Problem coefficients frozen at the quadrature points of a mesh."""

    def __init__(self, data: ProblemData, mesh: Mesh, order_factor: int = 1):
        if mesh.dim != data.domain.dim:
            raise ConfigError(f"mesh dimension {mesh.dim} does not match domain dimension {data.domain.dim}")
        self.data = data
        self.mesh = mesh
        self.order_factor = order_factor
        pts, self.bary, self.weights = mesh.quadrature(order_factor)
        nc, nq = self.weights.shape
        flat = pts.reshape(nc * nq, mesh.dim)
        c = data.coefficients(flat[:, 0] if mesh.dim == 1 else flat)
        self.coeffs = _reshape_coeffs(c, (nc, nq))
        self.points = pts

    def _check(self, u: MeshFunction):
        if u.mesh is not self.mesh:
            if u.mesh.n_vertices != self.mesh.n_vertices or not np.array_equal(u.mesh.cells, self.mesh.cells):
                raise ConfigError("mesh/domain mismatch")


def _reshape_coeffs(c, shape):
    from dataclasses import replace
    def rs(v):
        return None if v is None else np.broadcast_to(v, (shape[0] * shape[1],)).reshape(shape)
    return replace(c, a=rs(c.a), b=rs(c.b), p=rs(c.p), q=rs(c.q), s=rs(c.s),
                   p_star=rs(c.p_star), q_star=rs(c.q_star), s_star=rs(c.s_star), points=None)


def _value_modular(disc: Discretization, values: np.ndarray) -> float:
    """rho_S of the P1 function with nodal ``values``."""
    uq = values[disc.mesh.cells] @ disc.bary.T
    return float(np.sum(disc.weights * eval_S(disc.coeffs, np.abs(uq))))


def _gradient_modular(disc: Discretization, values: np.ndarray) -> float:
    g = np.einsum("ck,ckd->cd", values[disc.mesh.cells], disc.mesh.basis_gradients)
    r = np.linalg.norm(g, axis=1)
    return float(np.sum(disc.weights * eval_S(disc.coeffs, r[:, None])))


def modular_rho_S(disc: Discretization, u: MeshFunction, of_gradient: bool = False) -> float:
    """Cell-wise Gauss quadrature of S(x, |u|) or S(x, |grad u|)."""
    disc._check(u)
    return (_gradient_modular if of_gradient else _value_modular)(disc, u.values)


def modular_rho_1S(disc: Discretization, u: MeshFunction) -> float:
    disc._check(u)
    return _value_modular(disc, u.values) + _gradient_modular(disc, u.values)


_WHICH = {
    "value": lambda d, v: _value_modular(d, v),
    "gradient": lambda d, v: _gradient_modular(d, v),
    "sobolev": lambda d, v: _value_modular(d, v) + _gradient_modular(d, v),
}


def luxemburg_norm(disc: Discretization, u: MeshFunction, which: str = "value",
                   tol: float = NORM_TOL) -> float:
    """inf{lam > 0 : rho(u/lam) <= 1} by bisection in log(lam)."""
    if which not in _WHICH:
        raise ValueError(f"which must be one of {sorted(_WHICH)}")
    disc._check(u)
    rho = _WHICH[which]
    v = u.values
    if not np.any(v):
        return 0.0
    def f(lam):
        return rho(disc, v / lam)
    lo = hi = max(float(np.max(np.abs(v))), 1e-300)
    while f(hi) > 1.0:
        hi *= 2.0
    while f(lo) < 1.0:
        lo *= 0.5
        if lo < 1e-300:
            return 0.0
    for _ in range(MAX_NORM_ITER):
        mid = np.sqrt(lo * hi)
        r = f(mid)
        if abs(r - 1.0) <= tol:
            return float(mid)
        if r > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            return float(mid)
    raise AccuracyError("Luxemburg norm bisection did not converge")


def check_norm_modular_relations(data: ProblemData, sample_count: int = 200, seed: int = 0,
                                 mesh: Mesh | None = None, which=("value", "sobolev"),
                                 tol: float = 1e-9):
    """Norm-modular relations, unit normalization, homogeneity and triangle inequality.

    The i-th random function is rescaled to Luxemburg norm NORM_TARGETS[i mod 100].
    """
    mesh = mesh or make_mesh(data.domain.dim, 32 if data.domain.dim == 1 else 6)
    disc = Discretization(data, mesh)
    summ = exponent_summary(data)
    lo_pow, hi_pow = summ.ell_minus, summ.ell_plus
    rng = np.random.default_rng(seed)
    funcs = [random_mesh_function(mesh, rng) for _ in range(sample_count)]
    targets = NORM_TARGETS[np.arange(sample_count) % NORM_TARGETS.size]
    parts = []
    for kind in which:
        rho = _WHICH[kind]
        rel, unit, homog, ball, tri = [], [], [], [], []
        scaled = []
        for u, c in zip(funcs, targets):
            nu = luxemburg_norm(disc, u, kind)
            unit.append(abs(rho(disc, u.values / nu) - 1.0))
            v = u * (c / nu)
            scaled.append(v)
            nv = luxemburg_norm(disc, v, kind)
            homog.append(abs(nv / c - 1.0))
            r = rho(disc, v.values)
            if c < 1:
                lower, upper = c ** hi_pow, c ** lo_pow
            elif c > 1:
                lower, upper = c ** lo_pow, c ** hi_pow
            else:
                lower = upper = 1.0
            rel.append(min(relative_margin(lower, r), relative_margin(r, upper)))
            ball.append(0.0 if (r < 1) == (nv < 1) or abs(nv - 1) < 1e-9 else -1.0)
        for v, w in zip(scaled, scaled[1:] + scaled[:1]):
            lhs = luxemburg_norm(disc, v + w, kind)
            rhs = luxemburg_norm(disc, v, kind) + luxemburg_norm(disc, w, kind)
            tri.append(relative_margin(lhs, rhs))
        idx = np.arange(sample_count)
        parts += [
            worst(f"{kind}.norm_modular", rel, {"sample": idx, "target_norm": targets}, tol,
                  {"ell_minus": lo_pow, "ell_plus": hi_pow}),
            worst(f"{kind}.unit_modular", -np.asarray(unit), {"sample": idx}, 1e-8),
            worst(f"{kind}.homogeneity", -np.asarray(homog), {"sample": idx, "target_norm": targets}, tol),
            worst(f"{kind}.unit_ball", ball, {"sample": idx}, 0.0),
            worst(f"{kind}.triangle", tri, {"sample": idx}, tol),
        ]
    return combine("norm_modular_relations", parts, tol,
                   {"mesh_cells": int(mesh.cells.shape[0]), "seed": seed})
