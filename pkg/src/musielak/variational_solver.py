"""Energy, gradient and a descent solver for the sublinear Dirichlet problem."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import splu

from .errors import PreconditionError
from .mesh import Mesh, MeshFunction, make_mesh, random_mesh_function
from .modular_spaces import Discretization, luxemburg_norm
from .phi_functions import (density_M, density_M_critical, density_M_sub, flux_coefficient,
                            reaction_critical, reaction_sub)
from .problem_data import ProblemData, validate_hypotheses
from .reports import InequalityReport, worst

LAMBDA_CAP = 0.2
ARMIJO_C = 1e-4
BACKTRACK = 0.5
SOLVE_TOL = 1e-8
MAX_ITER = 5000


class EnergyAssembly:
    """E(u) = int M(x, grad u) - Lam M^*(x, u) - lam M_star(x, u) on a P1 mesh."""

    def __init__(self, data: ProblemData, mesh: Mesh, Lam: float = 0.0, lam: float = 0.0,
                 order_factor: int = 1):
        if Lam < 0 or lam < 0:
            raise PreconditionError("Lambda and lambda must be >= 0")
        if lam > 0 and not data.has_subcritical:
            raise PreconditionError("lambda > 0 needs p_star, q_star, s_star")
        self.data, self.mesh = data, mesh
        self.Lam, self.lam = float(Lam), float(lam)
        self.disc = Discretization(data, mesh, order_factor)
        self.c = self.disc.coeffs
        self.w = self.disc.weights
        self.bary = self.disc.bary

    def with_parameters(self, Lam: float | None = None, lam: float | None = None) -> "EnergyAssembly":
        new = object.__new__(EnergyAssembly)
        new.__dict__.update(self.__dict__)
        new.Lam = self.Lam if Lam is None else float(Lam)
        new.lam = self.lam if lam is None else float(lam)
        return new

    def _fields(self, v):
        cells = self.mesh.cells
        uq = v[cells] @ self.bary.T                               # (nc, nq)
        grad = np.einsum("ck,ckd->cd", v[cells], self.mesh.basis_gradients)
        return uq, grad, np.linalg.norm(grad, axis=1)

    def energy_values(self, v: np.ndarray) -> float:
        uq, _, r = self._fields(v)
        dens = density_M(self.c, np.broadcast_to(r[:, None], uq.shape))
        if self.Lam:
            dens = dens - self.Lam * density_M_critical(self.c, np.abs(uq))
        if self.lam:
            dens = dens - self.lam * density_M_sub(self.c, np.abs(uq))
        return float(np.sum(self.w * dens))

    def gradient_values(self, v: np.ndarray, principal_only: bool = False) -> np.ndarray:
        """<J(u), phi_i> for every vertex i (boundary entries included)."""
        cells = self.mesh.cells
        uq, grad, r = self._fields(v)
        g = flux_coefficient(self.c, np.broadcast_to(r[:, None], uq.shape))   # (nc, nq)
        coef = np.sum(self.w * g, axis=1)                                     # (nc,)
        local = np.einsum("cd,ckd->ck", coef[:, None] * grad, self.mesh.basis_gradients)
        if not principal_only:
            react = np.zeros_like(uq)
            if self.Lam:
                react = react + self.Lam * reaction_critical(self.c, uq)
            if self.lam:
                react = react + self.lam * reaction_sub(self.c, uq)
            local = local - (self.w * react) @ self.bary
        out = np.bincount(cells.ravel(), weights=local.ravel(), minlength=self.mesh.n_vertices)
        return out

    def energy(self, u: MeshFunction) -> float:
        return self.energy_values(u.values)

    def gradient(self, u: MeshFunction) -> np.ndarray:
        return self.gradient_values(u.values)[self.mesh.free]


def assemble_energy(assembly: EnergyAssembly, u: MeshFunction, Lam: float | None = None,
                    lam: float | None = None) -> float:
    _admissible(u)
    return assembly.with_parameters(Lam, lam).energy(u)


def assemble_gradient(assembly: EnergyAssembly, u: MeshFunction, Lam: float | None = None,
                      lam: float | None = None) -> np.ndarray:
    """Covector on the free nodes."""
    _admissible(u)
    return assembly.with_parameters(Lam, lam).gradient(u)


def _admissible(u: MeshFunction):
    if not u.is_admissible:
        raise PreconditionError("mesh function is not zero on the boundary")


# ---------------------------------------------------------------- checks

def fd_gradient_check(assembly: EnergyAssembly, u: MeshFunction, h: float = 1e-6,
                      tol: float = 1e-5) -> InequalityReport:
    """Central differences of the energy against the assembled gradient.

    Relative error per free node uses max(|g_i|, 1e-3 max|g|) as the
    denominator so that nodes where g_i happens to vanish do not dominate.
    """
    _admissible(u)
    free = assembly.mesh.free
    g = assembly.gradient(u)
    fd = np.empty_like(g)
    v = u.values.copy()
    for k, i in enumerate(free):
        old = v[i]
        v[i] = old + h
        ep = assembly.energy_values(v)
        v[i] = old - h
        em = assembly.energy_values(v)
        v[i] = old
        fd[k] = (ep - em) / (2 * h)
    scale = np.max(np.abs(g)) if g.size else 0.0
    den = np.maximum(np.abs(g), 1e-3 * scale)
    den = np.where(den > 0, den, 1.0)
    rel = np.abs(fd - g) / den
    return worst("fd_gradient", tol - rel, {"node": free, "g": g, "fd": fd}, 0.0,
                 {"h": h, "max_rel_error": float(np.max(rel)) if rel.size else 0.0})


def check_monotone_J1(data: ProblemData, pairs: int = 1000, seed: int = 0,
                      mesh: Mesh | None = None) -> InequalityReport:
    """<J1(u) - J1(v), u - v> >= -1e-12 (1 + |u - v|^2) on seeded admissible pairs."""
    mesh = mesh or make_mesh(data.domain.dim, 32 if data.domain.dim == 1 else 6)
    asm = EnergyAssembly(data, mesh)
    rng = np.random.default_rng(seed)
    margins, amp = [], []
    for k in range(pairs):
        su, sv = np.exp(rng.uniform(np.log(1e-3), np.log(1e2), 2))
        u = random_mesh_function(mesh, rng).values * su
        v = u.copy() if k == 0 else random_mesh_function(mesh, rng).values * sv
        d = u - v
        val = float(np.dot(asm.gradient_values(u, True) - asm.gradient_values(v, True), d))
        margins.append(val / (1.0 + float(np.dot(d, d))))
        amp.append((su, sv))
    return worst("monotone_J1", margins, {"pair": np.arange(pairs), "scales": np.asarray(amp)},
                 1e-12, {"pairs": pairs, "seed": seed})


# ---------------------------------------------------------------- solver

@dataclass
class SolveReport:
    solution: MeshFunction
    energy: float
    residual: float
    iterations: int
    converged: bool
    lam: float
    Lam: float
    trace: list[tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "Lambda": self.Lam, "energy": self.energy,
                "residual": self.residual, "iterations": self.iterations,
                "converged": self.converged, "mesh_cells": int(self.solution.mesh.cells.shape[0])}


def initial_guess(data: ProblemData, mesh: Mesh, seed: int = 0) -> MeshFunction:
    """Seeded smooth bump with unit W^{1,S} Luxemburg norm."""
    rng = np.random.default_rng(seed)
    X = mesh.vertices
    v = np.ones(mesh.n_vertices)
    for d in range(mesh.dim):
        modes = np.sin(np.pi * np.outer(X[:, d], np.arange(1, 4)))
        amps = np.array([1.0, *(0.1 * rng.standard_normal(2))])
        v = v * (modes @ amps)
    v[mesh.boundary] = 0.0
    u = MeshFunction(mesh, v)
    nrm = luxemburg_norm(Discretization(data, mesh), u, "sobolev")
    return u * (1.0 / nrm)


def _check_sublinear(data: ProblemData, lam: float, cap: float):
    if not 0 <= lam <= cap:
        raise PreconditionError(f"lambda = {lam} outside the admissible range [0, {cap}]")
    if lam > 0:
        sub = replace_regime(data, "sub")
        rep = validate_hypotheses(sub, 64 if data.domain.dim == 1 else 16)
        bad = [e.hypothesis for e in rep.entries
               if e.hypothesis.startswith(("Hstar", "sandwich")) and not e.passed]
        if bad:
            raise PreconditionError(f"sublinear regime hypotheses fail: {', '.join(bad)}")


def replace_regime(data: ProblemData, regime: str) -> ProblemData:
    if data.regime == regime:
        return data
    new = object.__new__(ProblemData)
    new.__dict__.update(data.__dict__)
    new.regime = regime
    return new


def _best_scaling(asm: EnergyAssembly, v: np.ndarray) -> np.ndarray:
    """Minimize E(tau v) over tau in [1e-12, 2]; keep v unless the energy drops."""
    if not np.any(v):
        return v
    res = minimize_scalar(lambda z: asm.energy_values(np.exp(z) * v), bounds=(np.log(1e-12), np.log(2.0)),
                          method="bounded", options={"xatol": 1e-10})
    tau = float(np.exp(res.x))
    return tau * v if asm.energy_values(tau * v) < asm.energy_values(v) else v


def solve_sublinear(data: ProblemData, lam: float, Lam: float = 0.0, init: MeshFunction | int = 0,
                    mesh: Mesh | None = None, tol: float = SOLVE_TOL, max_iter: int = MAX_ITER,
                    lam_cap: float = LAMBDA_CAP, assembly: EnergyAssembly | None = None) -> SolveReport:
    """Stiffness-preconditioned steepest descent with Armijo backtracking.

    The start is first rescaled along its own ray to the energy minimum,
    which is itself a descent step.
    """
    _check_sublinear(data, lam, lam_cap)
    if isinstance(init, MeshFunction):
        mesh = init.mesh
        u0 = init
    else:
        mesh = mesh or make_mesh(data.domain.dim, 64 if data.domain.dim == 1 else 16)
        u0 = initial_guess(data, mesh, int(init))
    _admissible(u0)
    asm = (assembly or EnergyAssembly(data, mesh)).with_parameters(Lam, lam)
    free = mesh.free
    K = mesh.stiffness()[free][:, free].tocsc()
    lu = splu(K)
    v = _best_scaling(asm, u0.values.copy())
    E = asm.energy_values(v)
    g = asm.gradient_values(v)[free]
    res = float(np.linalg.norm(g))
    trace = [(E, res)]
    alpha = 1.0
    it = 0
    while res > tol and it < max_iter:
        d = -lu.solve(g)
        slope = float(np.dot(g, d))
        if slope >= 0:
            d, slope = -g, -float(np.dot(g, g))
        alpha = min(2.0 * alpha, 1e6)
        while True:
            trial = v.copy()
            trial[free] += alpha * d
            Et = asm.energy_values(trial)
            if Et <= E + ARMIJO_C * alpha * slope:
                break
            alpha *= BACKTRACK
            if alpha < 1e-20:
                break
        if alpha < 1e-20:
            break
        v, E = trial, Et
        g = asm.gradient_values(v)[free]
        res = float(np.linalg.norm(g))
        it += 1
        trace.append((E, res))
    return SolveReport(MeshFunction(mesh, v), E, res, it, res <= tol, float(lam), float(Lam), trace)


@dataclass
class SweepRow:
    lam: float
    norm_1S: float
    energy: float
    residual: float
    iterations: int
    converged: bool

    def as_tuple(self):
        return (self.lam, self.norm_1S, self.energy, self.residual, self.iterations, self.converged)


SWEEP_COLUMNS = ("lambda", "norm_1S", "energy", "residual", "iterations", "converged")


def lambda_sweep(data: ProblemData, lambdas, Lam: float = 0.0, seed: int = 0, mesh: Mesh | None = None,
                 tol: float = SOLVE_TOL, max_iter: int = MAX_ITER,
                 lam_cap: float = LAMBDA_CAP) -> tuple[list[SweepRow], list[SolveReport]]:
    """Solve for each lambda in order, warm-starting from the previous solution."""
    lambdas = [float(x) for x in lambdas]
    mesh = mesh or make_mesh(data.domain.dim, 64 if data.domain.dim == 1 else 16)
    asm = EnergyAssembly(data, mesh)
    disc = asm.disc
    init: MeshFunction | int = initial_guess(data, mesh, seed)
    rows, reports = [], []
    for lam in lambdas:
        rep = solve_sublinear(data, lam, Lam, init, tol=tol, max_iter=max_iter,
                              lam_cap=lam_cap, assembly=asm)
        nrm = luxemburg_norm(disc, rep.solution, "sobolev")
        rows.append(SweepRow(lam, nrm, rep.energy, rep.residual, rep.iterations, rep.converged))
        reports.append(rep)
        if np.any(rep.solution.values):
            init = rep.solution
    return rows, reports


def sweep_decreasing(rows: list[SweepRow], noise: float = 0.05) -> bool:
    """Norm column decreasing up to ``noise`` relative and last < first / 2."""
    n = [r.norm_1S for r in rows]
    ok = all(b <= a * (1 + noise) for a, b in zip(n, n[1:]))
    return ok and n[-1] < 0.5 * n[0]
