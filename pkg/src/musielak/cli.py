"""Command line entry point: ``musielak <command> [--config PATH] [--seed N] ...``.

Exit codes: 0 pass, 1 check or convergence failure, 2 usage/config error.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from .config import RunConfig, load_config
from .errors import ConfigError, MusielakError, PreconditionError
from .mesh import MeshFunction, make_mesh
from .reports import _clean

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class Context:
    def __init__(self, cfg: RunConfig, seed: int, out: Path | None, tol: float | None, samples: int | None):
        self.cfg, self.seed, self.out, self.tol, self.samples = cfg, seed, out, tol, samples

    @property
    def header(self) -> dict:
        return {"config_sha256": self.cfg.sha256, "seed": self.seed}

    def header_line(self) -> str:
        return f"config_sha256={self.cfg.sha256} seed={self.seed}"

    def emit_json(self, command: str, results, filename: str | None = None):
        text = json.dumps({"header": {**self.header, "command": command}, "results": _clean(results)},
                          indent=2, sort_keys=False)
        self._write(text + "\n", filename or f"{command}.json")

    def emit_csv(self, columns, rows, filename: str, to_stdout: bool = True):
        buf = io.StringIO()
        buf.write(f"# {self.header_line()}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        self._write(buf.getvalue(), filename, to_stdout)

    def write_text(self, text: str, filename: str):
        if self.out is not None:
            self.out.mkdir(parents=True, exist_ok=True)
            (self.out / filename).write_text(text)

    def _write(self, text: str, filename: str, to_stdout: bool = True):
        if to_stdout:
            click.echo(text, nl=False)
        self.write_text(text, filename)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected a comma separated list of numbers, got {text!r}") from None


def _threads() -> int:
    raw = os.environ.get("MUSIELAK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"MUSIELAK_THREADS must be an integer, got {raw!r}") from None


def common(fn):
    """Shared flags plus the exit-code contract."""
    @click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                  help="TOML config file (default: built-in sublinear reference config).")
    @click.option("--seed", type=int, default=0, show_default=True, help="Seed for all sampling.")
    @click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")
    @click.option("--tol", type=float, default=None, help="Tolerance override.")
    @click.option("--samples", type=int, default=None, help="Sample count override.")
    @functools.wraps(fn)
    def wrapper(config_path, seed, out, tol, samples, **kw):
        try:
            cfg = load_config(config_path)
            ctx = Context(cfg, seed, Path(out) if out else None, tol, samples)
            code = fn(ctx, **kw)
        except (ConfigError, PreconditionError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_USAGE)
        except MusielakError as exc:
            click.echo(f"failure: {type(exc).__name__}: {exc}", err=True)
            sys.exit(EXIT_FAIL)
        sys.exit(code or EXIT_OK)
    return wrapper


@click.group()
def cli():
    """Numerical companion for the logarithmic double phase problem."""


@cli.command()
@click.option("--grid", type=int, default=None, help="Scan resolution.")
@common
def validate(ctx: Context, grid):
    """Check every hypothesis on a grid scan."""
    from .problem_data import validate_hypotheses
    rep = validate_hypotheses(ctx.cfg.data, grid or ctx.cfg.grid)
    ctx.emit_json("validate", {"passed": rep.passed, "r": rep.r, "d": rep.d,
                               "grid_resolution": rep.grid_resolution,
                               "lipschitz": rep.lipschitz, "hypotheses": rep.to_list()})
    return EXIT_OK if rep.passed else EXIT_FAIL


@cli.command(name="eval")
@click.option("--kind", default="S", show_default=True, help="S, S_hat, S_star_critical, S_star_sub, "
              "M_eps, M_eps_star or conjugate (of S).")
@click.option("--x", "x", default="0.5", show_default=True, help="Point (x or x,y).")
@click.option("--t", "tvals", default="0,0.5,1,2,10,100", show_default=True, help="Comma separated arguments.")
@common
def eval_cmd(ctx: Context, kind, x, tvals):
    """Evaluate a Phi-function at one point over a list of arguments."""
    from .phi_functions import PhiEvaluator
    from .problem_data import pick_epsilon
    data = ctx.cfg.data
    c = data.at(_floats(x))
    t = np.asarray(_floats(tvals))
    if kind == "conjugate":
        phi = PhiEvaluator("conjugate", c, base=PhiEvaluator("S", c))
    else:
        ell = data.default_ell() if kind == "S_hat" else None
        eps = pick_epsilon(data) if kind in ("M_eps", "M_eps_star") else None
        try:
            phi = PhiEvaluator(kind, c, ell=ell, eps=eps)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    vals = phi.value(t)
    cols, rows = ["t", "value"], [t, vals]
    if phi.has_derivative and np.all(t > 0):
        cols.append("derivative")
        rows.append(phi.derivative(t))
    ctx.emit_csv(cols, zip(*rows), f"eval_{kind}.csv")
    return EXIT_OK


@cli.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Mesh function CSV (vertex_id, x, [y], value). Without it the relation check runs.")
@common
def norm(ctx: Context, input_path):
    """Modulars and Luxemburg norms of a mesh function, or the norm-modular check."""
    from .modular_spaces import (Discretization, check_norm_modular_relations, luxemburg_norm,
                                 modular_rho_S)
    data = ctx.cfg.data
    if input_path is None:
        rep = check_norm_modular_relations(data, ctx.samples or 200, ctx.seed,
                                           make_mesh(data.domain.dim, _check_cells(ctx)),
                                           tol=ctx.tol or 1e-9)
        ctx.emit_json("norm", [rep.to_dict()])
        return EXIT_OK if rep.passed else EXIT_FAIL
    u = MeshFunction.from_csv(Path(input_path).read_text())
    if u.mesh.dim != data.domain.dim:
        raise ConfigError("mesh/domain mismatch between CSV and config")
    disc = Discretization(data, u.mesh)
    res = {"rho_S": modular_rho_S(disc, u), "rho_S_gradient": modular_rho_S(disc, u, True)}
    res["rho_1S"] = res["rho_S"] + res["rho_S_gradient"]
    for which in ("value", "gradient", "sobolev"):
        res[f"norm_{which}"] = luxemburg_norm(disc, u, which)
    ctx.emit_json("norm", res)
    return EXIT_OK


def _check_cells(ctx):
    return 32 if ctx.cfg.data.domain.dim == 1 else 6


@cli.command(name="conjugate-table")
@click.option("--x", "x", default="0.5", show_default=True, help="Point (x or x,y).")
@click.option("--s", "svals", default=None, help="Comma separated s values (default: 25 log-spaced in [1e-2, 1e6]).")
@click.option("--ell", type=float, default=None, help="Splice level (default from config or derived).")
@common
def conjugate_table(ctx: Context, x, svals, ell):
    """Table of the Sobolev conjugate and its inverse at one point."""
    from .sobolev_conjugate import SobolevConjugate
    data = ctx.cfg.data
    c = data.at(_floats(x))
    ell = ell or data.default_ell()
    s = np.asarray(_floats(svals)) if svals else np.geomspace(1e-2, 1e6, 25)
    conj = SobolevConjugate(c, ell, tol=ctx.tol or 1e-10)
    tab = conj.table(s)
    ctx.emit_csv(["s", "S_star_inv", "t", "S_star"],
                 zip(tab["s"], tab["S_star_inv"], tab["t"], tab["S_star"]), "conjugate_table.csv")
    return EXIT_OK


@cli.command(name="check-inequalities")
@click.option("--suite", "suites", multiple=True, default=("all",), show_default=True,
              help="Suite name (repeatable) or 'all'.")
@common
def check_inequalities(ctx: Context, suites):
    """Run inequality suites; exit 1 if any margin fails."""
    from .inequality_lab import SUITES, run_suite
    names = list(SUITES) if "all" in suites else list(suites)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s) {', '.join(unknown)}; choose from {', '.join(SUITES)} or all")
    data, samples = ctx.cfg.data, ctx.samples or 100_000
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(lambda n: run_suite(n, data, samples, ctx.seed), names))
    reports = [r for rs in results for r in rs]
    if ctx.tol is not None:
        for r in reports:
            _set_tol(r, ctx.tol)
    ctx.emit_json("check-inequalities", [r.to_dict() for r in reports])
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _set_tol(rep, tol):
    rep.tolerance = tol
    for p in rep.parts:
        _set_tol(p, tol)


def _solver_opts(ctx):
    s = ctx.cfg.solver
    return {"tol": ctx.tol or float(s.get("tol", 1e-8)), "max_iter": int(s.get("max_iter", 5000)),
            "lam_cap": float(s.get("lambda_cap", 0.2))}


@cli.command()
@click.option("--lam", type=float, default=None, help="lambda (default from [solver]).")
@click.option("--Lam", "Lam", type=float, default=None, help="Lambda (default from [solver]).")
@common
def solve(ctx: Context, lam, Lam):
    """Solve the sublinear problem; writes solution.csv and solve.json."""
    from .variational_solver import solve_sublinear
    s = ctx.cfg.solver
    lam = float(s.get("lambda", 0.1)) if lam is None else lam
    Lam = float(s.get("Lambda", 0.0)) if Lam is None else Lam
    data = ctx.cfg.data
    rep = solve_sublinear(data, lam, Lam, ctx.seed, make_mesh(data.domain.dim, ctx.cfg.cells),
                          **_solver_opts(ctx))
    ctx.write_text(rep.solution.to_csv(ctx.header_line()), "solution.csv")
    ctx.emit_json("solve", rep.to_dict())
    return EXIT_OK if rep.converged and rep.energy < 0 else EXIT_FAIL


@cli.command()
@click.option("--lambdas", default=None, help="Comma separated decreasing lambdas (default from [solver]).")
@click.option("--Lam", "Lam", type=float, default=None, help="Lambda (default from [solver]).")
@common
def sweep(ctx: Context, lambdas, Lam):
    """lambda sweep with warm starts; writes sweep.csv."""
    from .variational_solver import SWEEP_COLUMNS, lambda_sweep
    s = ctx.cfg.solver
    lams = _floats(lambdas) if lambdas else [float(v) for v in s.get("lambdas", [0.1, 0.05, 0.02, 0.01])]
    Lam = float(s.get("Lambda", 0.0)) if Lam is None else Lam
    data = ctx.cfg.data
    rows, _ = lambda_sweep(data, lams, Lam, ctx.seed, make_mesh(data.domain.dim, ctx.cfg.cells),
                           **_solver_opts(ctx))
    ctx.emit_csv(SWEEP_COLUMNS, [r.as_tuple() for r in rows], "sweep.csv")
    return EXIT_OK if all(r.converged for r in rows) else EXIT_FAIL


def main(argv=None):
    cli.main(args=argv, prog_name="musielak")


if __name__ == "__main__":
    main()
