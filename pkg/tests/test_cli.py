import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from musielak.cli import cli
from musielak.config import DEFAULT_CONFIG, parse_config
from musielak.errors import ConfigError


@pytest.fixture
def runner():
    return CliRunner()


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_validate_default(runner):
    res = runner.invoke(cli, ["validate"])
    assert res.exit_code == 0
    body = json.loads(res.stdout)
    assert body["header"]["seed"] == 0 and len(body["header"]["config_sha256"]) == 64
    assert body["results"]["passed"] is True
    assert {"hypothesis", "pass", "worst_point", "margin"} <= set(body["results"]["hypotheses"][0])


def test_validate_h1_violation(runner, tmp_path):
    cfg = write(tmp_path, '[fields]\np = "2"\nq = "3.2"\ns = "0"\na = "1"\nb = "1"\n[domain]\nN = 4\n')
    res = runner.invoke(cli, ["validate", "--config", cfg])
    assert res.exit_code == 1
    bad = [h for h in json.loads(res.stdout)["results"]["hypotheses"] if not h["pass"]]
    assert [h["hypothesis"] for h in bad] == ["H1.ratio"]
    assert bad[0]["worst_point"] is not None


def test_missing_key_is_usage_error(runner, tmp_path):
    cfg = write(tmp_path, '[fields]\np = "2"\ns = "0"\na = "1"\nb = "1"\n')
    res = runner.invoke(cli, ["validate", "--config", cfg])
    assert res.exit_code == 2
    assert "fields.q" in res.stderr


def test_config_parse_errors():
    with pytest.raises(ConfigError, match="TOML"):
        parse_config("[fields\n")
    with pytest.raises(ConfigError, match="unknown"):
        parse_config(DEFAULT_CONFIG.replace('b = "1"', 'b = "1"\nzz = "1"'))
    with pytest.raises(ConfigError):
        parse_config(DEFAULT_CONFIG.replace('q = "2.5"', 'q = "log(x)"'))


def test_check_log_product_and_bogus(runner):
    res = runner.invoke(cli, ["check-inequalities", "--suite", "log_product", "--samples", "2000"])
    assert res.exit_code == 0
    assert json.loads(res.stdout)["results"][0]["name"] == "log_product"
    res = runner.invoke(cli, ["check-inequalities", "--suite", "bogus"])
    assert res.exit_code == 2


def test_check_two_suites_aggregate(runner):
    res = runner.invoke(cli, ["check-inequalities", "--suite", "log_product", "--suite", "young_log",
                              "--samples", "2000"])
    assert res.exit_code == 0
    names = [r["name"] for r in json.loads(res.stdout)["results"]]
    assert names == ["log_product", "young_log"]


def test_eval_and_conjugate_table(runner):
    res = runner.invoke(cli, ["eval", "--kind", "S", "--t", "0,1,2"])
    assert res.exit_code == 0
    lines = res.stdout.splitlines()
    assert lines[0].startswith("# config_sha256=") and lines[1] == "t,value"
    res = runner.invoke(cli, ["eval", "--kind", "M_eps_star", "--t", "0.5,2"])
    assert res.exit_code == 0
    res = runner.invoke(cli, ["eval", "--kind", "nope"])
    assert res.exit_code == 2
    res = runner.invoke(cli, ["conjugate-table", "--s", "0.1,10,1000"])
    assert res.exit_code == 0
    assert res.stdout.splitlines()[1] == "s,S_star_inv,t,S_star"


def test_norm_from_csv(runner, tmp_path):
    from musielak.mesh import interval_mesh, MeshFunction
    import numpy as np
    mesh = interval_mesh(8)
    u = MeshFunction(mesh, np.sin(np.pi * mesh.vertices[:, 0]))
    path = write(tmp_path, u.to_csv("x"), "u.csv")
    res = runner.invoke(cli, ["norm", "--input", path])
    assert res.exit_code == 0
    out = json.loads(res.stdout)["results"]
    assert out["rho_1S"] == pytest.approx(out["rho_S"] + out["rho_S_gradient"])
    cfg2d = write(tmp_path, DEFAULT_CONFIG.replace("dim = 1", "dim = 2"))
    res = runner.invoke(cli, ["norm", "--input", path, "--config", cfg2d])
    assert res.exit_code == 2


def test_solve_writes_outputs(runner, tmp_path):
    out = tmp_path / "run"
    res = runner.invoke(cli, ["solve", "--out", str(out)])
    assert res.exit_code == 0
    rep = json.loads((out / "solve.json").read_text())["results"]
    assert rep["converged"] and rep["energy"] < 0
    head = (out / "solution.csv").read_text().splitlines()[0]
    assert head.startswith("# config_sha256=") and "seed=0" in head


def test_solve_rejects_large_lambda(runner):
    res = runner.invoke(cli, ["solve", "--lam", "0.5"])
    assert res.exit_code == 2
    assert "lambda" in res.stderr


def test_sweep_csv(runner, tmp_path):
    res = runner.invoke(cli, ["sweep", "--out", str(tmp_path)])
    assert res.exit_code == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[1] == "lambda,norm_1S,energy,residual,iterations,converged"
    norms = [float(l.split(",")[1]) for l in lines[2:]]
    assert norms[-1] < 0.5 * norms[0]


def test_threads_env_validation(runner):
    res = runner.invoke(cli, ["check-inequalities", "--suite", "log_product", "--samples", "100"],
                        env={"MUSIELAK_THREADS": "x"})
    assert res.exit_code == 2


def test_byte_identical_runs(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        cmd = [sys.executable, "-m", "musielak", "check-inequalities", "--suite", "sum_control",
               "--suite", "weaker_phi", "--samples", "3000", "--seed", "7", "--out", str(d)]
        subprocess.run(cmd, check=True, capture_output=True, env={"MUSIELAK_THREADS": "2", "PATH": ""})
        outs.append((d / "check-inequalities.json").read_bytes())
    assert outs[0] == outs[1]
