"""TOML run configuration: [fields], [domain], [hypotheses], optional [solver], [conjugate]."""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .problem_data import Domain, ProblemData

REQUIRED_FIELDS = ("p", "q", "s", "a", "b")
OPTIONAL_FIELDS = ("p_star", "q_star", "s_star")

DEFAULT_CONFIG = """\
# sublinear reference configuration
[fields]
p = "2"
q = "2.5"
s = "0.5"
a = "1"
b = "1"
p_star = "1.5"
q_star = "1.8"
s_star = "0"

[domain]
N = 3
dim = 1
cells = 64

[hypotheses]
regime = "sub"

[solver]
Lambda = 1.0
lambda = 0.1
lambdas = [0.1, 0.05, 0.02, 0.01]
lambda_cap = 0.2
tol = 1e-8
max_iter = 5000
"""


@dataclass
class RunConfig:
    data: ProblemData
    cells: int
    solver: dict = field(default_factory=dict)
    conjugate: dict = field(default_factory=dict)
    grid: int | None = None
    sha256: str = ""
    source: str = "<default>"


def _expr(section: dict, key: str, where: str):
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, (str, int, float)):
        raise ConfigError(f"{where}.{key} must be an expression string or a number")
    return str(v)


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: TOML parse error: {exc}") from None
    fields = raw.get("fields")
    if not isinstance(fields, dict):
        raise ConfigError(f"{source}: missing section [fields]")
    for key in REQUIRED_FIELDS:
        if key not in fields:
            raise ConfigError(f"{source}: missing required key fields.{key}")
    unknown = set(fields) - set(REQUIRED_FIELDS) - set(OPTIONAL_FIELDS)
    if unknown:
        raise ConfigError(f"{source}: unknown keys in [fields]: {', '.join(sorted(unknown))}")
    dom = raw.get("domain", {})
    hyp = raw.get("hypotheses", {})
    try:
        N = dom.get("N", 3)
        dim = int(dom.get("dim", 1))
        cells = int(dom.get("cells", 64 if dim == 1 else 16))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: bad [domain] entry: {exc}") from None
    kw = {k: _expr(fields, k, "fields") for k in REQUIRED_FIELDS}
    kw.update({k: _expr(fields, k, "fields") for k in OPTIONAL_FIELDS if k in fields})
    conj = raw.get("conjugate", {})
    data = ProblemData(N=N, domain=Domain(dim), r=hyp.get("r"), d=hyp.get("d"),
                       regime=hyp.get("regime"), ell=conj.get("ell"), **kw)
    return RunConfig(data=data, cells=cells, solver=dict(raw.get("solver", {})), conjugate=dict(conj),
                     grid=hyp.get("grid"), sha256=hashlib.sha256(text.encode()).hexdigest(),
                     source=source)


def load_config(path: str | Path | None) -> RunConfig:
    """Read and parse ``path``; ``None`` gives the built-in reference config."""
    if path is None:
        return parse_config(DEFAULT_CONFIG, "<default>")
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    return parse_config(text, str(p))
