import numpy as np
import pytest
from hypothesis import settings

from musielak.config import load_config
from musielak.problem_data import Domain, ProblemData

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def make(p="2", q="2.5", s="0.5", a="1", b="1", N=3, dim=1, **kw):
    return ProblemData(p=p, q=q, s=s, a=a, b=b, N=N, domain=Domain(dim), **kw)


# three configs used throughout: s > 0, s < 0, sign-changing s
CONFIGS = {
    "pos": dict(p="2", q="2.5", s="0.5"),
    "neg": dict(p="2", q="2.4", s="-0.5"),
    "mix": dict(p="2 + 0.2*x", q="2.4", s="1 - 2*x"),
}


@pytest.fixture
def ref_data():
    return load_config(None).data


@pytest.fixture(params=sorted(CONFIGS))
def config(request):
    return make(**CONFIGS[request.param])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k[2:])):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
