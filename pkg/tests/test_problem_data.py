import numpy as np
import pytest
from hypothesis import given, strategies as st

from musielak.errors import CriticalExponentError, MalformedFieldError
from musielak.expressions import ScalarField
from musielak.problem_data import exponent_summary, pick_epsilon, validate_hypotheses

from conftest import make


def test_constant_config_passes_h0_h1():
    rep = validate_hypotheses(make(q="2.2"))
    assert rep.passed
    assert rep["H1.ratio"].margin == pytest.approx(4 / 3 - 1.1)


def test_h1_fails_for_ratio_1p6_in_dimension_2():
    # q >= N makes H0 fail too, but H1 must be named with its deficit
    rep = validate_hypotheses(make(p="2", q="3.2", s="0", N=2))
    e = rep["H1.ratio"]
    assert not e.passed
    assert e.margin == pytest.approx(1.5 - 1.6)
    assert e.worst_point is not None


def test_variable_p_against_dense_scan():
    data = make(p="2 + 0.3*x", q="2.4", s="-0.5", r=1.5)
    rep = validate_hypotheses(data, 10_000)
    xs = np.linspace(0, 1, 10_000)
    p = 2 + 0.3 * xs
    ratio = np.maximum(p, 2.4) / np.minimum(p, 2.4)
    oracle = float(np.min(1 + 1 / 3 - ratio))
    assert rep["H1.ratio"].margin == pytest.approx(oracle, abs=1e-12)
    assert rep["H1.ratio"].passed == (oracle > 0)
    assert rep["H0.q+s>=r"].margin == pytest.approx(2.4 - 0.5 - 1.5)


def test_malformed_field_names_field():
    with pytest.raises(MalformedFieldError, match="q"):
        make(q="exp(x)")


def test_grid_resolution_must_be_at_least_two():
    with pytest.raises(ValueError):
        validate_hypotheses(make(), 1)


def test_defaults_for_r_and_d():
    data = make(q="2.4", s="-0.5", a="x", b="1 - x")
    assert data.r == pytest.approx(1.9 - 1e-9)
    assert data.d == pytest.approx(1 - 1e-9)


def test_summary_constant_exponents():
    summ = exponent_summary(make(p="2", q="2", s="0", N=4))
    x = np.linspace(0, 1, 5)
    assert np.allclose(summ.m_minus.evaluate(x), 2)
    assert np.allclose(summ.n_plus.evaluate(x), 2)
    assert np.allclose(summ.p_crit.evaluate(x), 4)
    assert np.allclose(summ.q_crit.evaluate(x), 4)


def test_summary_negative_s():
    summ = exponent_summary(make(p="2", q="2.2", s="-0.5"))
    x = np.linspace(0, 1, 5)
    assert np.allclose(summ.m_minus.evaluate(x), 1.7)
    assert np.allclose(summ.n_plus.evaluate(x), 2.2)
    assert summ.ell_minus == pytest.approx(1.7)
    assert summ.ell_plus == pytest.approx(2.2)


def test_summary_variable_p_endpoints():
    summ = exponent_summary(make(p="2 + 0.3*x", q="2.4", s="0"))
    assert abs(summ.p_minus - 2.0) < 1e-12
    assert abs(summ.p_plus - 2.3) < 1e-12


def test_summary_critical_exponent_error():
    with pytest.raises(CriticalExponentError):
        exponent_summary(make(p="3", q="2.5", N=3))


def test_summary_is_idempotent():
    data = make(p="2 + 0.2*x", q="2.4", s="1 - 2*x")
    a, b = exponent_summary(data), exponent_summary(data)
    assert (a.p_minus, a.ell_minus, a.ell_plus) == (b.p_minus, b.ell_minus, b.ell_plus)


def test_pick_epsilon_closed_form_threshold():
    eps = pick_epsilon(make(p="2", q="2", s="0", N=4))
    threshold = 2 * np.sqrt(5) - 4  # root of eps^2 + 8 eps - 4
    assert eps < threshold
    assert 2 * eps >= threshold  # first grid value below the threshold
    assert eps == 0.25


def test_pick_epsilon_strict_on_grid():
    data = make(p="2", q="2.2")
    eps = pick_epsilon(data)
    x = np.linspace(0, 1, 1000)
    c = data.coefficients(x)
    m = np.minimum(c.p, c.q - eps)
    n = np.maximum(c.p, c.q + eps)
    assert np.all(3 * m / (3 - m) - n > 0)


def test_pick_epsilon_near_failure():
    # ratio 1 + 1/N - 1e-3
    q = 2 * (1 + 1 / 3 - 1e-3)
    data = make(p="2", q=str(q), s="0")
    assert validate_hypotheses(data)["H1.ratio"].passed
    eps = pick_epsilon(data)
    c = data.coefficients(np.linspace(0, 1, 1000))
    m = np.minimum(c.p, c.q - eps)
    assert 0 < eps < 1
    assert np.all(3 * m / (3 - m) - np.maximum(c.p, c.q + eps) > 0)


def test_pick_epsilon_shrinks_when_ratio_is_tight():
    # p near 1: p* - p is small, so n_eps = q + eps must stay below 1.2727
    data = make(p="1.05", q="1.224", s="0", N=6)
    assert validate_hypotheses(data).passed
    eps = pick_epsilon(data)
    assert eps == 2.0 ** -5
    assert 1.224 + eps < 6 * 1.05 / 4.95


@given(p0=st.floats(1.6, 2.2), dp=st.floats(-0.2, 0.2), q0=st.floats(1.6, 2.2),
       s0=st.floats(-0.4, 0.8))
def test_report_constants_hold_at_every_scan_point(p0, dp, q0, s0):
    data = make(p=f"{p0} + {dp}*x", q=str(q0), s=str(s0), N=4)
    rep = validate_hypotheses(data, 200)
    c = data.coefficients(np.linspace(0, 1, 200))
    assert np.all(c.q + c.s >= rep.r)
    assert np.all(c.a + c.b >= rep.d)


@given(dp=st.floats(-0.3, 0.3), n=st.integers(3, 60))
def test_summary_resolution_monotone(dp, n):
    data = make(p=f"2 + {dp}*x*(1 - x)", q="2.3", s="0.2", N=4)
    coarse = exponent_summary(data, grid_resolution=n)
    fine = exponent_summary(data, grid_resolution=4 * (n - 1) + 1)  # nested grid
    lip = abs(dp)
    h = 1 / (n - 1)
    assert fine.p_minus <= coarse.p_minus + 1e-15
    assert fine.p_plus >= coarse.p_plus - 1e-15
    assert coarse.p_minus - fine.p_minus <= lip * h + 1e-12


def test_scalar_field_clamp_and_min():
    f = ScalarField("clamp(2*x, 0.2, 1.5) + min(x, 0.1)", "p", 1)
    assert np.allclose(f.evaluate(np.array([0.0, 0.5, 1.0])), [0.2, 1.1, 1.6])
