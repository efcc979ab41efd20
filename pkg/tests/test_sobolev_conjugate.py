import numpy as np
import pytest

from musielak.coefficients import Coeffs
from musielak.errors import DomainError
from musielak.phi_functions import eval_S
from musielak.sobolev_conjugate import (
    SobolevConjugate, a1_bound, check_critical_comparison, check_lower_bounds, conjugate_inverse,
    conjugate_value, ell_stability,
)


def power_case(p=2.0, N=3.0, a=1.0):
    return Coeffs.constant(p=p, a=a, b=0.0, N=N)


def test_near_zero_closed_forms_in_the_plane():
    c = power_case(N=2)
    assert abs(conjugate_inverse(c, 1.0, 1.0) - 2.0) <= 1e-10
    assert abs(conjugate_value(c, 2.0, 1.0) - 1.0) <= 1e-10


def test_zero_maps_to_zero():
    c = Coeffs.constant(p=2, q=2.5, s=0.5)
    conj = SobolevConjugate(c, 2.0)
    assert conj.inverse(0.0) == 0.0
    assert conj.value(0.0) == 0.0


def test_splice_image():
    c = Coeffs.constant(p=2, q=2.5, s=0.5, N=3)
    ell = 3.0
    conj = SobolevConjugate(c, ell)
    S_ell = float(eval_S(c, ell))
    assert conj.splice_image == pytest.approx(3 * ell / 2 * S_ell ** (-1 / 3), rel=1e-15)
    left = conj.inverse(S_ell)
    right = conj.inverse(np.nextafter(S_ell, np.inf))
    assert abs(left - conj.splice_image) <= 1e-12 * conj.splice_image
    assert abs(right - left) <= 1e-12 * left


@pytest.mark.parametrize("p,N,a", [(2.0, 3.0, 1.0), (1.5, 2.0, 1.0), (2.5, 4.0, 0.7)])
def test_pure_power_antiderivative(p, N, a):
    # a tau^{1/p - 1 - 1/N} / a^{1/p} integrates to p* tau^{1/p*} / a^{1/p}
    c = power_case(p, N, a)
    ell = 1.5
    conj = SobolevConjugate(c, ell)
    S_ell = a * ell**p
    pc = N * p / (N - p)
    s = np.geomspace(S_ell * 1.01, 1e6, 60)
    exact = conj.splice_image + pc * (s ** (1 / pc) - S_ell ** (1 / pc)) / a ** (1 / p)
    got = conj.inverse(s)
    assert np.max(np.abs(got / exact - 1)) <= 1e-8


@pytest.mark.parametrize("s_exp", [-0.5, 0.5, 1.0])
def test_inverse_strictly_increasing_and_round_trip(s_exp):
    c = Coeffs.constant(p=2, q=2.4, s=s_exp, a=0.5, b=1.0)
    conj = SobolevConjugate(c, 2.0)
    s = np.geomspace(1e-6, 1e6, 200)
    inv = conj.inverse(s)
    assert np.all(np.diff(inv) > 0)
    t = np.geomspace(1e-3, inv[-1], 50)
    back = conj.inverse(conj.value(t))
    assert np.max(np.abs(back - t) / t) <= 1e-8


def test_value_near_zero_closed_form():
    c = Coeffs.constant(p=2, q=2.5, s=0.5, N=3)
    ell = 2.0
    conj = SobolevConjugate(c, ell)
    S_ell = float(eval_S(c, ell))
    t = np.linspace(0, conj.splice_image, 7)
    closed = (S_ell * 2 / (3 * ell)) ** 1.5 * t**1.5
    assert np.allclose(conj.value(t), closed, rtol=1e-14, atol=0)


def test_panel_doubling_drift():
    c = Coeffs.constant(p=2, q=2.5, s=0.5)
    conj = SobolevConjugate(c, 2.0)
    assert conj.quadrature_drift(np.geomspace(1.0, 1e6, 40)) < 1e-6


def test_rejects_bad_arguments():
    c = Coeffs.constant()
    with pytest.raises(DomainError):
        SobolevConjugate(c, 0.5)
    with pytest.raises(DomainError):
        SobolevConjugate(c, 2.0).inverse(-1.0)


def test_a1_equality_when_b_vanishes():
    c = power_case(2.0, 3.0, 1.0)
    conj = SobolevConjugate(c, 2.0)
    t = np.geomspace(conj.splice_image, 1e4, 300)
    ratio = conj.value(t) / a1_bound(c, t, 2.0)
    assert np.max(np.abs(ratio - 1)) <= 1e-6
    rep = check_lower_bounds(c, t, 2.0)
    assert rep.passed


def test_a1_splice_point_consistent():
    c = power_case(2.0, 3.0, 1.0)
    conj = SobolevConjugate(c, 2.0)
    t0 = conj.splice_image
    assert a1_bound(c, t0, 2.0) == pytest.approx(float(conj.value(t0)), rel=1e-12)


def test_a2_constant_positive_and_refinement_stable():
    c = Coeffs.constant(a=0, q=2.5, s=1.0)
    conj = SobolevConjugate(c, 2.0)
    coarse = np.geomspace(conj.splice_image, 1e5, 200)
    fine = np.geomspace(conj.splice_image, 1e5, 399)
    r1 = check_lower_bounds(c, coarse, 2.0).part("A2_s_pos").constants["C"]
    r2 = check_lower_bounds(c, fine, 2.0).part("A2_s_pos").constants["C"]
    assert r1 > 0 and r2 > 0
    assert abs(r1 - r2) <= 0.05 * r1


def test_a2_nonpositive_branch():
    c = Coeffs.constant(a=0.5, q=2.4, s=-0.5)
    conj = SobolevConjugate(c, 2.0)
    rep = check_lower_bounds(c, np.geomspace(conj.splice_image, 1e5, 200), 2.0)
    assert rep.part("A2_s_nonpos").constants["C"] > 0
    assert rep.part("A1").passed


def test_lower_bounds_grid_must_start_at_splice_image():
    c = Coeffs.constant()
    with pytest.raises(DomainError):
        check_lower_bounds(c, [1e-3, 1.0], 2.0)


def test_critical_comparison_power_case():
    c = power_case(2.0, 3.0, 1.0)
    conj = SobolevConjugate(c, 2.0)
    t = np.geomspace(conj.splice_image, 1e6, 400)
    rep = check_critical_comparison(c, t, 2.0)
    assert rep.passed
    # ratio tends to (1/p*)^{p*} from above
    assert rep.constants["inf_ratio"] >= (1 / 6) ** 6 * (1 - 1e-6)


def test_critical_comparison_mixed_refinement():
    c = Coeffs.constant(p=2, q=2.4, s=0.5, a=0.8, b=1.2)
    conj = SobolevConjugate(c, 2.0)
    a = check_critical_comparison(c, np.geomspace(conj.splice_image, 1e6, 1000), 2.0)
    b = check_critical_comparison(c, np.geomspace(conj.splice_image, 1e6, 1999), 2.0)
    assert a.passed and b.passed
    assert abs(a.constants["inf_ratio"] / b.constants["inf_ratio"] - 1) <= 0.05


def test_ell_stability_is_bounded():
    c = Coeffs.constant(p=2, q=2.5, s=0.5)
    out = ell_stability(c, 2.0, np.geomspace(1.0, 1e4, 100))
    assert 0 < out["min_ratio"] <= out["max_ratio"] < np.inf
