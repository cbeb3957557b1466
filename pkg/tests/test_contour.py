import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ptlab.contour import (Contour, PowerPotential, ShiftedOscillator, build_contour,
                           conditioned_depth, default_rho_max, dyson_vs_pt_wedges,
                           potential_eval, update_sheet, wedge_angles)
from ptlab.errors import DomainError

exponents = st.floats(min_value=1.05, max_value=8.0)


@pytest.mark.parametrize("N, right, opening", [
    (2.0, 0.0, math.pi / 2),
    (3.0, -math.pi / 10, 2 * math.pi / 5),
    (4.0, -math.pi / 6, math.pi / 3),
])
def test_wedge_centres(N, right, opening):
    g = wedge_angles(N)
    assert g.theta_right == pytest.approx(right, abs=1e-15)
    assert g.theta_left == pytest.approx(-math.pi - right, abs=1e-15)
    assert g.opening == pytest.approx(opening)


@pytest.mark.parametrize("N", [1.0, 0.5, -2.0])
def test_no_problem_at_or_below_one(N):
    with pytest.raises(DomainError, match="contiguous"):
        wedge_angles(N)


@given(exponents)
def test_wedge_centre_is_decay_direction(N):
    # the WKB exponent x sqrt(V) is real on the centre ray exactly when
    # x^2 V(x) is real and positive, V = -(ix)^N
    g = wedge_angles(N)
    pot = PowerPotential(N)
    for th in (g.theta_left, g.theta_right):
        x = 2.0 * np.exp(1j * th)
        z = x * x * pot(x)
        assert z.real > 0
        assert abs(z.imag) <= 1e-9 * abs(z)


@given(exponents, st.floats(1.0, 30.0), st.floats(0.0, 1.5))
def test_contour_is_pt_symmetric(N, rho, depth):
    c = build_contour(N, rho, 32, junction_depth=depth)
    m = c.mirror_index()
    assert np.allclose(c.points[m], -np.conj(c.points), atol=1e-13)
    assert np.allclose(c.weights[m], np.conj(c.weights), atol=1e-15)
    assert c.points[c.junction_index] == pytest.approx(-1j * depth)
    assert c.is_pt_symmetric


@pytest.mark.parametrize("N, depth", [(2.0, 0.0), (3.0, 0.0), (3.0, 0.8), (2.5, 0.3)])
def test_gauss_legendre_weights_integrate_gaussian(N, depth):
    # the rays stay within pi/4 of the real axis, so the Gaussian integral
    # is unchanged by the deformation
    c = build_contour(N, 12.0, 200, junction_depth=depth)
    val = np.sum(c.weights * np.exp(-c.points ** 2))
    assert val == pytest.approx(math.sqrt(math.pi), abs=1e-12)


def test_ray_angle_outside_wedge_rejected():
    g = wedge_angles(3.0)
    with pytest.raises(DomainError, match="outside its wedge"):
        build_contour(3.0, 10.0, theta_right=g.theta_right + g.opening)
    with pytest.raises(DomainError):
        build_contour(3.0, 10.0, junction_depth=-0.1)
    with pytest.raises(DomainError):
        build_contour(3.0, -1.0)


def test_perturbed_angles_break_only_when_asymmetric():
    g = wedge_angles(3.0)
    c = build_contour(3.0, 10.0, 32, theta_right=g.theta_right + 0.05)
    assert c.is_pt_symmetric
    c2 = build_contour(3.0, 10.0, 32, theta_right=g.theta_right + 0.05,
                       theta_left=g.theta_left + 0.05)
    assert not c2.is_pt_symmetric


def test_contour_json_round_trip():
    c = build_contour(3.0, 9.5, 48, junction_depth=0.4)
    back = Contour.from_json(c.to_json())
    assert np.array_equal(back.points, c.points)
    assert np.array_equal(back.weights, c.weights)
    assert back.junction_depth == 0.4


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(1.1, 6.0), st.integers(-2, 2))
def test_sheet_shift_multiplies_by_phase(a, b, N, k):
    x = complex(a, b)
    if abs(x) < 1e-6:
        return
    base = potential_eval(x, 0, N)
    shifted = potential_eval(x, k, N)
    assert shifted == pytest.approx(base * np.exp(2j * np.pi * k * N), rel=1e-10)


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(2, 6), st.integers(-2, 2))
def test_integer_power_single_valued(a, b, N, k):
    x = complex(a, b)
    ref = (1j * x) ** N
    assert potential_eval(x, k, float(N)) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_update_sheet_counts_cut_crossings():
    assert update_sheet(0.1 + 1j, -0.1 + 1j, 0) == 1
    assert update_sheet(-0.1 + 1j, 0.1 + 1j, 1) == 0
    # the negative imaginary axis carries no cut
    assert update_sheet(0.1 - 1j, -0.1 - 1j, 0) == 0
    assert update_sheet(0.1 + 1j, 0.2 + 1j, 3) == 3


def test_power_potential_derivative():
    pot = PowerPotential(2.7)
    x = np.array([0.5 - 0.3j, -1.2 - 0.8j, 2.0 - 0.1j])
    h = 1e-6
    fd = (pot(x + h) - pot(x - h)) / (2 * h)
    assert np.allclose(pot.derivative(x), fd, rtol=1e-7)


def test_shifted_oscillator_derivative():
    pot = ShiftedOscillator(0.3)
    x = np.array([0.5, -1.0 - 0.2j])
    assert np.allclose(pot.derivative(x), 2 * x + 0.6j)
    assert pot.asymptotic_N == 2.0 and pot.energy_scale == 2.0


def test_default_rho_grows_with_energy():
    pot = PowerPotential(3.0)
    rhos = [default_rho_max(pot, E) for E in (1.0, 10.0, 100.0, 600.0)]
    assert rhos == sorted(rhos)
    assert rhos[0] > 2.0


def test_conditioned_depth():
    assert conditioned_depth(2.0, 50.0) == 0.0
    assert conditioned_depth(1.5, 50.0) == 0.0
    d = conditioned_depth(3.0, 10.0)
    xp = 10.0 ** (1 / 3) * np.exp(-1j * np.pi / 6)
    assert d == pytest.approx(0.85 * -xp.imag, abs=1e-3)


def test_pt_wedges_differ_from_rotated_coupling_wedges():
    dyson, pt = dyson_vs_pt_wedges()
    assert pt.pt_symmetric
    assert not dyson.pt_symmetric
    assert dyson.first == pt.first
