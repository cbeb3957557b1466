import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptlab.classical import (detect_closure, integrate_trajectory, period, rescale,
                             turning_point_orbit)
from ptlab.errors import DomainError
from ptlab.semiclassic import turning_points


def test_oscillator_period_is_pi_for_any_energy():
    for E in (0.5, 1.0, 7.0):
        assert period(E, 2.0) == pytest.approx(math.pi, rel=1e-14)


@pytest.mark.parametrize("N", [2.0, 2.5, 3.0, 4.0])
def test_turning_point_orbit_period(N):
    traj = turning_point_orbit(1.0, N)
    assert traj.t[-1] == pytest.approx(period(1.0, N), abs=1e-8)
    assert traj.energy_residual() < 1e-9
    # the orbit ends where it started
    assert abs(traj.x[-1] - traj.x[0]) < 1e-6


def test_orbit_pt_mirror():
    # x(t) -> -x(-t)* is a symmetry; a start at rest is even in t, so the
    # orbit from x_+ is the mirror of the orbit from x_-
    E, N = 1.0, 3.0
    tp = turning_points(E, N)
    T = period(E, N)
    a = integrate_trajectory(tp.x_minus, E, N, T, T / 200, p0=0.0)
    b = integrate_trajectory(tp.x_plus, E, N, T, T / 200, p0=0.0)
    n = min(len(a.t), len(b.t))
    assert np.allclose(a.t[:n], b.t[:n])
    assert np.allclose(b.x[:n], -np.conj(a.x[:n]), atol=1e-8)


@settings(max_examples=12)
@given(st.sampled_from([2.0, 3.0, 4.0]), st.floats(0.05, 1.2))
def test_imaginary_axis_starts_close_with_period(N, b):
    T = period(1.0, N)
    traj = integrate_trajectory(-1j * b, 1.0, N, 1.5 * T, T / 300)
    rep = detect_closure(traj)
    assert rep.closed
    assert rep.period == pytest.approx(T, rel=1e-7)
    scale = max(1.0, float(np.max(np.abs(traj.power()))))
    assert traj.energy_residual() < 1e-8 * scale


@settings(max_examples=12)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 0.3), st.sampled_from([3.0, 4.0]))
def test_energy_conserved(a, b, N):
    x0 = complex(a, b)
    if abs(x0) < 0.05:
        return
    traj = integrate_trajectory(x0, 1.0, N, 3.0, 0.05)
    scale = max(1.0, float(np.max(np.abs(traj.power()))))
    assert traj.energy_residual() < 1e-8 * scale


def test_cubic_orbit_lies_below_real_axis_with_negative_mean():
    traj = turning_point_orbit(1.0, 3.0)
    assert np.max(traj.x.imag) == pytest.approx(-0.5, abs=1e-6)
    mean = traj.mean_position()
    assert mean.imag < 0
    assert abs(mean.real) < 1e-4


def test_path_from_upper_turning_point_runs_off():
    traj = integrate_trajectory(1j, 1.0, 3.0, 10.0, 0.01, p0=0.0)
    assert traj.escaped
    assert traj.x[-1].imag > 40
    assert np.max(np.abs(traj.x.real)) < 1e-9


def test_non_integer_orbit_visits_three_sheets():
    T = period(1.0, 2.5)
    traj = integrate_trajectory(0.3 + 0.2j, 1.0, 2.5, 3 * T, T / 300)
    assert set(traj.sheet.tolist()) >= {-1, 0, 1}
    assert traj.energy_residual() < 1e-7
    assert traj.max_phase_step() < math.pi / 4


def test_sheet_bookkeeping_matches_dense_state():
    T = period(1.0, 2.5)
    traj = integrate_trajectory(0.3 + 0.2j, 1.0, 2.5, 3 * T, T / 300)
    for k in (0, len(traj.t) // 3, len(traj.t) - 1):
        x, p, sh = traj.state(traj.t[k])
        assert x == pytest.approx(traj.x[k])
        assert sh == traj.sheet[k]


@pytest.mark.parametrize("N", [1.8, 1.85, 1.9])
def test_spirals_do_not_close(N):
    tp = turning_points(1.0, N)
    traj = integrate_trajectory(tp.x_minus, 1.0, N, 200.0, 0.01, p0=0.0,
                                escape_radius=10.0)
    assert traj.escaped
    assert not detect_closure(traj).closed


def test_spiral_turns_increase_with_n():
    turns = []
    for N in (1.8, 1.85, 1.9):
        tp = turning_points(1.0, N)
        traj = integrate_trajectory(tp.x_minus, 1.0, N, 200.0, 0.01, p0=0.0,
                                    escape_radius=10.0)
        turns.append(detect_closure(traj).turns)
    assert turns[0] < turns[1] < turns[2]


def test_rescale_unit_maximum():
    traj = turning_point_orbit(1.0, 3.0)
    r = rescale(traj)
    assert np.max(np.abs(r)) == pytest.approx(1.0)


def test_rows_and_samples():
    traj = integrate_trajectory(-0.5j, 1.0, 2.0, 1.0, 0.25)
    rows = traj.to_rows()
    assert len(rows) == len(traj.t)
    # the requested grid survives phase-step refinement
    assert set(np.round(traj.t, 12)) >= {0.0, 0.25, 0.5, 0.75, 1.0}
    assert rows[0][:3] == (0.0, pytest.approx(0.0, abs=1e-15), -0.5)


def test_domain_errors():
    with pytest.raises(DomainError):
        period(1.0, 1.9)
    with pytest.raises(DomainError):
        integrate_trajectory(0j, 1.0, 2.5, 1.0, 0.1)
    with pytest.raises(DomainError):
        integrate_trajectory(1j, -1.0, 3.0, 1.0, 0.1)
    with pytest.raises(DomainError):
        integrate_trajectory(1j, 1.0, 3.0, -1.0, 0.1)


def test_sheet_from_log_matches_crossing_count():
    # two routes to the sheet index: continued log(ix) against counting cut
    # crossings between consecutive samples
    from ptlab.contour import update_sheet
    T = period(1.0, 2.5)
    traj = integrate_trajectory(0.3 + 0.2j, 1.0, 2.5, 3 * T, T / 600)
    counted = [0]
    for a, b in zip(traj.x[:-1], traj.x[1:]):
        counted.append(update_sheet(complex(a), complex(b), counted[-1]))
    assert counted == traj.sheet.tolist()
