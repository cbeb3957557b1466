"""Complex classical motion for ``H = p^2 - (ix)^N``.

Hamilton's equations ``dx/dt = 2p``, ``dp/dt = iN (ix)^(N-1)`` are
integrated together with ``L = log(ix)`` (``dL/dt = 2p/x``) for
non-integer ``N``.  ``L`` is continuous along the path, so ``exp(N L)`` is
``(ix)^N`` on the correct sheet and the sheet index is read off as the
multiple of ``2 pi`` separating ``Im L`` from the principal argument.
``p`` itself is the continued square root ``sqrt(E + (ix)^N)``; no sign
choices are needed after the first point, and a start at a turning point
(``p = 0``) is handled exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.special import gamma

from .errors import ConvergenceError, DomainError
from .semiclassic import turning_points

__all__ = [
    "Trajectory",
    "ClosureReport",
    "integrate_trajectory",
    "period",
    "detect_closure",
    "turning_point_orbit",
    "rescale",
]

ESCAPE_FACTOR = 50.0
MAX_PHASE_STEP = math.pi / 4


@dataclass
class Trajectory:
    """Sampled orbit.  ``sheet[k]`` is the Riemann sheet of ``(ix)^N`` at
    sample ``k``; ``branch_phase`` is the continued argument of
    ``sqrt(E + (ix)^N)``."""

    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    sheet: np.ndarray
    branch_phase: np.ndarray
    E: float
    N: float
    escaped: bool = False
    _dense: object = field(default=None, repr=False, compare=False)

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.x.tolist(), self.sheet.tolist()))

    @property
    def x0(self) -> complex:
        return complex(self.x[0])

    @property
    def integer_power(self) -> bool:
        return float(self.N).is_integer()

    def power(self, x=None, sheet=None):
        """``(ix)^N`` at the samples (or given points) on their sheets."""
        x = self.x if x is None else np.asarray(x, dtype=complex)
        if self.integer_power:
            return (1j * x) ** int(self.N)
        sheet = self.sheet if sheet is None else np.asarray(sheet)
        return np.exp(self.N * (np.log(1j * x) + 2j * np.pi * sheet))

    def energy_residual(self) -> float:
        return float(np.max(np.abs(self.p ** 2 - self.power() - self.E)))

    def max_phase_step(self) -> float:
        d = np.diff(self.branch_phase)
        return float(np.max(np.abs(d))) if len(d) else 0.0

    def state(self, t):
        """``(x, p, sheet)`` at time ``t`` from the dense solution."""
        if self._dense is None:
            raise DomainError("trajectory has no dense solution")
        y = self._dense(t)
        x = complex(y[0], y[1])
        p = complex(y[2], y[3])
        if self.integer_power:
            return x, p, 0
        L = complex(y[4], y[5])
        return x, p, _sheet_of(x, L)

    def mean_position(self, t_end: float | None = None) -> complex:
        """Time average of ``x`` over ``[0, t_end]`` (trapezoid rule)."""
        t, x = self.t, self.x
        if t_end is not None:
            keep = t <= t_end
            t, x = t[keep], x[keep]
        return complex(np.trapezoid(x, t) / (t[-1] - t[0]))

    def to_rows(self):
        return [(float(tt), float(xx.real), float(xx.imag), int(s))
                for tt, xx, s in zip(self.t, self.x, self.sheet)]


@dataclass(frozen=True)
class ClosureReport:
    closed: bool
    period: float | None
    closure_distance: float
    turns: float
    approaches: tuple = ()

    def __post_init__(self):
        if self.closed and self.period is None:
            raise ValueError("closed orbit needs a period")


def _sheet_of(x, L):
    principal = cmath.phase(1j * x)
    return int(round((L.imag - principal) / (2 * math.pi)))


def _rhs_factory(N):
    if float(N).is_integer():
        n = int(N)

        def rhs(t, y):
            x = complex(y[0], y[1])
            p = complex(y[2], y[3])
            dx = 2 * p
            dp = 1j * n * (1j * x) ** (n - 1)
            return [dx.real, dx.imag, dp.real, dp.imag]
    else:
        def rhs(t, y):
            x = complex(y[0], y[1])
            p = complex(y[2], y[3])
            L = complex(y[4], y[5])
            dx = 2 * p
            dp = 1j * N * cmath.exp((N - 1) * L)
            dL = dx / x
            return [dx.real, dx.imag, dp.real, dp.imag, dL.real, dL.imag]
    return rhs


def _initial_momentum(x0, E, N, sheet):
    w = E + cmath.exp(N * (cmath.log(1j * x0) + 2j * math.pi * sheet))
    p0 = cmath.sqrt(w)
    # orientation: dx/dt = 2p starts with non-negative imaginary part
    if p0.imag < 0 or (p0.imag == 0 and p0.real < 0):
        p0 = -p0
    return p0


def integrate_trajectory(x0: complex, E: float, N: float, t_max: float, dt: float, *,
                         p0: complex | None = None, sheet: int = 0,
                         escape_radius: float | None = None,
                         rtol: float = 1e-12, atol: float = 1e-12) -> Trajectory:
    """Integrate from ``x0`` for ``0 <= t <= t_max``, sampling every ``dt``.

    ``p0`` defaults to the root of ``p^2 = E + (ix0)^N`` with
    ``Im dx/dt >= 0``; pass ``p0=0`` to start at rest from a turning point.
    The run stops early (``escaped=True``) once ``|x|`` exceeds
    ``escape_radius`` (default ``50 |x_pm|``).  Samples are subdivided
    wherever the branch phase would move by more than ``pi/4``.
    """
    if not E > 0:
        raise DomainError("E must be positive")
    if not N > 1:
        raise DomainError("N must exceed 1")
    if not (t_max > 0 and dt > 0):
        raise DomainError("t_max and dt must be positive")
    x0 = complex(x0)
    if x0 == 0 and not float(N).is_integer():
        raise DomainError("x0 = 0 is a branch point for non-integer N")
    if p0 is None:
        p0 = _initial_momentum(x0, E, N, sheet)
    p0 = complex(p0)
    if escape_radius is None:
        escape_radius = ESCAPE_FACTOR * E ** (1.0 / N)

    y0 = [x0.real, x0.imag, p0.real, p0.imag]
    if not float(N).is_integer():
        L0 = cmath.log(1j * x0) + 2j * math.pi * sheet
        y0 += [L0.real, L0.imag]

    def escape(t, y):
        return math.hypot(y[0], y[1]) - escape_radius
    escape.terminal = True
    escape.direction = 1

    sol = integrate.solve_ivp(_rhs_factory(N), (0.0, t_max), y0, method="DOP853",
                              rtol=rtol, atol=atol, dense_output=True, events=escape)
    if sol.status < 0:
        raise ConvergenceError(f"integration failed: {sol.message}")
    t_end = float(sol.t[-1])
    escaped = sol.status == 1

    t = np.arange(0.0, t_end, dt)
    if t_end - t[-1] > 1e-12 * max(1.0, t_end):
        t = np.append(t, t_end)
    traj = _sample(sol.sol, t, E, N, escaped)
    # refine where the branch phase moves too fast between samples
    for _ in range(12):
        bad = np.nonzero(np.abs(np.diff(traj.branch_phase)) >= MAX_PHASE_STEP)[0]
        if len(bad) == 0:
            break
        mids = 0.5 * (traj.t[bad] + traj.t[bad + 1])
        traj = _sample(sol.sol, np.sort(np.concatenate([traj.t, mids])), E, N, escaped)
    return traj


def _sample(dense, t, E, N, escaped):
    y = dense(t)
    x = y[0] + 1j * y[1]
    p = y[2] + 1j * y[3]
    if float(N).is_integer():
        sheet = np.zeros(len(t), dtype=int)
        w = E + (1j * x) ** int(N)
    else:
        L = y[4] + 1j * y[5]
        sheet = np.rint((L.imag - np.angle(1j * x)) / (2 * np.pi)).astype(int)
        w = E + np.exp(N * L)
    # sqrt(w) is continued along the path: unwrap arg w, halve it
    ang = np.angle(w)
    tiny = np.abs(w) < 1e-14 * max(1.0, E)
    if np.any(tiny):
        # arg is undefined at a turning point; borrow the neighbour's value
        idx = np.arange(len(w))
        good = ~tiny
        ang = np.interp(idx, idx[good], ang[good]) if np.any(good) else np.zeros(len(w))
    phase = 0.5 * np.unwrap(ang)
    return Trajectory(t=np.asarray(t), x=x, p=p, sheet=sheet, branch_phase=phase,
                      E=float(E), N=float(N), escaped=bool(escaped), _dense=dense)


def period(E: float, N: float) -> float:
    """Closed-form period of the orbits enclosing the turning points ``x_pm``."""
    if not E > 0:
        raise DomainError("E must be positive")
    if N < 2:
        raise DomainError(f"N={N} < 2: classical paths spiral and have no period")
    return float(2.0 * E ** ((2.0 - N) / (2.0 * N)) * math.cos((N - 2.0) * math.pi / (2.0 * N))
                 * gamma(1.0 + 1.0 / N) * math.sqrt(math.pi) / gamma(0.5 + 1.0 / N))


def _turns(traj: Trajectory) -> float:
    if traj.N >= 1:
        tp = turning_points(traj.E, traj.N)
        c = 0.5 * (tp.x_minus + tp.x_plus)
    else:
        c = 0j
    ang = np.unwrap(np.angle(traj.x - c))
    return float(abs(ang[-1] - ang[0]) / (2 * math.pi))


def _approaches(traj: Trajectory):
    d = np.abs(traj.x - traj.x0)
    i = np.nonzero((d[1:-1] < d[:-2]) & (d[1:-1] <= d[2:]))[0] + 1
    return tuple(float(d[k]) for k in i)


def detect_closure(traj: Trajectory, tol: float = 1e-6) -> ClosureReport:
    """First return to ``x0`` on the starting sheet, moving the same way.

    For a moving start the return is where ``x - x0`` crosses the plane
    normal to the initial velocity.  For a start at rest (a turning point)
    it is where ``p`` passes back through zero with the initial
    acceleration.  Crossings are refined on the dense solution.
    """
    turns = _turns(traj)
    apps = _approaches(traj)
    x0 = traj.x0
    p0 = complex(traj.p[0])
    scale = max(abs(x0), traj.E ** (1.0 / traj.N))
    at_rest = abs(p0) < 1e-12 * max(1.0, math.sqrt(traj.E))
    if at_rest:
        a0 = 1j * traj.N * complex(traj.power([x0], [traj.sheet[0]])[0]) / (1j * x0)
        ref = a0
        g = np.real(traj.p * np.conj(ref))
    else:
        ref = p0
        g = np.real((traj.x - x0) * np.conj(ref))
    best = math.inf
    # skip the departure: wait until the orbit has left the start
    left = np.nonzero(np.abs(traj.x - x0) > 10 * tol * scale + 1e-3 * scale)[0]
    start = left[0] if len(left) else len(g)
    for k in range(start, len(g) - 1):
        if not (g[k] < 0 <= g[k + 1]):
            continue
        ta, tb = traj.t[k], traj.t[k + 1]
        if traj._dense is not None:
            def f(tt):
                x, p, _ = traj.state(tt)
                return (p * ref.conjugate()).real if at_rest else ((x - x0) * ref.conjugate()).real
            fa, fb = f(ta), f(tb)
            tc = optimize.brentq(f, ta, tb, xtol=1e-14, rtol=1e-15) if fa * fb < 0 else (ta if fa == 0 else tb)
            x, p, sh = traj.state(tc)
        else:
            w = -g[k] / (g[k + 1] - g[k])
            tc = ta + w * (tb - ta)
            x = traj.x[k] + w * (traj.x[k + 1] - traj.x[k])
            p = traj.p[k] + w * (traj.p[k + 1] - traj.p[k])
            sh = traj.sheet[k + 1]
        dist = abs(x - x0)
        best = min(best, dist)
        same_way = at_rest or (p * p0.conjugate()).real > 0
        if dist < tol * scale and same_way and sh == traj.sheet[0]:
            return ClosureReport(True, float(tc), float(dist), turns, apps)
    if not math.isfinite(best):
        best = float(min(apps)) if apps else float(abs(traj.x[-1] - x0))
    return ClosureReport(False, None, float(best), turns, apps)


def turning_point_orbit(E: float, N: float, *, dt: float | None = None,
                        tol: float = 1e-7) -> Trajectory:
    """Orbit from ``x_-`` through ``x_+`` and back, one full period long.

    Raises ConvergenceError if the orbit does not return within three
    predicted periods.
    """
    T = period(E, N)
    tp = turning_points(E, N)
    dt = dt or T / 2000
    traj = integrate_trajectory(tp.x_minus, E, N, 3 * T, dt, p0=0.0)
    # the far end must be visited on the way
    if np.min(np.abs(traj.x - tp.x_plus)) > 1e-3 * abs(tp.x_plus):
        raise ConvergenceError("orbit from x_- never reached x_+ (branch mishandled?)")
    rep = detect_closure(traj, tol)
    if not rep.closed:
        raise ConvergenceError(
            f"orbit from x_- did not return within 3 periods (closest {rep.closure_distance:.2e})")
    Tm = rep.period
    t = np.append(traj.t[traj.t < Tm], Tm)
    return _sample(traj._dense, t, E, N, False)


def rescale(traj: Trajectory) -> np.ndarray:
    """Samples divided by ``max |x|`` (for plotting spirals on one scale)."""
    return traj.x / np.max(np.abs(traj.x))
