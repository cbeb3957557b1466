"""Branch-aware potentials, Stokes-wedge geometry and PT-symmetric contours.

The Hamiltonian family is ``H = p^2 - (ix)^N``.  ``(ix)^N`` is defined as
``exp(N log(ix))`` with the principal logarithm, whose cut runs up the
positive imaginary x axis.  Paths that cross the cut carry an integer sheet
index that shifts the logarithm by ``2 pi i * sheet``.

A contour is made of two straight rays along the centres of the left and
right Stokes wedges, joined at the origin or at a point ``-i d`` below it.
Rays are sampled with Gauss-Legendre panels (geometrically graded inside
``|x| < 1``) so that the same samples serve as ODE output nodes and as
quadrature nodes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "WedgeGeometry",
    "WedgePair",
    "PowerPotential",
    "ShiftedOscillator",
    "Contour",
    "wedge_angles",
    "potential_eval",
    "update_sheet",
    "build_contour",
    "default_rho_max",
    "conditioned_depth",
    "dyson_vs_pt_wedges",
]

NODES_PER_PANEL = 8
WKB_DECAY_TARGET = 35.0


@dataclass(frozen=True)
class WedgeGeometry:
    N: float
    theta_left: float
    theta_right: float
    opening: float

    def contains(self, angle: float, side: str = "right") -> bool:
        """True when ``angle`` lies strictly inside the chosen wedge."""
        centre = self.theta_right if side == "right" else self.theta_left
        d = (angle - centre + math.pi) % (2 * math.pi) - math.pi
        return abs(d) < self.opening / 2

    def edge_distance(self, angle: float, side: str = "right") -> float:
        centre = self.theta_right if side == "right" else self.theta_left
        d = (angle - centre + math.pi) % (2 * math.pi) - math.pi
        return self.opening / 2 - abs(d)


def wedge_angles(N: float) -> WedgeGeometry:
    """Centres and opening of the left/right Stokes wedges for ``-(ix)^N``.

    Raises
    ------
    DomainError
        For ``N <= 1``.  At ``N = 1`` the wedges touch along the positive
        imaginary axis and the contour can be pushed off to infinity, so
        there is no eigenvalue problem.
    """
    N = float(N)
    if not N > 1.0:
        raise DomainError(
            f"N={N}: wedges are contiguous at N=1 (and overlap below); "
            "no eigenvalue problem for N <= 1"
        )
    tilt = (N - 2.0) * math.pi / (2.0 * N + 4.0)
    return WedgeGeometry(
        N=N,
        theta_left=-math.pi + tilt,
        theta_right=-tilt,
        opening=2.0 * math.pi / (N + 2.0),
    )


def potential_eval(x, sheet=0, N=2.0):
    """Return ``(ix)^N`` on the requested sheet.

    ``log(ix)`` is the principal logarithm plus ``2 pi i * sheet``.  Works
    elementwise on arrays.  ``x = 0`` maps to 0 for ``N > 0``.

    Raises
    ------
    OverflowError
        If the result is not finite for finite input.
    """
    x = np.asarray(x, dtype=complex)
    sheet = np.asarray(sheet)
    z = 1j * x
    zero = z == 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        logz = np.log(np.where(zero, 1.0, z)) + 2j * np.pi * sheet
        out = np.exp(N * logz)
    out = np.where(zero, 0.0, out)
    bad = ~np.isfinite(out) & np.isfinite(x)
    if np.any(bad):
        where = np.asarray(x)[bad].ravel()[0]
        raise OverflowError(f"(ix)^N overflows at x={where!r}, N={N}")
    return out[()] if out.ndim == 0 else out


def update_sheet(x_prev: complex, x_next: complex, sheet: int) -> int:
    """Advance the sheet index across a step from ``x_prev`` to ``x_next``.

    A crossing happens when the step straddles ``Re x = 0`` with
    ``Im x > 0`` at the crossing.  Moving from right to left continues
    ``arg(ix)`` past ``+pi`` and raises the sheet; the reverse lowers it.
    """
    a, b = x_prev.real, x_next.real
    if (a > 0) == (b > 0) or a == b:
        return sheet
    t = a / (a - b)
    y = x_prev.imag + t * (x_next.imag - x_prev.imag)
    if y <= 0:
        return sheet
    return sheet + 1 if a > 0 else sheet - 1


class PowerPotential:
    """``V(x) = -(ix)^N`` on the principal sheet, for ``-phi'' + V phi = E phi``."""

    kind = "power"

    def __init__(self, N: float):
        if not N >= 1:
            raise DomainError(f"N={N} < 1 is outside the supported family")
        self.N = float(N)
        # Eigenvalues of p^2 + V are reported as-is.
        self.energy_scale = 1.0

    @property
    def asymptotic_N(self) -> float:
        return self.N

    def __call__(self, x):
        return -potential_eval(x, 0, self.N)

    def derivative(self, x):
        x = np.asarray(x, dtype=complex)
        return -1j * self.N * potential_eval(x, 0, self.N - 1.0)

    def to_dict(self):
        return {"kind": self.kind, "N": self.N}

    def __repr__(self):
        return f"PowerPotential(N={self.N})"


class ShiftedOscillator:
    """``H = p^2/2 + x^2/2 + i eps x`` rewritten as ``p^2 + x^2 + 2 i eps x``.

    Eigenvalues of the rewritten operator are twice those of ``H``;
    ``energy_scale = 2`` records the conversion.
    """

    kind = "shifted"
    asymptotic_N = 2.0

    def __init__(self, eps: float):
        self.eps = float(eps)
        self.energy_scale = 2.0

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        return x * x + 2j * self.eps * x

    def derivative(self, x):
        x = np.asarray(x, dtype=complex)
        return 2 * x + 2j * self.eps

    def to_dict(self):
        return {"kind": self.kind, "eps": self.eps}

    def __repr__(self):
        return f"ShiftedOscillator(eps={self.eps})"


def _decay_exponent(potential, E, theta, rho, n=400, origin=0j):
    """WKB decay ``int Re(sqrt(V - E) e^{i theta}) dr`` along a ray, counted
    from the last radius where ``|V| <= |E|`` out to ``rho``."""
    r = np.linspace(0.0, rho, n + 1)
    x = origin + r * np.exp(1j * theta)
    v = potential(x)
    s = np.sqrt(v - E + 0j) * np.exp(1j * theta)
    g = np.maximum(s.real, 0.0)
    inside = np.abs(v) <= abs(E)
    last = np.nonzero(inside)[0][-1]
    g[: last + 1] = 0.0
    return float(np.trapezoid(g, r))


def default_rho_max(potential, E_max: float, theta: float | None = None,
                    target: float = WKB_DECAY_TARGET,
                    junction_depth: float = 0.0) -> float:
    """Smallest ray length whose WKB decay exponent beyond the turning
    point exceeds ``target`` for every energy up to ``E_max``.  The ray
    starts at ``-i junction_depth``."""
    if theta is None:
        theta = wedge_angles(potential.asymptotic_N).theta_right
    E_max = max(float(np.real(E_max)), 1.0)
    rho = 2.0
    origin = -1j * junction_depth
    while _decay_exponent(potential, E_max, theta, rho, origin=origin) < target:
        rho *= 1.1
        if rho > 1e3:
            raise DomainError("no decaying region found along the ray")
    return round(rho, 3)


def conditioned_depth(N: float, E: float, factor: float = 0.85) -> float:
    """Junction depth that keeps states near energy ``E`` well conditioned.

    Places the junction a fraction ``factor`` of the way down to the right
    turning point of ``E + (ix)^N``.  Zero for ``N <= 2``, where the
    turning points are not below the real axis.
    """
    if not N > 2 or not E > 0:
        return 0.0
    tp = E ** (1.0 / N) * complex(math.cos(math.pi * (0.5 - 1.0 / N)),
                                  -math.sin(math.pi * (0.5 - 1.0 / N)))
    return round(factor * max(0.0, -tp.imag), 3)


@dataclass(frozen=True, eq=False)
class Contour:
    """Sampled PT-symmetric path: left ray (far -> 0), origin, right ray (0 -> far).

    ``weights`` are complex line-element weights, so ``sum(weights * f)``
    approximates ``int f(x) dx`` along the oriented path.  ``radii`` holds
    the distance from the origin of each sample.
    """

    N: float
    rho_max: float
    theta_left: float
    theta_right: float
    points: np.ndarray
    weights: np.ndarray
    radii: np.ndarray
    junction_index: int
    panel_edges: np.ndarray = field(repr=False)
    junction_depth: float = 0.0

    @property
    def junction(self) -> complex:
        """Common endpoint of both rays, ``-i * junction_depth``."""
        return -1j * self.junction_depth

    @property
    def n_per_ray(self) -> int:
        return self.junction_index

    @property
    def is_pt_symmetric(self) -> bool:
        return self.theta_left == -math.pi - self.theta_right

    @property
    def is_parity_symmetric(self) -> bool:
        """True for the real-axis contour, where ``-y`` is also a sample."""
        return (self.theta_right == 0.0 and self.theta_left == -math.pi
                and self.junction_depth == 0.0)

    def mirror_index(self) -> np.ndarray:
        """Index map ``i -> j`` with ``points[j] = -conj(points[i])``."""
        return np.arange(len(self.points))[::-1]

    @property
    def left(self) -> slice:
        return slice(0, self.junction_index)

    @property
    def right(self) -> slice:
        return slice(self.junction_index + 1, None)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "rho_max": self.rho_max,
            "theta_left": self.theta_left,
            "theta_right": self.theta_right,
            "points": [[float(z.real), float(z.imag)] for z in self.points],
            "junction_index": self.junction_index,
            "junction_depth": self.junction_depth,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Contour":
        d = json.loads(text)
        n = (len(d["points"]) - 1) // 2
        return build_contour(
            d["N"], d["rho_max"], n,
            theta_left=d["theta_left"], theta_right=d["theta_right"],
            junction_depth=d.get("junction_depth", 0.0),
        )


def _panel_edges(rho, n_panels):
    inner = min(1.0, rho / 2.0)
    n_geo = min(4, n_panels - 1)
    geo = [0.0] + [inner * 2.0 ** (-k) for k in range(n_geo - 1, -1, -1)]
    outer = np.linspace(inner, rho, n_panels - n_geo + 1)[1:]
    return np.concatenate([geo, outer])


def build_contour(N: float, rho_max: float, points_per_ray: int = 400, *,
                  theta_left: float | None = None,
                  theta_right: float | None = None,
                  nodes_per_panel: int = NODES_PER_PANEL,
                  junction_depth: float = 0.0) -> Contour:
    """Two straight rays along the wedge centres, joined at the origin.

    ``points_per_ray`` is rounded up to a whole number of panels.  Ray
    angles default to the wedge centres; overriding them is allowed as long
    as each ray stays strictly inside its wedge.

    ``junction_depth = d > 0`` moves the common endpoint to ``-i d``.  The
    point set stays PT-symmetric and, the rays being inside the same
    wedges, integrals of analytic integrands do not change.  Highly excited
    states are much better conditioned there, since near the origin both
    rays see the same exponentially dominant WKB branch.
    """
    geom = wedge_angles(N)
    if not rho_max > 0:
        raise DomainError("rho_max must be positive")
    if not junction_depth >= 0:
        raise DomainError("junction_depth must be non-negative")
    if points_per_ray < 16:
        raise DomainError("points_per_ray must be at least 16")
    th_r = geom.theta_right if theta_right is None else float(theta_right)
    th_l = geom.theta_left if theta_left is None else float(theta_left)
    if theta_left is None and theta_right is not None:
        th_l = -math.pi - th_r
    for side, th in (("right", th_r), ("left", th_l)):
        if geom.edge_distance(th, side) <= 0:
            raise DomainError(f"{side} ray angle {th} lies outside its wedge")
        # log(ix) must stay on the principal branch along the ray
        if not -math.pi < th + math.pi / 2 <= math.pi:
            raise DomainError(f"{side} ray angle {th} crosses the branch cut")

    n_panels = max(2, -(-points_per_ray // nodes_per_panel))
    edges = _panel_edges(float(rho_max), n_panels)
    gx, gw = np.polynomial.legendre.leggauss(nodes_per_panel)
    a, b = edges[:-1, None], edges[1:, None]
    r = (0.5 * (b - a) * gx + 0.5 * (a + b)).ravel()
    w = (0.5 * (b - a) * gw).ravel()

    x0 = -1j * float(junction_depth)
    right_pts = x0 + r * np.exp(1j * th_r)
    right_w = w * np.exp(1j * th_r)
    if th_l == -math.pi - th_r:
        left_pts = -np.conj(right_pts)
        left_w = np.conj(right_w)
    else:
        left_pts = x0 + r * np.exp(1j * th_l)
        left_w = -w * np.exp(1j * th_l)
    points = np.concatenate([left_pts[::-1], [x0], right_pts])
    weights = np.concatenate([left_w[::-1], [0.0], right_w])
    radii = np.concatenate([r[::-1], [0.0], r])
    return Contour(
        N=float(N), rho_max=float(rho_max), theta_left=th_l, theta_right=th_r,
        points=points, weights=weights, radii=radii,
        junction_index=len(r), panel_edges=edges,
        junction_depth=float(junction_depth),
    )


@dataclass(frozen=True)
class WedgePair:
    """Two angular sectors ``lo < arg x < hi`` in which solutions must vanish."""

    label: str
    first: tuple[float, float]
    second: tuple[float, float]

    @property
    def pt_symmetric(self) -> bool:
        # x -> -x* maps arg -> -pi - arg
        a, b = self.first
        mirrored = (-math.pi - b, -math.pi - a)
        return bool(np.allclose(mirrored, self.second))


def dyson_vs_pt_wedges() -> tuple[WedgePair, WedgePair]:
    """Boundary-condition wedges for the wrong-sign quartic oscillator.

    Returns the pair reached by rotating the coupling through the complex
    plane and the pair reached by continuing the exponent of ``x^2 (ix)^d``
    from 0 to 2.
    """
    dyson = WedgePair("dyson", (-math.pi / 3, 0.0), (-4 * math.pi / 3, -math.pi))
    pt = WedgePair("pt", (-math.pi / 3, 0.0), (-math.pi, -2 * math.pi / 3))
    return dyson, pt
