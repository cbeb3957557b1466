"""Complex WKB for ``H = p^2 - (ix)^N``.

Turning points are the roots of ``E + (ix)^N = 0`` that continue off the
real axis from the harmonic-oscillator pair at ``N = 2``.  The quantisation
integral runs between them along a path in the lower-half plane on which
it is real.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy.special import gamma

from .contour import potential_eval
from .errors import DomainError

__all__ = ["TurningPoints", "turning_points", "wkb_energy", "quantization_integral",
           "quantization_residual", "solve_quantization"]


@dataclass(frozen=True)
class TurningPoints:
    x_minus: complex
    x_plus: complex
    E: float
    N: float


def turning_points(E: float, N: float) -> TurningPoints:
    if not E > 0:
        raise DomainError("E must be positive")
    if not N >= 1:
        raise DomainError("N must be at least 1")
    r = E ** (1.0 / N)
    xm = r * cmath.exp(1j * math.pi * (1.5 - 1.0 / N))
    xp = r * cmath.exp(-1j * math.pi * (0.5 - 1.0 / N))
    return TurningPoints(xm, xp, float(E), float(N))


def wkb_energy(n: int, N: float) -> float:
    """Leading-order WKB eigenvalue ``E_n``; exact for ``N = 2``.

    Raises DomainError for ``N < 2``, where the quantisation path has to
    cross the branch cut and no longer joins the turning points.
    """
    if n < 0:
        raise DomainError("n must be non-negative")
    if N < 2:
        raise DomainError(
            f"N={N} < 2: the WKB path crosses the cut on the positive imaginary "
            "axis and does not join the turning points"
        )
    if N == 2:
        return 2.0 * n + 1.0
    base = (gamma(1.5 + 1.0 / N) * math.sqrt(math.pi) * (n + 0.5)
            / (math.sin(math.pi / N) * gamma(1.0 + 1.0 / N)))
    return float(base ** (2.0 * N / (N + 2.0)))


def _segment_integral(a, b, E, N):
    d = b - a

    def f(t):
        x = a + t * d
        return np.sqrt(E + potential_eval(x, 0, N)) * d

    re = integrate.quad(lambda t: f(t).real, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    im = integrate.quad(lambda t: f(t).imag, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    return complex(re, im)


def quantization_integral(E: float, N: float) -> complex:
    """``int sqrt(E + (ix)^N) dx`` from ``x_-`` to ``x_+``.

    The path is two straight segments through ``-i |x_pm|``, where the
    integrand is real and positive.  On this path ``E + (ix)^N`` never
    crosses the negative real axis, so the principal square root is the
    continuous branch.
    """
    tp = turning_points(E, N)
    mid = -1j * abs(tp.x_plus)
    return _segment_integral(tp.x_minus, mid, E, N) + _segment_integral(mid, tp.x_plus, E, N)


def quantization_residual(E: float, n: int, N: float) -> float:
    """``Re I(E) - (n + 1/2) pi`` for the quantisation integral ``I``.

    Raises DomainError if ``N < 2`` or if the integral is not real to
    ``1e-4`` of its modulus (the path no longer joins the turning points
    on one sheet).
    """
    if N < 2:
        raise DomainError("quantization path is defined for N >= 2 only")
    val = quantization_integral(E, N)
    if abs(val.imag) > 1e-4 * abs(val):
        raise DomainError(f"quantization integral is not real: {val}")
    return val.real - (n + 0.5) * math.pi


def solve_quantization(n: int, N: float) -> float:
    """Energy at which the quantisation integral equals ``(n + 1/2) pi``."""
    guess = wkb_energy(n, N)
    f = lambda e: quantization_residual(e, n, N)
    lo, hi = 0.5 * guess, 2.0 * guess
    return optimize.brentq(f, lo, hi, xtol=1e-13, rtol=1e-14)
