"""The two-level PT-symmetric Hamiltonian ``[[r e^{i theta}, s], [s, r e^{-i theta}]]``.

Everything here is closed form.  P swaps the components, T conjugates
them, and ``sin(alpha) = (r/s) sin(theta)`` parametrises the unbroken region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import DomainError

__all__ = [
    "BrokenSymmetryError",
    "ExceptionalPointError",
    "MatrixModel",
    "Eigensystem",
    "PARITY",
    "SIGMA2",
    "eigensystem",
    "pt_inner_2",
    "cpt_inner_2",
    "cpt_conjugate",
    "c_matrix",
    "cpt_norm",
    "cpt_norm_closed",
    "q_matrix",
    "c_from_q",
    "completeness_2",
    "is_observable_2",
]

PARITY = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
OBS_TOL = 1e-12


class BrokenSymmetryError(DomainError):
    """Raised for constructions that need unbroken PT symmetry."""


class ExceptionalPointError(DomainError):
    """``s^2 = r^2 sin^2(theta)``: the eigenvalues are real but degenerate
    and C (which carries ``1/cos(alpha)``) does not exist."""


@dataclass(frozen=True)
class MatrixModel:
    r: float
    s: float
    theta: float

    def __post_init__(self):
        if not self.s > 0:
            raise DomainError("s must be positive (the state labels assume s > 0)")

    @property
    def sin_alpha(self) -> float:
        return self.r * math.sin(self.theta) / self.s

    @property
    def discriminant(self) -> float:
        return self.s ** 2 - (self.r * math.sin(self.theta)) ** 2

    @property
    def broken(self) -> bool:
        return self.discriminant < 0 and not self.exceptional

    @property
    def exceptional(self) -> bool:
        return abs(abs(self.sin_alpha) - 1.0) <= 4 * np.finfo(float).eps

    @property
    def alpha(self) -> float:
        if self.broken:
            raise BrokenSymmetryError("alpha is not real in the broken region")
        return math.asin(max(-1.0, min(1.0, self.sin_alpha)))

    def hamiltonian(self) -> np.ndarray:
        e = np.exp(1j * self.theta)
        return np.array([[self.r * e, self.s], [self.s, self.r / e]], dtype=complex)


@dataclass(frozen=True)
class Eigensystem:
    eps_plus: complex
    eps_minus: complex
    broken: bool
    exceptional: bool
    states: tuple | None

    def to_dict(self) -> dict:
        return {"eps_plus": [self.eps_plus.real, self.eps_plus.imag],
                "eps_minus": [self.eps_minus.real, self.eps_minus.imag],
                "broken": self.broken, "exceptional": self.exceptional}


def _require_unbroken(m: MatrixModel):
    if m.broken:
        raise BrokenSymmetryError(
            f"PT symmetry is broken: s^2 = {m.s ** 2} < r^2 sin^2(theta) = "
            f"{(m.r * math.sin(m.theta)) ** 2}")
    if m.exceptional:
        raise ExceptionalPointError("exceptional point: cos(alpha) = 0, C is singular")


def eigensystem(m: MatrixModel) -> Eigensystem:
    """``eps_pm = r cos(theta) +- sqrt(s^2 - r^2 sin^2(theta))``.

    Unbroken region: the states are the PT-normalised pair with
    ``PT |eps_pm> = |eps_pm>``.  Broken region: the eigenvalues form a
    conjugate pair and the states are unit-norm eigenvectors.  At the
    exceptional point the single eigenvector is returned twice.
    """
    root = np.sqrt(complex(m.discriminant))
    if m.exceptional:
        root = 0j
    ep = m.r * math.cos(m.theta) + root
    em = m.r * math.cos(m.theta) - root
    if m.broken:
        w, v = np.linalg.eig(m.hamiltonian())
        order = np.argsort(-w.imag)
        vecs = tuple(v[:, k] / np.linalg.norm(v[:, k]) for k in order)
        return Eigensystem(complex(ep), complex(em), True, False, vecs)
    a = m.alpha
    if m.exceptional:
        v = np.array([np.exp(1j * a / 2), np.exp(-1j * a / 2)]) / math.sqrt(2)
        return Eigensystem(complex(ep), complex(em), False, True, (v, v))
    n = 1.0 / math.sqrt(2 * math.cos(a))
    plus = n * np.array([np.exp(1j * a / 2), np.exp(-1j * a / 2)])
    minus = 1j * n * np.array([np.exp(-1j * a / 2), -np.exp(1j * a / 2)])
    return Eigensystem(complex(ep), complex(em), False, False, (plus, minus))


def pt_inner_2(u, v) -> complex:
    """``(u, v) = (PT u) . v`` (plain bilinear dot product)."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    return complex(np.dot(PARITY @ np.conj(u), v))


def c_matrix(m: MatrixModel) -> np.ndarray:
    _require_unbroken(m)
    sa = m.sin_alpha
    ca = math.cos(m.alpha)
    return np.array([[1j * sa, 1], [1, -1j * sa]], dtype=complex) / ca


def cpt_conjugate(psi, m: MatrixModel) -> np.ndarray:
    """``CPT psi = C P psi*``."""
    return c_matrix(m) @ PARITY @ np.conj(np.asarray(psi, dtype=complex))


def cpt_inner_2(u, v, m: MatrixModel) -> complex:
    return complex(np.dot(cpt_conjugate(u, m), np.asarray(v, dtype=complex)))


def cpt_norm(psi, m: MatrixModel) -> float:
    """``(CPT psi) . psi``, which is real and positive for ``psi != 0``."""
    val = cpt_inner_2(psi, psi, m)
    scale = max(1.0, float(np.sum(np.abs(psi) ** 2)) / math.cos(m.alpha))
    if abs(val.imag) > 1e-12 * scale:
        raise ArithmeticError(f"CPT norm has imaginary part {val.imag}")
    return val.real


def cpt_norm_closed(psi, m: MatrixModel) -> float:
    """The same norm written out in ``a = x + iy``, ``b = u + iv``."""
    _require_unbroken(m)
    a, b = complex(psi[0]), complex(psi[1])
    x, y, u, v = a.real, a.imag, b.real, b.imag
    sa = m.sin_alpha
    return (x * x + v * v + 2 * x * v * sa + y * y + u * u - 2 * y * u * sa) / math.cos(m.alpha)


def q_matrix(m: MatrixModel) -> np.ndarray:
    """``Q = (1/2) sigma_2 ln[(1 - sin a)/(1 + sin a)]`` with ``C = e^Q P``."""
    _require_unbroken(m)
    sa = m.sin_alpha
    return 0.5 * SIGMA2 * math.log((1 - sa) / (1 + sa))


def c_from_q(m: MatrixModel) -> np.ndarray:
    """``e^Q P`` by numerical matrix exponential."""
    return expm(q_matrix(m)) @ PARITY


@dataclass(frozen=True)
class Completeness:
    resolution: np.ndarray
    signed: np.ndarray
    identity_error: float
    c_error: float


def completeness_2(m: MatrixModel) -> Completeness:
    """``|e+><e+| + |e-><e-|`` and ``|e+><e+| - |e-><e-|`` with ``<u|`` the
    CPT conjugate (as a row vector).  The first should be I, the second C."""
    _require_unbroken(m)
    plus, minus = eigensystem(m).states
    bra_p = cpt_conjugate(plus, m)
    bra_m = cpt_conjugate(minus, m)
    pp = np.outer(plus, bra_p)
    mm = np.outer(minus, bra_m)
    res, signed = pp + mm, pp - mm
    return Completeness(res, signed, float(np.max(np.abs(res - np.eye(2)))),
                        float(np.max(np.abs(signed - c_matrix(m)))))


def is_observable_2(A, m: MatrixModel, tol: float = OBS_TOL) -> bool:
    """``A^T = (CPT) A (CPT)`` with CPT the antilinear map ``psi -> C P psi*``.

    As a matrix, ``(CPT) A (CPT) = (CP) A* conj(CP)``.
    """
    A = np.asarray(A, dtype=complex)
    CP = c_matrix(m) @ PARITY
    return bool(np.max(np.abs(A.T - CP @ np.conj(A) @ np.conj(CP))) <= tol * max(1.0, np.max(np.abs(A))))
