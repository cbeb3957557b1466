"""PT and CPT inner products and the spectral C operator on a contour.

All integrals are Gauss-Legendre sums over the contour samples with
complex line-element weights.  The map ``x -> -x*`` sends each sample to
its mirror sample on the opposite ray, so ``PT f`` needs no interpolation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .contour import Contour
from .errors import DomainError
from .spectra import find_real_eigenvalues, EigenPair

__all__ = [
    "SampledKernel",
    "InnerProductValue",
    "pt_conjugate",
    "pt_inner",
    "cpt_inner",
    "build_c_kernel",
    "build_parity_kernel",
    "apply_kernel",
    "completeness_kernel",
    "verify_completeness",
    "parity_action",
    "gram_matrix",
    "expectation_x_ground",
    "gaussian_bump",
    "normalized_eigenpairs",
]


@dataclass(frozen=True)
class SampledKernel:
    contour: Contour
    values: np.ndarray
    levels: int

    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.values - self.values.T)))


@dataclass(frozen=True)
class InnerProductValue:
    value: complex
    error: float

    def __complex__(self):
        return complex(self.value)


def _check(f, contour):
    f = np.asarray(f, dtype=complex)
    if f.shape != contour.points.shape:
        raise DomainError(
            f"sampled function has shape {f.shape}, contour has {contour.points.shape}")
    return f


def pt_conjugate(f, contour: Contour) -> np.ndarray:
    """``(PT f)(x) = f(-x*)*`` on the contour samples."""
    if not contour.is_pt_symmetric:
        raise DomainError("PT conjugation needs a PT-symmetric contour")
    return np.conj(_check(f, contour)[contour.mirror_index()])


def _panel_error(integrand, contour):
    """Estimate the quadrature error by comparing each Gauss panel against a
    lower-order rule on the same nodes (drop to the nodes' trapezoid sum)."""
    w = contour.weights
    full = np.sum(w * integrand)
    P = contour.junction_index
    z = contour.points
    # trapezoid along the ordered samples as a crude second rule
    trap = np.sum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(z))
    return float(abs(full - trap))


def pt_inner(f, g, contour: Contour, error: bool = False) -> InnerProductValue:
    """``(f, g) = int [f(-x*)]* g(x) dx`` along the contour."""
    g = _check(g, contour)
    integrand = pt_conjugate(f, contour) * g
    val = complex(np.sum(contour.weights * integrand))
    err = _panel_error(integrand, contour) if error else 0.0
    return InnerProductValue(val, err)


def apply_kernel(kernel: SampledKernel, f) -> np.ndarray:
    """``(K f)(x) = int K(x, y) f(y) dy``."""
    f = _check(f, kernel.contour)
    return kernel.values @ (kernel.contour.weights * f)


def build_c_kernel(eigenpairs, contour: Contour | None = None) -> SampledKernel:
    """``C_K(x, y) = sum_{n<K} phi_n(x) phi_n(y)`` on the contour grid."""
    pairs = list(eigenpairs)
    if not pairs:
        raise DomainError("no eigenpairs given")
    for p in pairs:
        if not p.normalized:
            raise DomainError(f"eigenpair n={p.n} is not normalised")
    contour = contour or pairs[0].contour
    phi = np.array([p.eigenfunction for p in pairs])
    return SampledKernel(contour, phi.T @ phi, len(pairs))


def completeness_kernel(eigenpairs, contour: Contour | None = None) -> SampledKernel:
    """``sum_{n<K} (-1)^n phi_n(x) phi_n(y)`` (signs taken from the PT norms)."""
    pairs = list(eigenpairs)
    contour = contour or pairs[0].contour
    phi = np.array([p.eigenfunction for p in pairs])
    s = np.array([p.pt_norm_sign for p in pairs], dtype=float)
    return SampledKernel(contour, (phi.T * s) @ phi, len(pairs))


def build_parity_kernel(eigenpairs, contour: Contour | None = None) -> SampledKernel:
    """``P_K(x, y) = sum_{n<K} (-1)^n phi_n(x) phi_n(-y)``.

    ``-y`` must be a sample too, so the contour has to be the real axis.
    """
    pairs = list(eigenpairs)
    contour = contour or pairs[0].contour
    if not contour.is_parity_symmetric:
        raise DomainError("the parity kernel needs the real-axis contour")
    phi = np.array([p.eigenfunction for p in pairs])
    s = np.array([p.pt_norm_sign for p in pairs], dtype=float)
    flipped = phi[:, contour.mirror_index()]
    return SampledKernel(contour, (phi.T * s) @ flipped, len(pairs))


def cpt_inner(f, g, contour: Contour, c_kernel: SampledKernel) -> InnerProductValue:
    """``<f|g> = int dx [C PT f](x) g(x)``.

    Warns when ``f`` has visible weight outside the span of the kernel's
    eigenfunctions (its CPT norm would be truncated).
    """
    g = _check(g, contour)
    ptf = pt_conjugate(f, contour)
    cptf = apply_kernel(c_kernel, ptf)
    # C^2 should reproduce PT f when f lies in the truncated span
    back = apply_kernel(c_kernel, cptf)
    leak = np.max(np.abs(back - ptf)) / max(np.max(np.abs(ptf)), 1e-300)
    if leak > 1e-3:
        warnings.warn(f"CPT inner product truncated: C^2 f misses f by {leak:.2e} "
                      f"with K={c_kernel.levels} levels", RuntimeWarning, stacklevel=2)
    integrand = cptf * g
    return InnerProductValue(complex(np.sum(contour.weights * integrand)),
                             _panel_error(integrand, contour))


def verify_completeness(eigenpairs, testfn, contour: Contour | None = None) -> float:
    """``max_x |int dy sum_n (-1)^n phi_n(x) phi_n(y) f(y) - f(x)|``."""
    k = completeness_kernel(eigenpairs, contour)
    f = _check(testfn, k.contour)
    return float(np.max(np.abs(apply_kernel(k, f) - f)))


def parity_action(eigenpairs, testfn, contour: Contour | None = None):
    """Apply the eigenfunction expansion of P to ``testfn``.

    Returns ``(Pf, residual, square_residual)`` where ``residual`` is
    ``max |Pf(x) - f(-x)|`` and ``square_residual`` is ``max |P(Pf) - f|``.
    """
    k = build_parity_kernel(eigenpairs, contour)
    f = _check(testfn, k.contour)
    pf = apply_kernel(k, f)
    reflected = f[k.contour.mirror_index()]
    ppf = apply_kernel(k, pf)
    return pf, float(np.max(np.abs(pf - reflected))), float(np.max(np.abs(ppf - f)))


def gram_matrix(eigenpairs, contour: Contour | None = None) -> np.ndarray:
    """Matrix of PT inner products ``(phi_m, phi_n)``."""
    pairs = list(eigenpairs)
    contour = contour or pairs[0].contour
    phi = np.array([p.eigenfunction for p in pairs])
    ptphi = np.conj(phi[:, contour.mirror_index()])
    return (ptphi * contour.weights) @ phi.T


def gaussian_bump(contour: Contour, width: float = 1.0, centre: complex = 0.0) -> np.ndarray:
    """``exp(-((x - centre)/width)^2)`` sampled on the contour (analytic in x)."""
    z = (contour.points - centre) / width
    return np.exp(-z * z)


def normalized_eigenpairs(N: float, levels: int, *, points_per_ray: int = 400,
                          contour: Contour | None = None, potential=None,
                          **kw) -> list:
    """First ``levels`` eigenpairs, normalised on a common contour."""
    res = find_real_eigenvalues(N, levels, normalize=True, potential=potential,
                                points_per_ray=points_per_ray, contour=contour, **kw)
    if not res.complete:
        raise DomainError(f"only {len(res)} real levels found at N={N}")
    return list(res)


def expectation_x_ground(N: float, eigenpairs=None, **kw) -> complex:
    """``<phi_0| x |phi_0>`` under the CPT inner product.

    ``C phi_0 = phi_0`` and ``PT phi_0 = phi_0``, so this reduces to
    ``int x phi_0(x)^2 dx / int phi_0(x)^2 dx`` along the contour.
    """
    if eigenpairs is None:
        eigenpairs = normalized_eigenpairs(N, 1, **kw)
    p0 = eigenpairs[0]
    c = p0.contour
    phi = p0.eigenfunction
    cptphi = pt_conjugate(phi, c) * p0.pt_norm_sign
    num = np.sum(c.weights * cptphi * c.points * phi)
    den = np.sum(c.weights * cptphi * phi)
    return complex(num / den)
