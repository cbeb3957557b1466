import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptlab.contour import build_contour
from ptlab.errors import DomainError
from ptlab.ptnorm import (apply_kernel, build_c_kernel, build_parity_kernel, completeness_kernel,
                          cpt_inner, expectation_x_ground, gaussian_bump, gram_matrix,
                          normalized_eigenpairs, parity_action, pt_conjugate, pt_inner,
                          verify_completeness)
from ptlab.spectra import find_real_eigenvalues


def _signature_ok(G, tol):
    n = len(G)
    want = np.diag([(-1.0) ** k for k in range(n)])
    return np.max(np.abs(G - want)) < tol


@pytest.mark.parametrize("N", [2.5, 4.0])
def test_gram_signature(N):
    G = gram_matrix(normalized_eigenpairs(N, 6))
    assert _signature_ok(G, 1e-7)


def test_oscillator_gram_and_signs(oscillator_pairs):
    G = gram_matrix(oscillator_pairs)
    assert _signature_ok(G, 1e-8)
    assert [p.pt_norm_sign for p in oscillator_pairs] == [(-1) ** n for n in range(8)]


def test_oscillator_odd_states_are_imaginary(oscillator_pairs):
    # phi(-x*)* = phi(x) on the real axis forces odd states to be imaginary
    for p in oscillator_pairs:
        phi = p.eigenfunction
        part = phi.real if p.n % 2 else phi.imag
        assert np.max(np.abs(part)) < 1e-9


def test_pt_conjugate_involution(cubic_pairs_8):
    c = cubic_pairs_8[0].contour
    rng = np.random.default_rng(3)
    f = rng.normal(size=c.points.shape) + 1j * rng.normal(size=c.points.shape)
    assert np.allclose(pt_conjugate(pt_conjugate(f, c), c), f)


@settings(max_examples=30)
@given(st.lists(st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False),
                min_size=6, max_size=6))
def test_cpt_norm_positive_and_matches_coefficients(cubic_pairs_12, coefs):
    # two routes: the kernel integral against sum |c_n|^2
    c = np.array(coefs)
    if np.sum(np.abs(c) ** 2) < 1e-6:
        return
    pairs = cubic_pairs_12
    contour = pairs[0].contour
    psi = sum(cn * p.eigenfunction for cn, p in zip(c, pairs))
    k = build_c_kernel(pairs)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        val = cpt_inner(psi, psi, contour, k).value
    assert val.real > 0
    assert val == pytest.approx(np.sum(np.abs(c) ** 2), rel=1e-6, abs=1e-8)


def test_cpt_inner_warns_on_truncation(cubic_pairs_8):
    c = cubic_pairs_8[0].contour
    k = build_c_kernel(cubic_pairs_8)
    narrow = gaussian_bump(c, 0.15, c.junction)
    with pytest.warns(RuntimeWarning, match="truncated"):
        cpt_inner(narrow, narrow, c, k)


def test_pt_inner_error_estimate(cubic_pairs_8):
    p = cubic_pairs_8[0]
    r = pt_inner(p.eigenfunction, p.eigenfunction, p.contour, error=True)
    assert r.value == pytest.approx(1.0, abs=1e-9)
    assert 0 <= r.error < 1e-3


def test_shape_mismatch_rejected(cubic_pairs_8):
    c = cubic_pairs_8[0].contour
    with pytest.raises(DomainError):
        pt_inner(np.ones(3), np.ones(3), c)


def test_c_kernel_needs_normalised_pairs():
    raw = list(find_real_eigenvalues(3.0, 2))
    with pytest.raises(DomainError):
        build_c_kernel(raw)


def test_c_kernel_is_symmetric(cubic_pairs_8):
    assert build_c_kernel(cubic_pairs_8).asymmetry() < 1e-12


def test_completeness_improves_with_more_levels(cubic_pairs_8, cubic_pairs_12, cubic_pairs_16):
    res = []
    for pairs in (cubic_pairs_8, cubic_pairs_12, cubic_pairs_16):
        c = pairs[0].contour
        res.append(verify_completeness(pairs, gaussian_bump(c, 1.0, c.junction)))
    assert res[0] > res[1] > res[2]
    assert res[2] < 1e-3


def test_completeness_kernel_projects_eigenfunctions(cubic_pairs_8):
    k = completeness_kernel(cubic_pairs_8)
    for p in cubic_pairs_8:
        assert np.max(np.abs(apply_kernel(k, p.eigenfunction) - p.eigenfunction)) < 1e-7


def test_parity_expansion_on_real_axis(oscillator_pairs):
    more = normalized_eigenpairs(2.0, 16)
    out = []
    for pairs in (oscillator_pairs, more):
        c = pairs[0].contour
        out.append(parity_action(pairs, gaussian_bump(c, 1.0, 0.4))[1:])
    assert out[1][0] < out[0][0] / 10
    assert out[1][0] < 1e-4 and out[1][1] < 1e-4


def test_parity_kernel_needs_real_axis(cubic_pairs_8):
    with pytest.raises(DomainError):
        build_parity_kernel(cubic_pairs_8)


def test_x_expectation_two_routes(cubic_pairs_12):
    # the reduced formula against the full CPT inner product through the kernel
    pairs = cubic_pairs_12
    c = pairs[0].contour
    k = build_c_kernel(pairs)
    phi = pairs[0].eigenfunction
    num = cpt_inner(phi, c.points * phi, c, k).value
    den = cpt_inner(phi, phi, c, k).value
    assert expectation_x_ground(3.0, pairs) == pytest.approx(num / den, abs=1e-7)


def test_x_expectation_frozen():
    # frozen from this implementation
    assert expectation_x_ground(3.0) == pytest.approx(-0.5900725j, abs=1e-6)
    assert expectation_x_ground(4.0) == pytest.approx(-0.86686j, abs=1e-5)


def test_incomplete_spectrum_rejected():
    with pytest.raises(DomainError):
        normalized_eigenpairs(1.5, 8)


def test_cpt_inner_needs_pt_contour():
    c = build_contour(3.0, 8.0, 32, theta_right=-0.3, theta_left=-2.9)
    with pytest.raises(DomainError):
        pt_conjugate(np.ones_like(c.points), c)
