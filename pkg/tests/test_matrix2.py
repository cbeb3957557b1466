import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from ptlab.errors import DomainError
from ptlab.matrix2 import (PARITY, BrokenSymmetryError, ExceptionalPointError, MatrixModel,
                           c_from_q, c_matrix, completeness_2, cpt_inner_2, cpt_norm,
                           cpt_norm_closed, eigensystem, is_observable_2, pt_inner_2, q_matrix)

TOL = 1e-12


@st.composite
def unbroken(draw):
    s = draw(st.floats(0.2, 3.0))
    theta = draw(st.floats(-math.pi, math.pi))
    # keep |sin alpha| <= 0.9 so that 1/cos(alpha) stays moderate
    r_max = 0.9 * s / max(abs(math.sin(theta)), 1e-3)
    r = draw(st.floats(0.0, min(r_max, 3.0)))
    return MatrixModel(r, s, theta)


@given(unbroken())
def test_eigenvalues_closed_form(m):
    es = eigensystem(m)
    H = m.hamiltonian()
    ev = np.sort_complex(np.linalg.eigvals(H))
    want = np.sort_complex(np.array([es.eps_plus, es.eps_minus]))
    assert np.allclose(ev, want, atol=1e-10)
    root = math.sqrt(m.s ** 2 - (m.r * math.sin(m.theta)) ** 2)
    assert es.eps_plus.real == pytest.approx(m.r * math.cos(m.theta) + root, abs=TOL * 10)
    for v, e in zip(es.states, (es.eps_plus, es.eps_minus)):
        assert np.allclose(H @ v, e * v, atol=1e-12)


@given(unbroken())
def test_pt_norms_and_orthogonality(m):
    plus, minus = eigensystem(m).states
    assert pt_inner_2(plus, plus) == pytest.approx(1.0, abs=1e-12)
    assert pt_inner_2(minus, minus) == pytest.approx(-1.0, abs=1e-12)
    assert abs(pt_inner_2(plus, minus)) < 1e-12


@given(unbroken())
def test_c_operator_properties(m):
    C = c_matrix(m)
    plus, minus = eigensystem(m).states
    H = m.hamiltonian()
    assert np.max(np.abs(C @ C - np.eye(2))) < TOL
    assert np.allclose(C @ plus, plus, atol=TOL)
    assert np.allclose(C @ minus, -minus, atol=TOL)
    assert np.max(np.abs(C @ H - H @ C)) < 1e-11
    assert np.max(np.abs(c_from_q(m) - C)) < 1e-11


@given(unbroken())
def test_completeness(m):
    comp = completeness_2(m)
    assert comp.identity_error < TOL
    assert comp.c_error < TOL


@given(unbroken())
def test_observables(m):
    assert is_observable_2(m.hamiltonian(), m, 1e-11)
    assert is_observable_2(c_matrix(m), m, 1e-11)


def test_non_observable_rejected():
    m = MatrixModel(1.0, 2.0, 0.7)
    assert not is_observable_2(np.array([[0, 1j], [0, 0]]), m)


def test_cpt_norm_positive_on_random_vectors():
    rng = np.random.default_rng(2024)
    m = MatrixModel(1.0, 1.5, 0.9)
    for _ in range(500):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        n1 = cpt_norm(v, m)
        assert n1 > 0
        assert n1 == pytest.approx(cpt_norm_closed(v, m), rel=1e-12)


@given(unbroken(), st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_cpt_inner_hermitian(m, xs):
    u = np.array([xs[0] + 1j * xs[1], xs[2] + 1j * xs[3]])
    v = np.array([xs[3] - 1j * xs[0], 1.0 + 0.5j])
    assume(np.linalg.norm(u) > 1e-3)
    a = cpt_inner_2(u, v, m)
    b = cpt_inner_2(v, u, m)
    assert a == pytest.approx(np.conj(b), abs=1e-9 * max(1.0, abs(a)))


def test_hermitian_limit_gives_parity():
    m = MatrixModel(1.0, 1.0, 0.0)
    assert np.allclose(c_matrix(m), PARITY, atol=TOL)
    assert np.allclose(q_matrix(m), 0, atol=TOL)


def test_broken_region():
    m = MatrixModel(1.0, 0.5, math.pi / 2)
    assert m.broken
    es = eigensystem(m)
    assert es.broken
    assert es.eps_plus == pytest.approx(np.conj(es.eps_minus))
    assert es.eps_plus.imag == pytest.approx(math.sqrt(0.75))
    # the eigenvectors have zero PT norm
    for v in es.states:
        assert abs(pt_inner_2(v, v)) < 1e-12
    with pytest.raises(BrokenSymmetryError):
        c_matrix(m)
    with pytest.raises(BrokenSymmetryError):
        m.alpha


def test_exceptional_point():
    m = MatrixModel(1.0, 1.0, math.pi / 2)
    assert m.exceptional and not m.broken
    es = eigensystem(m)
    assert es.exceptional
    assert es.eps_plus == es.eps_minus
    with pytest.raises(ExceptionalPointError):
        c_matrix(m)


def test_s_must_be_positive():
    with pytest.raises(DomainError):
        MatrixModel(1.0, 0.0, 0.3)
    with pytest.raises(DomainError):
        MatrixModel(1.0, -1.0, 0.3)
