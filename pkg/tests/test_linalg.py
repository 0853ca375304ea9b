import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from layerft import linalg as la
from layerft.errors import NonSquare, OverflowRisk, Singular, SpectrumOnCut


def shifted_random(rng, r, shift=None):
    """Random complex matrix with spectrum pushed into the right half-plane."""
    m = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
    return m + (2 * r if shift is None else shift) * np.eye(r)


def test_principal_sqrt_oracle():
    s = la.principal_sqrt(np.array([[5.0, 4.0], [4.0, 5.0]]))
    assert np.allclose(s, [[2.0, 1.0], [1.0, 2.0]], atol=1e-12)


def test_principal_sqrt_squares_back():
    rng = np.random.default_rng(11)
    for _ in range(60):
        r = int(rng.choice([1, 2, 4]))
        m = shifted_random(rng, r)
        s = la.principal_sqrt(m)
        assert np.max(np.abs(s @ s - m)) <= 1e-10 * np.max(np.abs(m))


def test_principal_sqrt_spectrum_in_right_half_plane():
    rng = np.random.default_rng(3)
    for _ in range(40):
        r = int(rng.choice([2, 4]))
        s = la.principal_sqrt(shifted_random(rng, r))
        assert np.all(np.linalg.eigvals(s).real > 0)


def test_principal_sqrt_rejects_cut():
    with pytest.raises(SpectrumOnCut):
        la.principal_sqrt(np.array([[-1.0, 0.0], [0.0, 1.0]]))


def test_matrix_exp_matches_scipy():
    rng = np.random.default_rng(5)
    for _ in range(40):
        r = int(rng.choice([1, 2, 4]))
        m = 0.4 * (rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)))
        ref = sla.expm(m)
        assert np.max(np.abs(la.matrix_exp(m) - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


def test_matrix_exp_overflow_gate():
    with pytest.raises(OverflowRisk):
        la.matrix_exp(np.array([[6000.0]]))


def test_solve_linear_singular_gate():
    with pytest.raises(Singular):
        la.solve_linear(np.zeros((2, 2)), np.eye(2))


def test_solve_linear_context_in_message():
    with pytest.raises(Singular, match="junction pencil"):
        la.solve_linear(np.zeros((2, 2)), np.eye(2), context="junction pencil")


def test_right_solve():
    rng = np.random.default_rng(1)
    a = shifted_random(rng, 3)
    b = rng.normal(size=(2, 3))
    x = la.right_solve(b, a)
    assert np.allclose(x @ a, b, atol=1e-12)


def test_as_square_rejects_rectangular():
    with pytest.raises(NonSquare):
        la.as_square(np.zeros((2, 3)), "block")


def test_block2x2_layout():
    a, b, c, d = (np.full((2, 2), v) for v in (1.0, 2.0, 3.0, 4.0))
    m = la.block2x2(a, b, c, d)
    assert m.shape == (4, 4)
    assert np.all(m[:2, :2] == 1.0) and np.all(m[:2, 2:] == 2.0)
    assert np.all(m[2:, :2] == 3.0) and np.all(m[2:, 2:] == 4.0)


def test_rcond_identity_and_singular():
    assert la.rcond(np.eye(4)) == pytest.approx(1.0)
    assert la.rcond(np.zeros((3, 3))) == 0.0


def test_definiteness_predicates():
    assert la.hermitian_positive_definite(np.array([[2.0, 0.3], [0.3, 1.0]]))
    assert not la.hermitian_positive_definite(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert la.hermitian_positive_semidefinite(np.zeros((2, 2)))
    assert not la.hermitian_positive_semidefinite(np.array([[0.0, 1.0], [0.0, 0.0]]))


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=1, max_value=4),
    st.integers(min_value=0, max_value=2**31 - 1),
)
def test_sqrt_exp_consistency(r, seed):
    # exp(2 log-sqrt path): sqrt(m)^2 == m implies expm(t m) == expm(t s s)
    rng = np.random.default_rng(seed)
    m = shifted_random(rng, r)
    s = la.principal_sqrt(m)
    assert np.max(np.abs(s @ s - m)) <= 1e-9 * np.max(np.abs(m))
