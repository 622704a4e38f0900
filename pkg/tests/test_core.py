import numpy as np
import pytest
from hypothesis import given, settings

from qfnsynth.core import (
    J,
    SystemParams,
    block_diag,
    is_hermitian,
    is_unitary,
    quadratic_im,
    sigma,
    theta,
    validate_system,
)
from qfnsynth.errors import DimensionError

from conftest import random_unitary, systems


def test_theta_is_block_symplectic():
    th = theta(3)
    assert th.shape == (6, 6)
    assert np.array_equal(th[2:4, 2:4], J)
    assert np.array_equal(th @ th.T, np.eye(6))
    assert np.array_equal(th.T, -th)


def test_sigma_identities():
    sg = sigma(4)
    assert np.allclose(sg @ sg.conj().T, np.eye(4) / 2)
    assert np.allclose(sg @ sg.T, 0)


def test_sigma_maps_quadratures_to_annihilators():
    q, p = 0.3, -1.7
    assert np.isclose((sigma(1) @ [q, p])[0], (q + 1j * p) / 2)


@given(systems())
@settings(max_examples=40, deadline=None)
def test_quadratic_im_on_commuting_vectors(g):
    # for a real c-number vector Im{x^T Q x} = x^T dR x / 2 holds exactly
    rng = np.random.default_rng(g.n_dof)
    Q = g.K.conj().T @ g.K + 1j * g.R
    x = rng.normal(size=2 * g.n_dof)
    dR = quadratic_im(Q)
    assert np.allclose(dR, dR.T)
    assert np.isclose((x @ Q @ x).imag, x @ dR @ x / 2)


def test_block_diag_handles_empty_and_rectangular():
    out = block_diag(np.ones((1, 2)), np.zeros((0, 0)), 2 * np.ones((2, 1)))
    assert out.shape == (3, 3)
    assert out[0, :2].tolist() == [1, 1]
    assert out[1:, 2].tolist() == [2, 2]


def test_default_ports_and_dimensions():
    g = SystemParams(np.eye(2), np.zeros((2, 4)), np.zeros((4, 4)))
    assert (g.n_dof, g.m) == (2, 2)
    assert g.in_ports == (("r1", 2),)
    assert g.out_ports == (("s1", 2),)


@pytest.mark.parametrize("S, K, R", [
    (np.eye(2), np.zeros((1, 2)), np.zeros((2, 2))),
    (np.ones((2, 3)), np.zeros((2, 2)), np.zeros((2, 2))),
    (np.eye(1), np.zeros((1, 2)), np.zeros((3, 3))),
])
def test_shape_errors(S, K, R):
    with pytest.raises(DimensionError):
        SystemParams(S, K, R)


def test_system_is_immutable():
    g = SystemParams(np.eye(1), [[1, 1j]], np.eye(2))
    with pytest.raises(ValueError):
        g.K[0, 0] = 2


def test_tiny_asymmetry_is_repaired_large_is_reported():
    R = np.array([[1.0, 2.0], [2.0 + 1e-12, 1.0]])
    assert np.array_equal(SystemParams(np.eye(1), [[1, 0]], R).R, SystemParams(np.eye(1), [[1, 0]], R).R.T)
    bad = SystemParams(np.eye(1), [[1, 0]], [[1.0, 2.0], [0.0, 1.0]])
    assert [v.predicate for v in validate_system(bad)] == ["symmetry of R"]


def test_validate_flags_non_unitary_and_port_sums():
    g = SystemParams(2 * np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)),
                     in_ports=[("a", 1)], out_ports=[("b", 2)])
    names = {v.predicate for v in validate_system(g)}
    assert "unitarity of S" in names
    assert "in_ports multiplicities sum to m" in names


def test_valid_system_has_no_violations():
    rng = np.random.default_rng(3)
    g = SystemParams(random_unitary(rng, 3), rng.normal(size=(3, 2)), np.eye(2))
    assert validate_system(g) == []
    assert is_unitary(g.S)
    assert is_hermitian(g.S @ g.S.conj().T)


def test_static_and_hamiltonian_only():
    st = SystemParams.static([[1j]])
    assert (st.n_dof, st.m) == (0, 1)
    h = SystemParams.hamiltonian_only(np.eye(4))
    assert (h.n_dof, h.m) == (2, 0)
    assert h.in_ports == ()


def test_non_unitary_residual_value():
    (v,) = validate_system(SystemParams([[2]], np.zeros((1, 2)), np.zeros((2, 2))))
    assert v.predicate == "unitarity of S"
    assert v.residual == pytest.approx(3.0)


def test_examples_are_valid(example1, example2):
    assert validate_system(example1) == []
    assert validate_system(example2) == []
    assert validate_system(SystemParams(np.eye(1), np.zeros((1, 2)), np.zeros((2, 2)))) == []


def test_theta_squares_to_minus_identity_exactly():
    for n in range(1, 9):
        th = theta(n)
        assert th.dtype.kind == "i"
        assert np.array_equal(th @ th, -np.eye(2 * n, dtype=int))
