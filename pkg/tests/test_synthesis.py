import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfnsynth.core import SystemParams
from qfnsynth.errors import (
    DegenerateScattering,
    DimensionError,
    InvalidChoice,
    NotPassive,
    PreconditionError,
)
from qfnsynth.model_matrix import eliminate_simultaneous
from qfnsynth.netlist import CouplingChoice, Parameterization, netlist_to_dot
from qfnsynth.slh import passivity_scan, series
from qfnsynth.synthesis import (
    cascade_direct_decompose,
    construct_h_red,
    coupling_delta,
    direct_coupling_solve,
    coupling_residual,
    normalize_choices,
    realize,
    recompose_cascade_direct,
    synthesize,
    synthesize_passive,
    synthesize_with_scattering,
)
from qfnsynth.verify import equivalence

from conftest import random_passive, random_system, random_unitary

K1_EX1 = np.array([[1.5, 0.5j]])
K2_EX1 = np.array([[1, 1j]])


def _mimic_map(S12, S21, K1):
    """Real 4x4 matrix of K2 -> Im{S12 K1^† K2 / d + S21 K1^T K2^# / d}."""
    d = 1 - S12 * S21
    cols = []
    for basis in (1, 1j):
        for pos in range(2):
            K2 = np.zeros((1, 2), dtype=complex)
            K2[0, pos] = basis
            out = (S12 / d * K1.conj().T @ K2 + S21 / d * K1.T @ K2.conj()).imag
            cols.append(out.ravel())
    return np.array(cols).T


def test_delta_of_example_channel():
    assert coupling_delta(1, 1j) == pytest.approx(-1 + 1j, abs=1e-12)


def test_degenerate_pair():
    with pytest.raises(DegenerateScattering):
        coupling_delta(1j, -1j)
    with pytest.raises(DegenerateScattering):
        direct_coupling_solve(np.eye(2), 1, 1)


def test_zero_target_gives_zero_coupling():
    K1, K2 = direct_coupling_solve(np.zeros((2, 2)), 1, 1j, kappa=0.3)
    assert np.array_equal(K1, [[0.3, 0.3j]])
    assert np.array_equal(K2, np.zeros((1, 2)))


def test_example1_coupling():
    R12 = np.array([[1.0, 1.0], [-1.0, -1.0]])
    mimic = R12 - (K1_EX1.T @ K2_EX1.conj()).imag
    K12, K21 = direct_coupling_solve(mimic, 1, 1j)
    assert np.allclose(K12, [[1, 1j]], atol=1e-12)
    assert np.allclose(K21, [[1.25 - 0.25j, 1.75 + 0.75j]], atol=1e-9)


@given(st.integers(0, 100_000), st.sampled_from(list(Parameterization)))
@settings(max_examples=60, deadline=None)
def test_solver_matches_least_squares_oracle(seed, param):
    rng = np.random.default_rng(seed)
    R = rng.normal(size=(2, 2))
    t12, t21 = rng.uniform(0, 2 * math.pi, size=2)
    S12, S21 = np.exp(1j * t12), np.exp(1j * t21)
    if abs(1 - S12 * S21) < 1e-2:
        return
    kappa = rng.choice([-1, 1]) * rng.uniform(0.2, 3)
    K1, K2 = direct_coupling_solve(R, S12, S21, kappa, param)
    assert coupling_residual(R, S12, S21, K1, K2) <= 1e-9
    if param is Parameterization.FORWARD_K1:
        A = _mimic_map(S12, S21, K1)
        x = np.linalg.lstsq(A, R.ravel(), rcond=None)[0]
        assert np.allclose(K2.ravel(), x[:2] + 1j * x[2:], atol=1e-8)


def test_example1_netlist(example1):
    net = synthesize(example1)
    b1, b2 = net.oscillators
    assert np.allclose(b1.R, [[1, 0.5], [0.5, 2]], atol=1e-9)
    assert np.allclose(b2.R, -np.array([[0.625, 2], [2, 2.625]]), atol=1e-9)
    assert np.allclose(b2.coupling(1).K, [[1.25 - 0.25j, 1.75 + 0.75j]], atol=1e-9)
    assert np.allclose(b1.coupling(2).S, [[1]]) and np.allclose(b2.coupling(1).S, [[1j]])
    assert set(net.interaction_edges) == {("s_1_2", "r_2_1"), ("s_2_1", "r_1_2")}
    assert net.cascade_edges == (("s_1_1", "r_2_2"),)


def test_example2_passive_netlist(example2):
    net = synthesize_passive(example2)
    b1, b2 = net.oscillators
    assert net.passive
    # K_12, S_12 and S_21 are those of the active example, so R_11 loses the same I
    assert np.allclose(b1.R, np.eye(2), atol=1e-9)
    assert np.allclose(b2.R, 0.5 * np.eye(2), atol=1e-9)
    assert np.allclose(b2.coupling(1).K, [[0.5 - 0.5j, 0.5 + 0.5j]], atol=1e-9)
    for b in net.oscillators:
        g = b.system()
        assert passivity_scan(g.R, g.K) <= 1e-9


def test_example_reduction_matches_model_calculus(example1):
    net = synthesize(example1)
    closed = construct_h_red(net)
    general = eliminate_simultaneous(net.network(), net.interaction_edges).params
    # both keep oscillator order; the model path lists ports per oscillator
    assert equivalence(closed, general).worst <= 1e-9
    assert np.allclose(general.S, np.eye(2))
    assert np.allclose(general.K, [[1.5, 0.5j, 0, 0], [0, 0, 1, 1j]])


def test_realize_returns_target(example1, example2):
    for g in (example1, example2):
        assert equivalence(realize(synthesize(g)), g).worst <= 1e-9


def test_single_oscillator():
    g = random_system(np.random.default_rng(0), 1, 2)
    net = synthesize(g)
    assert net.n == 1 and net.interaction_edges == () and net.cascade_edges == ()
    assert np.allclose(net.oscillators[0].R, g.R)
    assert equivalence(realize(net), g).worst <= 1e-12


def test_zero_couplings_leave_hamiltonians_alone(example1):
    net = synthesize(example1)
    blocks = [type(b)(b.j, b.R, [type(c)(c.k, c.S, 0 * c.K if c.k != b.j else c.K) for c in b.couplings])
              for b in net.oscillators]
    stripped = type(net)(blocks, net.interaction_edges, net.cascade_edges, net.target_hash, net.m)
    red = construct_h_red(stripped)
    assert np.allclose(red.R[:2, :2], net.oscillators[0].R)
    assert np.allclose(red.R[:2, 2:], 0)


def test_zero_passive_target():
    g = SystemParams(np.eye(1), np.zeros((1, 4)), np.zeros((4, 4)))
    net = synthesize_passive(g)
    assert net.passive
    assert np.allclose(net.oscillators[1].coupling(1).K, 0)
    assert equivalence(realize(net), g).worst <= 1e-12


def test_not_passive(example1):
    with pytest.raises(NotPassive):
        synthesize_passive(example1)


@given(st.integers(0, 100_000), st.integers(1, 3), st.integers(1, 2))
@settings(max_examples=25, deadline=None)
def test_random_passive_targets(seed, n, m):
    g = random_passive(np.random.default_rng(seed), n, m, identity_S=bool(seed % 2))
    net = synthesize_passive(g)
    assert equivalence(realize(net), g).worst <= 1e-9


@given(st.integers(0, 100_000))
@settings(max_examples=20, deadline=None)
def test_choice_invariance(seed):
    rng = np.random.default_rng(seed)
    g = random_system(rng, 3, 2)
    choices = {}
    for pair in ((1, 2), (1, 3), (2, 3)):
        while True:
            t = rng.uniform(0, 2 * math.pi, size=2)
            if abs(1 - np.exp(1j * t.sum())) > 0.1:
                break
        choices[pair] = CouplingChoice(t[0], t[1], rng.uniform(0.3, 2) * rng.choice([-1, 1]),
                                       rng.choice(list(Parameterization)))
    a, b = realize(synthesize(g)), realize(synthesize(g, choices))
    assert equivalence(a, b).worst <= 1e-9


def test_choices_keyed_backwards_are_swapped():
    c = CouplingChoice(0.3, 1.1, 2.0, Parameterization.FORWARD_K1)
    out = normalize_choices({(2, 1): c}, 2)
    assert out[(1, 2)].theta_jk == pytest.approx(1.1)
    assert out[(1, 2)].parameterization is Parameterization.FORWARD_K2
    g = random_system(np.random.default_rng(4), 2, 1)
    assert equivalence(realize(synthesize(g, {(2, 1): c})), g).worst <= 1e-9


def test_invalid_choices():
    with pytest.raises(InvalidChoice):
        CouplingChoice(1.0, 2 * math.pi - 1.0)
    with pytest.raises(InvalidChoice):
        CouplingChoice(kappa=0)
    with pytest.raises(DimensionError):
        normalize_choices({(1, 3): CouplingChoice()}, 2)


def test_synthesize_rejects_nontrivial_scattering():
    rng = np.random.default_rng(5)
    g = random_system(rng, 2, 2, identity_S=False)
    with pytest.raises(PreconditionError):
        synthesize(g)
    with pytest.raises(DimensionError):
        synthesize(SystemParams(np.eye(1), np.zeros((1, 0)), np.zeros((0, 0))))


def test_static_stage_phase():
    g = random_system(np.random.default_rng(6), 1, 1)
    g = SystemParams([[1j]], g.K, g.R)
    static, net = synthesize_with_scattering(g)
    assert np.allclose(static.S, [[1j]]) and static.n_dof == 0
    inner = realize(type(net)(net.oscillators, (), (), net.target_hash, net.m))
    assert equivalence(series(inner, static), g).worst <= 1e-12


@given(st.integers(0, 100_000))
@settings(max_examples=20, deadline=None)
def test_static_stage_random(seed):
    rng = np.random.default_rng(seed)
    g = random_system(rng, 2, 2, identity_S=False)
    static, net = synthesize_with_scattering(g)
    assert np.allclose(static.S, g.S)
    assert equivalence(realize(net), g).worst <= 1e-9


def test_identity_scattering_has_no_static_stage(example1):
    static, net = synthesize_with_scattering(example1)
    assert net.static_scattering is None
    assert np.allclose(static.S, np.eye(1))


def test_example1_direct_terms(example1):
    oscillators, hd = cascade_direct_decompose(example1)
    # R_12^T - Im{K_2^† K_1} with K_1 = [3/2, i/2], K_2 = [1, i]
    assert np.allclose(hd[(1, 2)], [[1, -1.5], [2.5, -1]])
    assert np.allclose(oscillators[1].R, np.eye(2))


def test_single_mode_decomposition_has_no_terms():
    g = random_system(np.random.default_rng(7), 1, 1)
    oscillators, hd = cascade_direct_decompose(g)
    assert hd == {} and len(oscillators) == 1


@given(st.integers(0, 100_000))
@settings(max_examples=20, deadline=None)
def test_decomposition_recomposes(seed):
    g = random_system(np.random.default_rng(seed), 3, 2)
    assert equivalence(recompose_cascade_direct(*cascade_direct_decompose(g)), g).worst <= 1e-9


def test_netlist_dot(example1):
    dot = netlist_to_dot(synthesize(example1))
    assert dot.startswith("digraph")
    assert "G1" in dot and "G2" in dot
