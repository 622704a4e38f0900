"""Field-mediated synthesis of linear quantum stochastic systems.

A target ``(I, Kx, x^T R x / 2)`` on ``n`` oscillators is realized by ``n``
one-degree-of-freedom oscillators.  Every pair ``j < k`` is joined by two
field channels ``s_j_k -> r_k_j`` and ``s_k_j -> r_j_k`` whose couplings
reproduce the off-diagonal Hamiltonian blocks after the zero-delay
reduction, and the external ports are cascaded ``1 -> 2 -> ... -> n``.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Mapping

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import DEFAULT_TOL, SystemParams, _max_abs, block_diag, quadratic_im, sym, validate_system
from .errors import (
    DegenerateScattering,
    DimensionError,
    NotPassive,
    PassivityBroken,
    PreconditionError,
    SingularConnection,
)
from .model_matrix import MAX_CONDITION
from .netlist import (
    DEGENERACY_TOL,
    Coupling,
    CouplingChoice,
    OscillatorBlock,
    Parameterization,
    SynthesisNetlist,
    in_label,
    out_label,
)
from .serialize import target_hash
from .slh import concat, is_passive, passivity_scan, series, series_chain

__all__ = [
    "CouplingChoice", "Parameterization", "coupling_delta", "direct_coupling_solve",
    "coupling_residual", "normalize_choices", "synthesize", "synthesize_with_scattering",
    "synthesize_passive", "construct_h_red", "realize", "cascade_direct_decompose",
    "recompose_cascade_direct",
]


def coupling_delta(S12: complex, S21: complex) -> complex:
    """``Δ = 2 (S21 - S12^*) / |1 - S12 S21|^2``."""
    gap = abs(1 - S12 * S21)
    if gap < DEGENERACY_TOL:
        raise DegenerateScattering(f"S12*S21 = {S12 * S21} is 1; the channel pair has no loop gain")
    return 2 * (S21 - np.conj(S12)) / gap ** 2


def direct_coupling_solve(R: ArrayLike, S12: complex, S21: complex, kappa: float = 1.0,
                          parameterization=Parameterization.FORWARD_K1):
    """Couplings ``(K1, K2)`` (each ``1 x 2``) whose two-way channel mimics ``R``.

    They satisfy ``R = Im{S12 K1^† K2 / (1 - S12 S21) + S21 K1^T K2^# / (1 - S12 S21)}``.
    Under ``FORWARD_K1``, ``K1 = [κ, iκ]`` and
    ``K2 = 2i [1 0] [-K1^† Δ^*, K1^T Δ]^{-1} R``; under ``FORWARD_K2``,
    ``K2 = [κ, iκ]`` and ``K1 = 2i [1 0] [K2^† Δ, -K2^T Δ^*]^{-1} R^T``.
    """
    R = np.asarray(R, dtype=float)
    delta = coupling_delta(S12, S21)
    fixed = kappa * np.array([[1, 1j]])
    if Parameterization(parameterization) is Parameterization.FORWARD_K1:
        lhs = np.hstack([-fixed.conj().T * np.conj(delta), fixed.T * delta])
        solved = 2j * np.linalg.solve(lhs, R)[:1]
        return fixed, solved
    lhs = np.hstack([fixed.conj().T * delta, -fixed.T * np.conj(delta)])
    solved = 2j * np.linalg.solve(lhs, R.T)[:1]
    return solved, fixed


def coupling_residual(R, S12, S21, K1, K2) -> float:
    """Max-abs residual of the equation solved by :func:`direct_coupling_solve`."""
    K1 = np.atleast_2d(K1)
    K2 = np.atleast_2d(K2)
    d = 1 - S12 * S21
    mimic = (S12 / d) * K1.conj().T @ K2 + (S21 / d) * K1.T @ K2.conj()
    return _max_abs(np.asarray(R) - mimic.imag)


def normalize_choices(choices: Mapping | None, n: int) -> dict[tuple[int, int], CouplingChoice]:
    """Fill in defaults and key every choice by ``(j, k)`` with ``j < k``.

    A choice given under ``(k, j)`` describes the channel from ``k``'s side
    and is swapped accordingly.
    """
    out = {}
    for (j, k), c in (choices or {}).items():
        if not (1 <= j <= n and 1 <= k <= n) or j == k:
            raise DimensionError(f"no oscillator pair ({j}, {k}) in an {n}-oscillator network")
        if not isinstance(c, CouplingChoice):
            c = CouplingChoice(**c)
        out[(j, k) if j < k else (k, j)] = c if j < k else c.swapped()
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            out.setdefault((j, k), CouplingChoice())
    return out


def _precheck(target: SystemParams, tol: float):
    bad = validate_system(target, tol)
    if bad:
        raise PreconditionError("invalid target: " + "; ".join(map(str, bad)))
    if target.n_dof < 1:
        raise DimensionError("synthesis needs at least one oscillator")


def synthesize(target: SystemParams, choices: Mapping | None = None,
               tol: float = DEFAULT_TOL) -> SynthesisNetlist:
    """Netlist realizing ``target``, whose scattering matrix must be ``I``.

    ``choices`` maps oscillator pairs ``(j, k)`` (1-based) to
    :class:`CouplingChoice`; missing pairs use the default
    ``θ_jk = 0, θ_kj = π/2, κ = 1, FORWARD_K1``.
    """
    _precheck(target, tol)
    if _max_abs(target.S - np.eye(target.m)) > tol:
        raise PreconditionError("synthesize needs S = I; use synthesize_with_scattering")
    return _synthesize(target, normalize_choices(choices, target.n_dof), target_hash(target))


def _synthesize(target: SystemParams, choices, digest: str, static=None) -> SynthesisNetlist:
    n, m = target.n_dof, target.m
    K, R = target.K, target.R

    def K_of(j):
        return K[:, 2 * (j - 1):2 * j]

    def R_of(j, k):
        return R[2 * (j - 1):2 * j, 2 * (k - 1):2 * k]

    pair_K = {}
    for (j, k), c in choices.items():
        mimic = R_of(j, k) - (K_of(j).T @ K_of(k).conj()).imag
        try:
            K_jk, K_kj = direct_coupling_solve(mimic, c.S_jk, c.S_kj, c.kappa, c.parameterization)
        except DegenerateScattering as exc:
            raise DegenerateScattering(f"pair ({j}, {k}): {exc}") from None
        pair_K[(j, k)] = K_jk
        pair_K[(k, j)] = K_kj

    def S_of(j, k):
        c = choices[(min(j, k), max(j, k))]
        return c.S_jk if j < k else c.S_kj

    blocks = []
    for j in range(1, n + 1):
        correction = np.zeros((2, 2))
        couplings = []
        for k in range(1, n + 1):
            if k == j:
                couplings.append(Coupling(j, np.eye(m), K_of(j)))
                continue
            K_jk = pair_K[(j, k)]
            gain = 1 - S_of(j, k) * S_of(k, j)
            correction += ((K_jk.conj().T @ K_jk) / gain).imag
            couplings.append(Coupling(k, [[S_of(j, k)]], K_jk))
        blocks.append(OscillatorBlock(j, R_of(j, j) - 2 * sym(correction), couplings))

    interaction = [(out_label(j, k), in_label(k, j))
                   for j in range(1, n + 1) for k in range(1, n + 1) if j != k]
    cascade = [(out_label(k, k), in_label(k + 1, k + 1)) for k in range(1, n)]
    return SynthesisNetlist(blocks, interaction, cascade, digest, m,
                            choices=dict(choices), static_scattering=static)


def synthesize_with_scattering(target: SystemParams, choices: Mapping | None = None,
                               tol: float = DEFAULT_TOL) -> tuple[SystemParams, SynthesisNetlist]:
    """Split ``(S, Kx, H) = (I, Kx, H) ◁ (S, 0, 0)`` and synthesize the first factor.

    Returns the static stage ``(S, 0, 0)`` and a netlist bound to the full
    target that records ``S`` as its preceding static device.
    """
    _precheck(target, tol)
    static = SystemParams.static(target.S)
    inner = SystemParams(np.eye(target.m), target.K, target.R)
    is_identity = _max_abs(target.S - np.eye(target.m)) <= tol
    netlist = _synthesize(inner, normalize_choices(choices, target.n_dof), target_hash(target),
                          None if is_identity else target.S)
    return static, netlist


def synthesize_passive(target: SystemParams, choices: Mapping | None = None,
                       tol: float = DEFAULT_TOL) -> SynthesisNetlist:
    """As :func:`synthesize_with_scattering`, for a passive target.

    Every oscillator block of the result is checked to be passive.
    """
    if not is_passive(target, tol):
        raise NotPassive("target is not passive")
    _, netlist = synthesize_with_scattering(target, choices, tol)
    scale = max(1.0, _max_abs(target.K) ** 2, _max_abs(target.R))
    for block in netlist.oscillators:
        g = block.system()
        worst = passivity_scan(g.R, g.K)
        if worst > tol * scale:
            raise PassivityBroken(f"oscillator {block.j} deviates from passive form by {worst:.3g}")
    return replace(netlist, passive=True)


def construct_h_red(netlist: SynthesisNetlist) -> SystemParams:
    """Closed-form reduced model after all interaction edges are eliminated.

    ``S_red = diag(S_kk)``, ``L_red = (L_11, ..., L_nn)`` and
    ``H_red = Σ_k H_k + Σ_{j<k} Im{[L_jk^† L_kj^†] [[I, -S_jk], [-S_kj, I]]^{-1} [L_jk; L_kj]}``.
    """
    n = netlist.n
    blocks = {b.j: b for b in netlist.oscillators}

    def embed(K_local, j):
        out = np.zeros((K_local.shape[0], 2 * n), dtype=complex)
        out[:, 2 * (j - 1):2 * j] = K_local
        return out

    R = block_diag(*(blocks[j].R for j in range(1, n + 1)), dtype=float)
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            c_jk, c_kj = blocks[j].coupling(k), blocks[k].coupling(j)
            a, b = c_jk.multiplicity, c_kj.multiplicity
            loop = np.block([[np.eye(a), -c_jk.S], [-c_kj.S, np.eye(b)]])
            cond = np.linalg.cond(loop)
            if not np.isfinite(cond) or cond > MAX_CONDITION:
                raise SingularConnection(f"pair ({j}, {k}): channel loop is singular")
            L = np.vstack([embed(c_jk.K, j), embed(c_kj.K, k)])
            R = R + quadratic_im(L.conj().T @ np.linalg.solve(loop, L))

    selfs = [blocks[j].coupling(j) for j in range(1, n + 1)]
    S = block_diag(*(c.S for c in selfs))
    K = np.vstack([embed(c.K, j) for j, c in zip(range(1, n + 1), selfs)])
    return SystemParams(S, K, R,
                        in_ports=[(in_label(j, j), c.multiplicity) for j, c in zip(range(1, n + 1), selfs)],
                        out_ports=[(out_label(j, j), c.multiplicity) for j, c in zip(range(1, n + 1), selfs)])


def realize(netlist: SynthesisNetlist) -> SystemParams:
    """The system realized by ``netlist`` via the closed-form reduction.

    Splits ``G_red = (0, 0, H_red) ⊞ ⊞_k (S_kk, L_kk, 0)``, cascades the
    ``G_red,k`` in order and prepends the static stage if there is one.
    """
    g_red = construct_h_red(netlist)
    start = 0
    parts = []
    for label, mult in g_red.out_ports:
        rows = slice(start, start + mult)
        parts.append(SystemParams(g_red.S[rows, rows], g_red.K[rows], np.zeros_like(g_red.R)))
        start += mult
    chain = series_chain(parts, shared_modes=True)
    net = concat(SystemParams.hamiltonian_only(g_red.R), chain, shared_modes=True)
    if netlist.static_scattering is not None:
        net = series(net, SystemParams.static(netlist.static_scattering))
    return net


def cascade_direct_decompose(target: SystemParams) -> tuple[list[SystemParams], dict]:
    """Cascade of oscillators plus a direct bilinear interaction Hamiltonian.

    Returns ``G_k = (I, K_k x_k, x_k^T R_kk x_k / 2)`` and, for each pair
    ``j < k``, the ``2 x 2`` matrix ``M_jk = R_jk^T - Im{K_k^† K_j}`` of
    ``H^d_jk = x_k^T M_jk x_j``.
    """
    if _max_abs(target.S - np.eye(target.m)) > DEFAULT_TOL:
        raise PreconditionError("cascade_direct_decompose needs S = I")
    n, m = target.n_dof, target.m
    K_of = [target.K[:, 2 * j:2 * j + 2] for j in range(n)]
    oscillators = [SystemParams(np.eye(m), K_of[k], target.R[2 * k:2 * k + 2, 2 * k:2 * k + 2])
                   for k in range(n)]
    hd = {}
    for j in range(n):
        for k in range(j + 1, n):
            R_jk = target.R[2 * j:2 * j + 2, 2 * k:2 * k + 2]
            hd[(j + 1, k + 1)] = R_jk.T - (K_of[k].conj().T @ K_of[j]).imag
    return oscillators, hd


def recompose_cascade_direct(oscillators, hd_terms) -> SystemParams:
    """``(0, 0, H^d) ⊞ (G_n ◁ ... ◁ G_1)``."""
    chain = series_chain(oscillators)
    R = np.zeros((2 * chain.n_dof,) * 2)
    for (j, k), M in hd_terms.items():
        rj, rk = slice(2 * (j - 1), 2 * j), slice(2 * (k - 1), 2 * k)
        R[rk, rj] += M
        R[rj, rk] += np.asarray(M).T
    return concat(SystemParams.hamiltonian_only(R), chain, shared_modes=True)
