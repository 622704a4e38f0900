"""Concatenation and series products, state-space matrices and passivity.

Both products come in two flavours.  By default the operands are treated as
independent systems and the result lives on the joint canonical vector
``x = (x_1, x_2)`` with the first operand's oscillators first (for
``series(g2, g1)`` that is ``g1``).  With ``shared_modes=True`` the operands
must already be expressed over one common ``x`` (sub-components of the same
system) and the result stays on that ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .core import (
    DEFAULT_TOL,
    QsdeMatrices,
    SystemParams,
    _max_abs,
    block_diag,
    quadratic_im,
    sigma,
    theta,
)
from .errors import DimensionError


def _check_shared(g1: SystemParams, g2: SystemParams):
    if g1.n_dof != g2.n_dof:
        raise DimensionError(
            f"shared_modes requires equal n_dof, got {g1.n_dof} and {g2.n_dof}")


def concat(g1: SystemParams, g2: SystemParams, shared_modes: bool = False) -> SystemParams:
    """``G1 ⊞ G2 = (diag(S1, S2), [L1; L2], H1 + H2)``."""
    S = block_diag(g1.S, g2.S)
    if shared_modes:
        _check_shared(g1, g2)
        K = np.vstack([g1.K, g2.K])
        R = g1.R + g2.R
    else:
        K = block_diag(g1.K, g2.K)
        R = block_diag(g1.R, g2.R, dtype=float)
    return SystemParams(S, K, R, g1.in_ports + g2.in_ports, g1.out_ports + g2.out_ports)


def series(g2: SystemParams, g1: SystemParams, shared_modes: bool = False) -> SystemParams:
    """Feed the outputs of ``g1`` into ``g2``.

    ``G2 ◁ G1 = (S2 S1, L2 + S2 L1, H1 + H2 + Im{L2^† S2 L1})``.  The result
    takes its input ports from ``g1`` and its output ports from ``g2``.
    """
    if g1.m != g2.m:
        raise DimensionError(f"series needs equal field counts, got m={g2.m} and m={g1.m}")
    if shared_modes:
        _check_shared(g1, g2)
        K1, K2 = g1.K, g2.K
        R = g1.R + g2.R
    else:
        n1, n2 = 2 * g1.n_dof, 2 * g2.n_dof
        K1 = np.hstack([g1.K, np.zeros((g1.m, n2))])
        K2 = np.hstack([np.zeros((g2.m, n1)), g2.K])
        R = block_diag(g1.R, g2.R, dtype=float)
    R = R + quadratic_im(K2.conj().T @ g2.S @ K1)
    return SystemParams(g2.S @ g1.S, K2 + g2.S @ K1, R, g1.in_ports, g2.out_ports)


def series_chain(systems, shared_modes: bool = False) -> SystemParams:
    """``G_n ◁ ... ◁ G_1`` for ``systems = [G_1, ..., G_n]``."""
    systems = list(systems)
    out = systems[0]
    for g in systems[1:]:
        out = series(g, out, shared_modes=shared_modes)
    return out


def qsde_matrices(g: SystemParams) -> QsdeMatrices:
    """State-space matrices ``(A, B, C, D)`` of ``g``.

    ``A = 2Θ(R + Im{K^† K})``, ``B = 2iΘ[-K^† S, K^T S^#]``, ``C = K``,
    ``D = S``.
    """
    th = theta(g.n_dof)
    K, S = g.K, g.S
    KK = K.conj().T @ K
    A = 2 * th @ (g.R + (KK - KK.conj()) / 2j)
    B = 2j * th @ np.hstack([-K.conj().T @ S, K.T @ S.conj()])
    return QsdeMatrices(np.real(A), B, K.copy(), S.copy(), _max_abs(np.imag(A)))


@dataclass(frozen=True)
class PassiveForm:
    """``H = a^† R̃ a / 2 + c`` and ``L = K̃ a`` in annihilation-operator form.

    ``residual`` is the distance of the input from exact passive structure;
    the fields are only meaningful as a faithful rewrite when it is small.
    """

    R_tilde: NDArray[np.complex128]
    K_tilde: NDArray[np.complex128]
    residual: float


def passivity_scan(R, K) -> float:
    """Largest deviation of ``(R, K)`` from the passive block structure.

    Checks ``R_jj = λ_j I``, ``R_jk = [[α, β], [-β, α]]`` and
    ``K_j = [γ_j, iγ_j]`` for every oscillator block.
    """
    R = np.asarray(R, dtype=float)
    K = np.asarray(K, dtype=complex)
    n = R.shape[0] // 2
    worst = 0.0
    for j in range(n):
        for k in range(n):
            b = R[2 * j:2 * j + 2, 2 * k:2 * k + 2]
            # for j == k symmetry turns the rotation test into b01 == 0
            worst = max(worst, abs(b[0, 0] - b[1, 1]) / 2, abs(b[0, 1] + b[1, 0]) / 2)
        if K.shape[0]:
            Kj = K[:, 2 * j:2 * j + 2]
            worst = max(worst, _max_abs(Kj[:, 1] - 1j * Kj[:, 0]) / 2)
    return worst


def to_passive_form(g: SystemParams) -> PassiveForm:
    n = g.n_dof
    sg = sigma(n)
    # Σ Σ^† = I/2 and Σ Σ^T = 0 fix the scale factors below.
    R_tilde = 8 * sg @ g.R @ sg.conj().T
    R_tilde = (R_tilde + R_tilde.conj().T) / 2
    K_tilde = 2 * g.K @ sg.conj().T
    R_back, K_back = from_passive_parts(R_tilde, K_tilde)
    residual = max(_max_abs(R_back - g.R), _max_abs(K_back - g.K), passivity_scan(g.R, g.K))
    return PassiveForm(R_tilde, K_tilde, residual)


def from_passive_parts(R_tilde, K_tilde):
    """``(R, K) = (Re{Σ^† R̃ Σ}, K̃ Σ)``."""
    R_tilde = np.asarray(R_tilde, dtype=complex)
    sg = sigma(R_tilde.shape[0])
    return np.real(sg.conj().T @ R_tilde @ sg), np.asarray(K_tilde, dtype=complex) @ sg


def from_passive_form(R_tilde, K_tilde, S=None, **ports) -> SystemParams:
    """Build the passive system with Hamiltonian ``a^† R̃ a / 2`` and ``L = K̃ a``."""
    R, K = from_passive_parts(R_tilde, K_tilde)
    if S is None:
        S = np.eye(K.shape[0])
    return SystemParams(S, K, R, **ports)


def is_passive(g: SystemParams, tol: float = DEFAULT_TOL) -> bool:
    return to_passive_form(g).residual <= tol
