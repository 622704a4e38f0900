"""Matrix-parameter types for linear quantum stochastic systems.

A system ``G = (S, Kx, x^T R x / 2)`` over ``n`` oscillators is carried
entirely as matrices: a unitary ``m x m`` scattering matrix ``S``, a complex
``m x 2n`` coupling matrix ``K`` and a real symmetric ``2n x 2n`` Hamiltonian
matrix ``R``.  The canonical vector is ordered ``x = (q1, p1, ..., qn, pn)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionError

DEFAULT_TOL = 1e-9

J = np.array([[0, 1], [-1, 0]])

Port = tuple[str, int]


def _max_abs(a: ArrayLike) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def unitarity_residual(a: ArrayLike) -> float:
    a = np.asarray(a)
    return _max_abs(a @ a.conj().T - np.eye(a.shape[0]))


def is_unitary(a: ArrayLike, tol: float = DEFAULT_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and unitarity_residual(a) <= tol


def is_hermitian(a: ArrayLike, tol: float = DEFAULT_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and _max_abs(a - a.conj().T) <= tol


def is_symmetric(a: ArrayLike, tol: float = DEFAULT_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and _max_abs(a - a.T) <= tol


def is_real(a: ArrayLike, tol: float = DEFAULT_TOL) -> bool:
    return _max_abs(np.imag(a)) <= tol


def re(a: ArrayLike) -> NDArray:
    """``(A + A^#) / 2`` as a real array."""
    return np.real(a)


def im(a: ArrayLike) -> NDArray:
    """``(A - A^#) / 2i`` as a real array."""
    return np.imag(a)


def sym(a: ArrayLike) -> NDArray:
    a = np.asarray(a)
    return (a + a.T) / 2


def quadratic_im(q: ArrayLike) -> NDArray[np.float64]:
    """Hamiltonian-matrix contribution of the operator ``Im{x^T Q x}``.

    Returns the real symmetric ``dR`` with ``Im{x^T Q x} = x^T dR x / 2``
    up to a scalar fixed by the commutation relations.
    """
    q_im = np.imag(q)
    return q_im + q_im.T


def theta(n: int) -> NDArray[np.int64]:
    """Block-diagonal symplectic form ``diag_n(J)`` of size ``2n x 2n``."""
    return np.kron(np.eye(n, dtype=np.int64), J)


def sigma(n: int) -> NDArray[np.complex128]:
    """The ``n x 2n`` matrix with ``a = Sigma x`` for ``a_j = (q_j + i p_j)/2``."""
    s = np.zeros((n, 2 * n), dtype=complex)
    for j in range(n):
        s[j, 2 * j] = 0.5
        s[j, 2 * j + 1] = 0.5j
    return s


def block_diag(*blocks: ArrayLike, dtype=complex) -> NDArray:
    """Block-diagonal assembly that tolerates non-square and empty blocks."""
    arrs = [np.asarray(b, dtype=dtype) for b in blocks]
    arrs = [a if a.ndim == 2 else a.reshape(1, -1) for a in arrs]
    rows = sum(a.shape[0] for a in arrs)
    cols = sum(a.shape[1] for a in arrs)
    out = np.zeros((rows, cols), dtype=dtype)
    r = c = 0
    for a in arrs:
        out[r:r + a.shape[0], c:c + a.shape[1]] = a
        r += a.shape[0]
        c += a.shape[1]
    return out


def _frozen(a: NDArray) -> NDArray:
    a = np.array(a)
    a.flags.writeable = False
    return a


def _ports(ports: Sequence[Sequence] | None, default: str, m: int) -> tuple[Port, ...]:
    if ports is None:
        return ((default, m),) if m else ()
    return tuple((str(label), int(mult)) for label, mult in ports)


@dataclass(frozen=True, eq=False)
class SystemParams:
    """A linear quantum stochastic system ``(S, Kx, x^T R x / 2)``.

    Parameters
    ----------
    S : (m, m) complex array
        Scattering matrix.
    K : (m, 2n) complex array
        Coupling matrix, ``L = K x``.
    R : (2n, 2n) real array
        Hamiltonian matrix.  Asymmetry up to ``DEFAULT_TOL`` is repaired by
        symmetrization; larger asymmetry is kept so that
        :func:`validate_system` can report it.
    in_ports, out_ports : sequence of (label, multiplicity), optional
        Port partition of the input and output fields.  Defaults to a single
        port ``r1`` / ``s1`` of multiplicity ``m``.
    """

    S: NDArray[np.complex128]
    K: NDArray[np.complex128]
    R: NDArray[np.float64]
    in_ports: tuple[Port, ...] = field(default=None)
    out_ports: tuple[Port, ...] = field(default=None)

    def __post_init__(self):
        S = np.atleast_2d(np.asarray(self.S, dtype=complex)) if np.size(self.S) else np.zeros((0, 0), complex)
        R = np.asarray(self.R, dtype=float)
        if R.size == 0:
            R = np.zeros((0, 0))
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise DimensionError(f"S must be square, got shape {S.shape}")
        if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] % 2:
            raise DimensionError(f"R must be square of even size, got shape {R.shape}")
        m, two_n = S.shape[0], R.shape[0]
        K = np.asarray(self.K, dtype=complex)
        if K.size == 0:
            K = np.zeros((m, two_n), dtype=complex)
        K = K.reshape(K.shape if K.ndim == 2 else (m, -1))
        if K.shape != (m, two_n):
            raise DimensionError(f"K must have shape {(m, two_n)}, got {K.shape}")
        if _max_abs(R - R.T) <= DEFAULT_TOL:
            R = sym(R)
        object.__setattr__(self, "S", _frozen(S))
        object.__setattr__(self, "K", _frozen(K))
        object.__setattr__(self, "R", _frozen(R))
        object.__setattr__(self, "in_ports", _ports(self.in_ports, "r1", m))
        object.__setattr__(self, "out_ports", _ports(self.out_ports, "s1", m))

    @property
    def m(self) -> int:
        return self.S.shape[0]

    @property
    def n_dof(self) -> int:
        return self.R.shape[0] // 2

    @classmethod
    def static(cls, S: ArrayLike, **ports) -> "SystemParams":
        """A static device ``(S, 0, 0)`` with no oscillators."""
        S = np.atleast_2d(np.asarray(S, dtype=complex))
        return cls(S, np.zeros((S.shape[0], 0)), np.zeros((0, 0)), **ports)

    @classmethod
    def empty(cls) -> "SystemParams":
        return cls(np.zeros((0, 0)), np.zeros((0, 0)), np.zeros((0, 0)))

    @classmethod
    def hamiltonian_only(cls, R: ArrayLike) -> "SystemParams":
        """``(0, 0, x^T R x / 2)``: a Hamiltonian with no fields attached."""
        R = np.asarray(R, dtype=float)
        return cls(np.zeros((0, 0)), np.zeros((0, R.shape[0])), R)

    def with_ports(self, in_ports=None, out_ports=None) -> "SystemParams":
        return SystemParams(self.S, self.K, self.R,
                            self.in_ports if in_ports is None else in_ports,
                            self.out_ports if out_ports is None else out_ports)

    def __repr__(self):
        return (f"SystemParams(n_dof={self.n_dof}, m={self.m}, "
                f"in_ports={self.in_ports}, out_ports={self.out_ports})")


@dataclass(frozen=True)
class QsdeMatrices:
    """State-space matrices of ``dX = AX dt + B [dA; dA^#]``, ``dY = CX dt + D dA``."""

    A: NDArray[np.float64]
    B: NDArray[np.complex128]
    C: NDArray[np.complex128]
    D: NDArray[np.complex128]
    A_imag_residual: float = 0.0


@dataclass(frozen=True)
class Violation:
    predicate: str
    residual: float

    def __str__(self):
        return f"{self.predicate} violated (residual {self.residual:.3g})"


def validate_system(g: SystemParams, tol: float = DEFAULT_TOL) -> list[Violation]:
    """Check the structural invariants of ``g``; never raises.

    Returns an empty list when ``S`` is unitary, ``R`` symmetric and the
    port multiplicities account for all ``m`` fields.
    """
    out = []
    r = unitarity_residual(g.S)
    if r > tol:
        out.append(Violation("unitarity of S", r))
    r = _max_abs(g.R - g.R.T)
    if r > tol:
        out.append(Violation("symmetry of R", r))
    for name, ports in (("in_ports", g.in_ports), ("out_ports", g.out_ports)):
        total = sum(mult for _, mult in ports)
        if total != g.m:
            out.append(Violation(f"{name} multiplicities sum to m", float(abs(total - g.m))))
        if any(mult <= 0 for _, mult in ports):
            out.append(Violation(f"{name} multiplicities positive",
                                 float(-min(mult for _, mult in ports) + 1)))
    return out
