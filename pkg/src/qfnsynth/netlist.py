"""Netlist of one-degree-of-freedom oscillators joined by quantum fields.

Oscillator ``j`` is the concatenation ``G_j = ⊞_k G_jk`` of one sub-port
per partner ``k``: ``G_jj = (I_m, K_j x_j, x_j^T R_j x_j / 2)`` carries the
external coupling and ``G_jk = (S_jk, K_jk x_j, 0)`` (``k != j``) the field
channel to oscillator ``k``.  Oscillators are numbered from 1 and the ports of
``G_jk`` are labelled ``s_j_k`` (output) and ``r_j_k`` (input).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .core import SystemParams, block_diag
from .errors import InvalidChoice
from .model_matrix import Edge, ModelMatrix, build_model, concat_all

DEGENERACY_TOL = 1e-12


def out_label(j: int, k: int) -> str:
    return f"s_{j}_{k}"


def in_label(j: int, k: int) -> str:
    return f"r_{j}_{k}"


class Parameterization(enum.Enum):
    """Which coupling of a pair is fixed to ``[κ, iκ]``.

    ``FORWARD_K1`` fixes ``K_jk`` and solves for ``K_kj``; ``FORWARD_K2``
    fixes ``K_kj`` and solves for ``K_jk``.
    """

    FORWARD_K1 = "k1"
    FORWARD_K2 = "k2"

    def swapped(self) -> "Parameterization":
        return Parameterization.FORWARD_K2 if self is Parameterization.FORWARD_K1 else Parameterization.FORWARD_K1


@dataclass(frozen=True)
class CouplingChoice:
    """Free parameters of the field channel between oscillators ``j < k``.

    ``S_jk = exp(i theta_jk)`` and ``S_kj = exp(i theta_kj)``; the angles are
    reduced to ``[0, 2π)`` and must not sum to a multiple of ``2π``.
    """

    theta_jk: float = 0.0
    theta_kj: float = math.pi / 2
    kappa: float = 1.0
    parameterization: Parameterization = Parameterization.FORWARD_K1

    def __post_init__(self):
        object.__setattr__(self, "theta_jk", float(self.theta_jk) % (2 * math.pi))
        object.__setattr__(self, "theta_kj", float(self.theta_kj) % (2 * math.pi))
        object.__setattr__(self, "parameterization", Parameterization(self.parameterization))
        if not math.isfinite(self.kappa) or self.kappa == 0:
            raise InvalidChoice(f"kappa must be a non-zero real number, got {self.kappa}")
        if abs(1 - self.S_jk * self.S_kj) < DEGENERACY_TOL:
            raise InvalidChoice(
                f"theta_jk + theta_kj = {self.theta_jk + self.theta_kj} is a multiple of 2π")

    @property
    def S_jk(self) -> complex:
        return complex(np.exp(1j * self.theta_jk))

    @property
    def S_kj(self) -> complex:
        return complex(np.exp(1j * self.theta_kj))

    def swapped(self) -> "CouplingChoice":
        """The same channel described from the other oscillator's side."""
        return CouplingChoice(self.theta_kj, self.theta_jk, self.kappa,
                              self.parameterization.swapped())


@dataclass(frozen=True, eq=False)
class Coupling:
    """Sub-port ``G_jk`` of oscillator ``j``: scattering ``S`` and ``L = K x_j``."""

    k: int
    S: NDArray[np.complex128]
    K: NDArray[np.complex128]

    def __post_init__(self):
        object.__setattr__(self, "S", np.atleast_2d(np.asarray(self.S, dtype=complex)))
        object.__setattr__(self, "K", np.atleast_2d(np.asarray(self.K, dtype=complex)))

    @property
    def multiplicity(self) -> int:
        return self.S.shape[0]


@dataclass(frozen=True, eq=False)
class OscillatorBlock:
    j: int
    R: NDArray[np.float64]
    couplings: tuple[Coupling, ...]

    def __post_init__(self):
        object.__setattr__(self, "R", np.asarray(self.R, dtype=float))
        object.__setattr__(self, "couplings", tuple(self.couplings))

    def coupling(self, k: int) -> Coupling:
        for c in self.couplings:
            if c.k == k:
                return c
        raise KeyError(f"oscillator {self.j} has no coupling to {k}")

    def system(self) -> SystemParams:
        """``G_j = ⊞_k G_jk`` with its ``s_j_k`` / ``r_j_k`` port labels."""
        S = block_diag(*(c.S for c in self.couplings))
        K = np.vstack([c.K for c in self.couplings])
        return SystemParams(
            S, K, self.R,
            in_ports=[(in_label(self.j, c.k), c.multiplicity) for c in self.couplings],
            out_ports=[(out_label(self.j, c.k), c.multiplicity) for c in self.couplings],
        )


@dataclass(frozen=True, eq=False)
class SynthesisNetlist:
    """A synthesized network together with the edges that close it.

    ``static_scattering``, when set, is the matrix ``S`` of a static device
    ``(S, 0, 0)`` that precedes the oscillator network.
    """

    oscillators: tuple[OscillatorBlock, ...]
    interaction_edges: tuple[Edge, ...]
    cascade_edges: tuple[Edge, ...]
    target_hash: str
    m: int
    passive: bool = False
    choices: dict = field(default_factory=dict)
    static_scattering: NDArray | None = None

    def __post_init__(self):
        object.__setattr__(self, "oscillators", tuple(self.oscillators))
        object.__setattr__(self, "interaction_edges", tuple(tuple(e) for e in self.interaction_edges))
        object.__setattr__(self, "cascade_edges", tuple(tuple(e) for e in self.cascade_edges))
        if self.static_scattering is not None:
            object.__setattr__(self, "static_scattering",
                               np.atleast_2d(np.asarray(self.static_scattering, dtype=complex)))

    @property
    def n(self) -> int:
        return len(self.oscillators)

    def network(self) -> ModelMatrix:
        """Model matrix of ``⊞_j G_j`` before any edge is connected."""
        return concat_all(build_model(b.system(), name=f"G{b.j}") for b in self.oscillators)


def netlist_to_dot(netlist: SynthesisNetlist, name: str = "netlist") -> str:
    """Topology view: oscillators, their two-way field channels and the cascade."""
    n = netlist.n
    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=circle];",
             '  "in" [shape=point];', '  "out" [shape=point];']
    first = "G1"
    if netlist.static_scattering is not None:
        lines.append('  "static" [shape=box, label="S"];')
        lines.append('  "in" -> "static";')
        lines.append(f'  "static" -> "G1" [label="{in_label(1, 1)}"];')
    else:
        lines.append(f'  "in" -> "{first}" [label="{in_label(1, 1)}"];')
    for b in netlist.oscillators:
        lines.append(f'  "G{b.j}";')
    for o, i in netlist.interaction_edges:
        src, dst = o.split("_")[1], i.split("_")[1]
        lines.append(f'  "G{src}" -> "G{dst}" [label="{o} -> {i}", color=blue];')
    for o, i in netlist.cascade_edges:
        src, dst = o.split("_")[1], i.split("_")[1]
        lines.append(f'  "G{src}" -> "G{dst}" [label="{o} -> {i}", style=bold];')
    lines.append(f'  "G{n}" -> "out" [label="{out_label(n, n)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
