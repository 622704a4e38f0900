"""Independent checks that a netlist realizes its target.

Verification rebuilds the network from the netlist's raw oscillator blocks and
closes it with the model-matrix calculus only; it never calls into the
synthesis routines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_TOL, SystemParams, _max_abs, sym
from .errors import DimensionError, HashMismatch
from .model_matrix import eliminate_sequence, eliminate_simultaneous, permuted_orders
from .netlist import SynthesisNetlist
from .serialize import target_hash
from .slh import qsde_matrices, series


@dataclass(frozen=True)
class Residuals:
    """Max elementwise differences between two systems."""

    S: float
    K: float
    R: float
    A: float
    B: float
    C: float
    D: float

    @property
    def abcd(self) -> float:
        return max(self.A, self.B, self.C, self.D)

    @property
    def worst(self) -> float:
        return max(self.S, self.K, self.R, self.abcd)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in "SKRABCD"}


def equivalence(g1: SystemParams, g2: SystemParams) -> Residuals:
    """Compare two systems by parameters and by their state-space matrices.

    ``R`` is symmetrized on both sides before comparison.
    """
    if (g1.n_dof, g1.m) != (g2.n_dof, g2.m):
        raise DimensionError(
            f"cannot compare (n={g1.n_dof}, m={g1.m}) with (n={g2.n_dof}, m={g2.m})")
    q1, q2 = qsde_matrices(g1), qsde_matrices(g2)
    return Residuals(
        S=_max_abs(g1.S - g2.S),
        K=_max_abs(g1.K - g2.K),
        R=_max_abs(sym(g1.R) - sym(g2.R)),
        A=_max_abs(q1.A - q2.A),
        B=_max_abs(q1.B - q2.B),
        C=_max_abs(q1.C - q2.C),
        D=_max_abs(q1.D - q2.D),
    )


@dataclass
class VerificationReport:
    target_hash: str
    max_residual_S: float = 0.0
    max_residual_K: float = 0.0
    max_residual_R: float = 0.0
    max_residual_ABCD: float = 0.0
    max_order_disagreement: float = 0.0
    max_A_imag: float = 0.0
    elimination_orders_tested: int = 0
    seed: int = 0
    tolerance: float = DEFAULT_TOL
    passed: bool = False
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema": "qfnsynth.report",
            "version": 1,
            "target_hash": self.target_hash,
            "max_residual_S": self.max_residual_S,
            "max_residual_K": self.max_residual_K,
            "max_residual_R": self.max_residual_R,
            "max_residual_ABCD": self.max_residual_ABCD,
            "max_order_disagreement": self.max_order_disagreement,
            "max_A_imag": self.max_A_imag,
            "elimination_orders_tested": self.elimination_orders_tested,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "notes": list(self.notes),
        }

    def summary(self) -> str:
        status = "PASSED" if self.passed else "FAILED"
        return (f"verification {status} (tol {self.tolerance:g}, "
                f"{self.elimination_orders_tested} sequential orders + simultaneous)\n"
                f"  residual S    {self.max_residual_S:.3e}\n"
                f"  residual K    {self.max_residual_K:.3e}\n"
                f"  residual R    {self.max_residual_R:.3e}\n"
                f"  residual ABCD {self.max_residual_ABCD:.3e}\n"
                f"  order spread  {self.max_order_disagreement:.3e}\n")


def _close(netlist: SynthesisNetlist, model) -> SystemParams:
    g = model.params
    if netlist.static_scattering is not None:
        g = series(g, SystemParams.static(netlist.static_scattering))
    return g


def realized_paths(netlist: SynthesisNetlist, orders: int = 10, seed: int = 0):
    """Realized system along the simultaneous path and ``orders`` sequential ones.

    The simultaneous path eliminates all interaction edges with one adjacency
    matrix and then the cascade edges with another.  Each sequential path
    eliminates the union of both edge sets one edge at a time in a random
    order drawn from ``numpy.random.default_rng(seed)``.
    """
    network = netlist.network()
    reduced = eliminate_simultaneous(network, netlist.interaction_edges)
    paths = [_close(netlist, eliminate_simultaneous(reduced, netlist.cascade_edges))]
    rng = np.random.default_rng(seed)
    edges = list(netlist.interaction_edges) + list(netlist.cascade_edges)
    for order in permuted_orders(edges, orders, rng):
        paths.append(_close(netlist, eliminate_sequence(network, order)))
    return paths


def roundtrip(target: SystemParams, netlist: SynthesisNetlist, orders: int = 10,
              seed: int = 0, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Close the netlist every which way and compare against ``target``."""
    digest = target_hash(target)
    if netlist.target_hash != digest:
        raise HashMismatch(f"netlist was built for {netlist.target_hash[:12]}, "
                           f"target is {digest[:12]}")
    paths = realized_paths(netlist, orders, seed)
    report = VerificationReport(digest, elimination_orders_tested=orders, seed=seed, tolerance=tol)
    for g in paths:
        res = equivalence(g, target)
        report.max_residual_S = max(report.max_residual_S, res.S)
        report.max_residual_K = max(report.max_residual_K, res.K)
        report.max_residual_R = max(report.max_residual_R, res.R)
        report.max_residual_ABCD = max(report.max_residual_ABCD, res.abcd)
        report.max_order_disagreement = max(report.max_order_disagreement,
                                            equivalence(g, paths[0]).worst)
        report.max_A_imag = max(report.max_A_imag, qsde_matrices(g).A_imag_residual)
    worst = max(report.max_residual_S, report.max_residual_K, report.max_residual_R,
                report.max_residual_ABCD, report.max_order_disagreement)
    report.passed = worst <= tol
    if not report.passed:
        report.notes.append(f"largest residual {worst:.3e} exceeds tolerance {tol:g}")
    if netlist.static_scattering is not None:
        report.notes.append("realization includes a static scattering stage")
    return report
