"""Model-matrix representation of field-interconnected networks.

The model matrix of ``G = (S, L, H)`` is::

    [[-iH - L^†L/2, -L^†S],
     [ L,             S  ]]

partitioned by output ports (rows ``s_j``) and input ports (columns
``r_k``).  The operator-valued corner is never formed: every reduction acts
on ``(S, K, R)`` directly and folds Hamiltonian updates into ``R``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from .core import SystemParams, quadratic_im
from .errors import (
    InconsistentAdjacency,
    LabelError,
    MultiplicityMismatch,
    SingularConnection,
    UnknownPort,
)
from .slh import concat

MAX_CONDITION = 1e12

Edge = tuple[str, str]


@dataclass(frozen=True)
class Subsystem:
    """A named group of ports; used only for bookkeeping and DOT export."""

    name: str
    outputs: tuple[str, ...]
    inputs: tuple[str, ...]


def _offsets(ports) -> dict[str, slice]:
    out, start = {}, 0
    for label, mult in ports:
        out[label] = slice(start, start + mult)
        start += mult
    return out


@dataclass(frozen=True, eq=False)
class ModelMatrix:
    """Port-labelled model matrix of ``params``.

    Row labels are the output ports of ``params`` and column labels its
    input ports, each with its multiplicity.
    """

    params: SystemParams
    subsystems: tuple[Subsystem, ...] = field(default=())

    def __post_init__(self):
        for kind, ports in (("output", self.params.out_ports), ("input", self.params.in_ports)):
            labels = [p[0] for p in ports]
            dup = {x for x in labels if labels.count(x) > 1}
            if dup:
                raise LabelError(f"duplicate {kind} port labels: {sorted(dup)}")
            if sum(p[1] for p in ports) != self.params.m:
                raise LabelError(f"{kind} multiplicities do not sum to m={self.params.m}")
        object.__setattr__(self, "_rows", _offsets(self.params.out_ports))
        object.__setattr__(self, "_cols", _offsets(self.params.in_ports))

    @property
    def row_labels(self):
        return self.params.out_ports

    @property
    def col_labels(self):
        return self.params.in_ports

    def rows(self, out_label: str) -> slice:
        try:
            return self._rows[out_label]
        except KeyError:
            raise UnknownPort(f"no output port {out_label!r}") from None

    def cols(self, in_label: str) -> slice:
        try:
            return self._cols[in_label]
        except KeyError:
            raise UnknownPort(f"no input port {in_label!r}") from None

    def S_block(self, out_label: str, in_label: str) -> NDArray:
        """The scattering block ``M_{s_j r_k} = S_jk``."""
        return self.params.S[self.rows(out_label), self.cols(in_label)]

    def L_block(self, out_label: str) -> NDArray:
        """Coefficient rows of ``M_{s_j r_0} = L_j = K_j x``."""
        return self.params.K[self.rows(out_label)]

    def owner(self, label: str) -> str | None:
        for sub in self.subsystems:
            if label in sub.outputs or label in sub.inputs:
                return sub.name
        return None


def build_model(g: SystemParams, name: str = "G") -> ModelMatrix:
    sub = Subsystem(name, tuple(p[0] for p in g.out_ports), tuple(p[0] for p in g.in_ports))
    return ModelMatrix(g, (sub,))


def concat_models(m1: ModelMatrix, m2: ModelMatrix) -> ModelMatrix:
    """``M(G1) ⊞ M(G2) = M(G1 ⊞ G2)``; port labels must be disjoint."""
    for kind, a, b in (("output", m1.row_labels, m2.row_labels),
                       ("input", m1.col_labels, m2.col_labels)):
        clash = {p[0] for p in a} & {p[0] for p in b}
        if clash:
            raise LabelError(f"{kind} labels collide: {sorted(clash)}")
    return ModelMatrix(concat(m1.params, m2.params), m1.subsystems + m2.subsystems)


def concat_all(models: Iterable[ModelMatrix]) -> ModelMatrix:
    models = list(models)
    out = models[0]
    for mm in models[1:]:
        out = concat_models(out, mm)
    return out


def _loop_solve(loop: NDArray, rhs: NDArray, what: str) -> NDArray:
    if loop.size == 0:
        return np.zeros((0,) + rhs.shape[1:], dtype=complex)
    cond = np.linalg.cond(loop)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularConnection(f"{what}: loop matrix is singular (condition number {cond:.3g})")
    return np.linalg.solve(loop, rhs)


def _drop_ports(mm: ModelMatrix, outs: set[str], ins: set[str], S, K, R) -> ModelMatrix:
    g = mm.params
    params = SystemParams(S, K, R,
                          [p for p in g.in_ports if p[0] not in ins],
                          [p for p in g.out_ports if p[0] not in outs])
    subs = tuple(Subsystem(s.name,
                           tuple(x for x in s.outputs if x not in outs),
                           tuple(x for x in s.inputs if x not in ins))
                 for s in mm.subsystems)
    return ModelMatrix(params, subs)


def _complement(n: int, taken: Sequence[int]) -> list[int]:
    taken = set(taken)
    return [i for i in range(n) if i not in taken]


def eliminate_edge(mm: ModelMatrix, out_label: str, in_label: str) -> ModelMatrix:
    """Connect output ``s_k`` to input ``r_j`` and take the zero-delay limit.

    ``(S_red)_pq = S_pq + S_pj (I - S_kj)^{-1} S_kq``,
    ``(L_red)_p = L_p + S_pj (I - S_kj)^{-1} L_k`` and
    ``H_red = H + Σ_p Im{L_p^† S_pj (I - S_kj)^{-1} L_k}`` where the last
    sum runs over every output block, including ``k``.
    """
    r, c = mm.rows(out_label), mm.cols(in_label)
    if r.stop - r.start != c.stop - c.start:
        raise MultiplicityMismatch(
            f"edge ({out_label}, {in_label}) joins multiplicities "
            f"{r.stop - r.start} and {c.stop - c.start}")
    g = mm.params
    S, K = g.S, g.K
    k_rows = list(range(r.start, r.stop))
    j_cols = list(range(c.start, c.stop))
    p_rows = _complement(g.m, k_rows)
    q_cols = _complement(g.m, j_cols)

    loop = np.eye(len(k_rows)) - S[np.ix_(k_rows, j_cols)]
    w = _loop_solve(loop, np.hstack([S[np.ix_(k_rows, q_cols)], K[k_rows]]),
                    f"edge ({out_label}, {in_label})")
    w_S, w_L = w[:, :len(q_cols)], w[:, len(q_cols):]
    S_pj = S[np.ix_(p_rows, j_cols)]

    S_red = S[np.ix_(p_rows, q_cols)] + S_pj @ w_S
    K_red = K[p_rows] + S_pj @ w_L
    R_red = g.R + quadratic_im(K.conj().T @ S[:, j_cols] @ w_L)
    return _drop_ports(mm, {out_label}, {in_label}, S_red, K_red, R_red)


def eliminate_sequence(mm: ModelMatrix, edges: Iterable[Edge]) -> ModelMatrix:
    """Eliminate ``edges`` one at a time, in the given order."""
    for out_label, in_label in edges:
        mm = eliminate_edge(mm, out_label, in_label)
    return mm


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """0/1 pairing of internal output channels (rows) with input channels.

    ``eta[a, b] = 1`` when unit output channel ``a`` feeds unit input channel
    ``b``.  A port of multiplicity ``k`` contributes ``k`` consecutive
    channels ``(label, 0..k-1)``; an edge joins them index by index.
    """

    eta: NDArray[np.int64]
    edges: tuple[Edge, ...]
    out_channels: tuple[tuple[str, int], ...]
    in_channels: tuple[tuple[str, int], ...]

    def __post_init__(self):
        eta = np.asarray(self.eta)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        shape = (len(self.out_channels), len(self.in_channels))
        if eta.shape != shape:
            raise InconsistentAdjacency(f"eta has shape {eta.shape}, channels imply {shape}")
        if eta.size and not np.isin(eta, (0, 1)).all():
            raise InconsistentAdjacency("eta entries must be 0 or 1")
        if eta.size and (eta.sum(axis=0).max() > 1 or eta.sum(axis=1).max() > 1):
            raise InconsistentAdjacency("eta has more than one 1 in a row or column")
        out_idx = {ch: i for i, ch in enumerate(self.out_channels)}
        in_idx = {ch: i for i, ch in enumerate(self.in_channels)}
        expected = np.zeros(shape, dtype=int)
        for out_label, in_label in self.edges:
            t = 0
            while (out_label, t) in out_idx or (in_label, t) in in_idx:
                try:
                    expected[out_idx[(out_label, t)], in_idx[(in_label, t)]] = 1
                except KeyError:
                    raise InconsistentAdjacency(
                        f"edge ({out_label}, {in_label}) has unmatched channel {t}") from None
                t += 1
        if not np.array_equal(expected, eta):
            raise InconsistentAdjacency("eta does not match the edge list")

    @classmethod
    def from_edges(cls, mm: ModelMatrix, edges: Iterable[Edge]) -> "AdjacencyMatrix":
        edges = [tuple(e) for e in edges]
        outs = [e[0] for e in edges]
        ins = [e[1] for e in edges]
        for kind, used in (("output", outs), ("input", ins)):
            dup = {x for x in used if used.count(x) > 1}
            if dup:
                raise InconsistentAdjacency(f"{kind} ports used by several edges: {sorted(dup)}")
        for o, i in edges:
            r, c = mm.rows(o), mm.cols(i)
            if r.stop - r.start != c.stop - c.start:
                raise MultiplicityMismatch(
                    f"edge ({o}, {i}) joins multiplicities {r.stop - r.start} and {c.stop - c.start}")
        out_ch, in_ch = _internal_channels(mm, outs, ins)
        pos_in = {ch: b for b, ch in enumerate(in_ch)}
        eta = np.zeros((len(out_ch), len(in_ch)), dtype=np.int64)
        partner = dict(edges)
        for a, (label, t) in enumerate(out_ch):
            eta[a, pos_in[(partner[label], t)]] = 1
        return cls(eta, tuple(edges), out_ch, in_ch)


def _internal_channels(mm: ModelMatrix, outs, ins):
    outs, ins = set(outs), set(ins)
    out_ch = tuple((label, t) for label, mult in mm.row_labels if label in outs for t in range(mult))
    in_ch = tuple((label, t) for label, mult in mm.col_labels if label in ins for t in range(mult))
    return out_ch, in_ch


def eliminate_simultaneous(mm: ModelMatrix, eta: AdjacencyMatrix | Iterable[Edge]) -> ModelMatrix:
    """Eliminate every internal edge at once.

    With internal/external partition of ``S`` and ``L``:
    ``S_red = S_ee + S_ei (η - S_ii)^{-1} S_ie``,
    ``L_red = L_e + S_ei (η - S_ii)^{-1} L_i`` and
    ``H_red = H + Σ_{j=i,e} Im{L_j^† S_ji (η - S_ii)^{-1} L_i}``.
    """
    if not isinstance(eta, AdjacencyMatrix):
        eta = AdjacencyMatrix.from_edges(mm, eta)
    if not eta.edges:
        return mm
    outs = {e[0] for e in eta.edges}
    ins = {e[1] for e in eta.edges}
    out_ch, in_ch = _internal_channels(mm, outs, ins)
    if out_ch != eta.out_channels or in_ch != eta.in_channels:
        raise InconsistentAdjacency("adjacency channels do not match the model's port order")

    g = mm.params
    S, K = g.S, g.K
    i_rows = [mm.rows(label).start + t for label, t in out_ch]
    i_cols = [mm.cols(label).start + t for label, t in in_ch]
    e_rows = _complement(g.m, i_rows)
    e_cols = _complement(g.m, i_cols)

    loop = eta.eta - S[np.ix_(i_rows, i_cols)]
    w = _loop_solve(loop, np.hstack([S[np.ix_(i_rows, e_cols)], K[i_rows]]),
                    f"edges {list(eta.edges)}")
    w_S, w_L = w[:, :len(e_cols)], w[:, len(e_cols):]
    S_ei = S[np.ix_(e_rows, i_cols)]

    S_red = S[np.ix_(e_rows, e_cols)] + S_ei @ w_S
    K_red = K[e_rows] + S_ei @ w_L
    R_red = g.R + quadratic_im(K.conj().T @ S[:, i_cols] @ w_L)
    return _drop_ports(mm, outs, ins, S_red, K_red, R_red)


def model_to_dot(mm: ModelMatrix, edges: Iterable[Edge] = (), name: str = "network") -> str:
    """Graphviz view: subsystems as boxes, internal edges as solid arrows and
    external ports as dangling arrows to/from point nodes."""
    edges = [tuple(e) for e in edges]
    internal_out = {e[0] for e in edges}
    internal_in = {e[1] for e in edges}
    names = [s.name for s in mm.subsystems] or ["G"]

    def node(label):
        return mm.owner(label) or names[0]

    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=box];"]
    lines += [f'  "{nm}";' for nm in dict.fromkeys(names)]
    for o, i in edges:
        lines.append(f'  "{node(o)}" -> "{node(i)}" [label="{o} -> {i}"];')
    for label, mult in mm.col_labels:
        if label not in internal_in:
            lines.append(f'  "ext_{label}" [shape=point];')
            lines.append(f'  "ext_{label}" -> "{node(label)}" [label="{label} ({mult})"];')
    for label, mult in mm.row_labels:
        if label not in internal_out:
            lines.append(f'  "ext_{label}" [shape=point];')
            lines.append(f'  "{node(label)}" -> "ext_{label}" [label="{label} ({mult})"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def permuted_orders(edges: Sequence[Edge], count: int, rng: np.random.Generator) -> list[list[Edge]]:
    """``count`` random orderings of ``edges`` drawn from ``rng``."""
    edges = list(edges)
    if len(edges) <= 1:
        return [edges] * count
    orders = []
    for _ in range(count):
        perm = rng.permutation(len(edges))
        orders.append([edges[i] for i in perm])
    return orders
