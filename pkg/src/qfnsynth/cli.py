"""Command-line entry point, ``qfnsynth``.

Exit status is 0 when every check passes, 1 on a failed verification or a
non-passive system, 2 on unreadable input or invalid options and 3 when an
interconnection is degenerate or singular.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from .core import DEFAULT_TOL
from .errors import (
    DegenerateScattering,
    DimensionError,
    HashMismatch,
    InconsistentAdjacency,
    InvalidChoice,
    LabelError,
    MultiplicityMismatch,
    NotPassive,
    PreconditionError,
    SchemaError,
    SingularConnection,
    UnknownPort,
)
from .model_matrix import eliminate_sequence, eliminate_simultaneous, model_to_dot
from .netlist import CouplingChoice, Parameterization, netlist_to_dot
from .serialize import (
    VERSION,
    cmat_to_json,
    dumps,
    load,
    model_from_dict,
    model_to_dict,
    netlist_from_dict,
    netlist_to_dict,
    rmat_to_json,
    system_from_dict,
    system_to_dict,
    target_hash,
)
from .slh import passivity_scan, qsde_matrices, to_passive_form
from .synthesis import cascade_direct_decompose, synthesize_passive, synthesize_with_scattering
from .verify import roundtrip

COMMANDS = ("synthesize", "verify", "reduce", "passive-check", "decompose", "qsde")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SINGULAR = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    input_path: str
    output_path: str | None = None
    tolerance: float = DEFAULT_TOL
    seed: int = 0
    orders: int = 10
    theta: dict = field(default_factory=dict)
    kappa: dict = field(default_factory=dict)
    parameterization: str | None = None
    export_dot: str | None = None
    target_path: str | None = None
    edges: list = field(default_factory=list)
    sequential: bool = False
    passive: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")


def _sci(x: float) -> str:
    """``0.0e0`` style exponent formatting."""
    mantissa, exp = f"{x:.1e}".split("e")
    return f"{mantissa}e{int(exp)}"


def _choices(cfg: RunConfig, n: int) -> dict:
    """Per-pair overrides from ``--theta``, ``--kappa`` and ``--param``."""
    pairs = set(cfg.theta) | set(cfg.kappa)
    if cfg.parameterization is not None:
        pairs |= {(j, k) for j in range(1, n + 1) for k in range(j + 1, n + 1)}
    out = {}
    for j, k in pairs:
        if j == k or not (1 <= j <= n and 1 <= k <= n):
            raise InvalidChoice(f"no oscillator pair ({j}, {k}) in an {n}-oscillator target")
        lo, hi = min(j, k), max(j, k)
        kwargs = {}
        default = CouplingChoice()
        # an angle given as (j, k) with j > k is theta_kj of the ordered pair
        th_lo_hi = cfg.theta.get((lo, hi), default.theta_jk)
        th_hi_lo = cfg.theta.get((hi, lo), default.theta_kj)
        kwargs["theta_jk"], kwargs["theta_kj"] = th_lo_hi, th_hi_lo
        kwargs["kappa"] = cfg.kappa.get((lo, hi), cfg.kappa.get((hi, lo), default.kappa))
        if cfg.parameterization is not None:
            kwargs["parameterization"] = Parameterization(cfg.parameterization)
        out[(lo, hi)] = CouplingChoice(**kwargs)
    return out


def _write(cfg: RunConfig, text: str, out):
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        out.write(text)


def _write_dot(cfg: RunConfig, text: str):
    if cfg.export_dot:
        with open(cfg.export_dot, "w") as fh:
            fh.write(text)


def _synthesize(cfg: RunConfig, out, err) -> int:
    target = system_from_dict(load(cfg.input_path))
    choices = _choices(cfg, target.n_dof)
    if cfg.passive:
        netlist = synthesize_passive(target, choices, cfg.tolerance)
    else:
        _, netlist = synthesize_with_scattering(target, choices, cfg.tolerance)
    report = roundtrip(target, netlist, cfg.orders, cfg.seed, cfg.tolerance)
    _write(cfg, dumps(netlist_to_dict(netlist, report)), out)
    _write_dot(cfg, netlist_to_dot(netlist))
    err.write(report.summary())
    return EXIT_OK if report.passed else EXIT_FAIL


def _verify(cfg: RunConfig, out, err) -> int:
    if not cfg.target_path:
        raise PreconditionError("verify needs --target SYSTEM.json")
    netlist = netlist_from_dict(load(cfg.input_path))
    target = system_from_dict(load(cfg.target_path))
    report = roundtrip(target, netlist, cfg.orders, cfg.seed, cfg.tolerance)
    _write(cfg, dumps(report.to_dict()), out)
    err.write(report.summary())
    return EXIT_OK if report.passed else EXIT_FAIL


def _reduce(cfg: RunConfig, out, err) -> int:
    mm, edges = model_from_dict(load(cfg.input_path))
    edges = edges + [tuple(e) for e in cfg.edges]
    if cfg.sequential:
        reduced = eliminate_sequence(mm, edges)
    else:
        reduced = eliminate_simultaneous(mm, edges)
    _write(cfg, dumps(model_to_dict(reduced)), out)
    _write_dot(cfg, model_to_dot(mm, edges))
    return EXIT_OK


def _passive_check(cfg: RunConfig, out, err) -> int:
    g = system_from_dict(load(cfg.input_path))
    form = to_passive_form(g)
    scan = passivity_scan(g.R, g.K)
    ok = form.residual <= cfg.tolerance
    out.write(f"{'passive' if ok else 'not passive'}: residual {_sci(form.residual)}\n")
    out.write(f"structural scan: {_sci(scan)}\n")
    if cfg.output_path:
        doc = {"schema": "qfnsynth.passive_form", "version": VERSION,
               "target_hash": target_hash(g), "passive": ok, "residual": form.residual,
               "structural_scan": scan,
               "R_tilde": cmat_to_json(form.R_tilde), "K_tilde": cmat_to_json(form.K_tilde)}
        with open(cfg.output_path, "w") as fh:
            fh.write(dumps(doc))
    return EXIT_OK if ok else EXIT_FAIL


def _decompose(cfg: RunConfig, out, err) -> int:
    g = system_from_dict(load(cfg.input_path))
    oscillators, hd = cascade_direct_decompose(g)
    doc = {"schema": "qfnsynth.cascade_direct", "version": VERSION,
           "target_hash": target_hash(g),
           "cascade": [system_to_dict(o) for o in oscillators],
           "direct_terms": [{"pair": [j, k], "M": rmat_to_json(M)} for (j, k), M in sorted(hd.items())]}
    _write(cfg, dumps(doc), out)
    return EXIT_OK


def _qsde(cfg: RunConfig, out, err) -> int:
    g = system_from_dict(load(cfg.input_path))
    q = qsde_matrices(g)
    doc = {"schema": "qfnsynth.qsde", "version": VERSION, "target_hash": target_hash(g),
           "A": rmat_to_json(q.A), "B": cmat_to_json(q.B), "C": cmat_to_json(q.C),
           "D": cmat_to_json(q.D), "A_imag_residual": q.A_imag_residual}
    _write(cfg, dumps(doc), out)
    return EXIT_OK


_HANDLERS = {
    "synthesize": _synthesize,
    "verify": _verify,
    "reduce": _reduce,
    "passive-check": _passive_check,
    "decompose": _decompose,
    "qsde": _qsde,
}


def run(cfg: RunConfig, out=None, err=None) -> int:
    """Execute one command; returns the process exit status."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        return _HANDLERS[cfg.command](cfg, out, err)
    except (SchemaError, PreconditionError, InvalidChoice, DimensionError, LabelError,
            UnknownPort, MultiplicityMismatch, InconsistentAdjacency, HashMismatch,
            OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    except NotPassive as exc:
        err.write(f"error: {exc}\n")
        return EXIT_FAIL
    except (DegenerateScattering, SingularConnection) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_SINGULAR


def _pair_value(kind):
    def parse(values):
        j, k, v = values
        return (int(j), int(k)), kind(v)
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qfnsynth", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="input JSON document")
    common.add_argument("-o", "--output", help="write the result here instead of stdout")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="check tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=0, help="seed for random elimination orders")
    common.add_argument("--orders", type=int, default=10, help="number of sequential orders to test")
    common.add_argument("--dot", metavar="OUT.dot", help="also write a Graphviz topology file")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synthesize", parents=[common], help="synthesize a netlist for a system")
    s.add_argument("--theta", nargs=3, action="append", default=[], metavar=("J", "K", "VALUE"),
                   help="phase of S_jk for the channel from oscillator J to K")
    s.add_argument("--kappa", nargs=3, action="append", default=[], metavar=("J", "K", "VALUE"),
                   help="free coupling strength of pair (J, K)")
    s.add_argument("--param", choices=[p.value for p in Parameterization],
                   help="which coupling of every pair is fixed to [κ, iκ]")
    s.add_argument("--passive", action="store_true", help="require and check a passive realization")

    v = sub.add_parser("verify", parents=[common], help="re-check a netlist against its target")
    v.add_argument("--target", required=True, help="target system JSON")

    r = sub.add_parser("reduce", parents=[common], help="eliminate internal edges of a model matrix")
    r.add_argument("--edge", nargs=2, action="append", default=[], metavar=("OUT", "IN"),
                   help="connect output port OUT to input port IN (repeatable)")
    r.add_argument("--sequential", action="store_true", help="eliminate one edge at a time")

    sub.add_parser("passive-check", parents=[common], help="passive form and structural residual")
    sub.add_parser("decompose", parents=[common], help="cascade plus direct-interaction form")
    sub.add_parser("qsde", parents=[common], help="state-space matrices (A, B, C, D)")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    theta = dict(_pair_value(float)(t) for t in getattr(args, "theta", []))
    kappa = dict(_pair_value(float)(t) for t in getattr(args, "kappa", []))
    return RunConfig(
        command=args.command,
        input_path=args.input,
        output_path=args.output,
        tolerance=args.tol,
        seed=args.seed,
        orders=args.orders,
        theta=theta,
        kappa=kappa,
        parameterization=getattr(args, "param", None),
        export_dot=args.dot,
        target_path=getattr(args, "target", None),
        edges=[tuple(e) for e in getattr(args, "edge", [])],
        sequential=getattr(args, "sequential", False),
        passive=getattr(args, "passive", False),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
