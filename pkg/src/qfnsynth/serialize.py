"""JSON encoding of systems, model matrices, netlists and reports.

Complex numbers are ``[re, im]`` pairs and matrices are lists of rows.  Every
document carries ``schema`` and ``version`` keys and is checked against the
JSON Schemas shipped in ``qfnsynth/schemas``.
"""

from __future__ import annotations

import hashlib
import json
import math
from functools import lru_cache
from importlib import resources

import jsonschema
import numpy as np
from referencing import Registry, Resource

from .core import SystemParams
from .errors import SchemaError
from .model_matrix import ModelMatrix, Subsystem
from .netlist import Coupling, CouplingChoice, OscillatorBlock, SynthesisNetlist

VERSION = 1
SCHEMA_NAMES = ("system", "model_matrix", "netlist", "report")


@lru_cache(maxsize=None)
def _registry() -> tuple[Registry, dict]:
    schemas = {}
    for name in SCHEMA_NAMES:
        text = resources.files("qfnsynth.schemas").joinpath(f"{name}.schema.json").read_text()
        schemas[name] = json.loads(text)
    registry = Registry().with_resources(
        (s["$id"], Resource.from_contents(s)) for s in schemas.values())
    return registry, schemas


def schema(name: str) -> dict:
    return _registry()[1][name]


def validate(doc, name: str):
    registry, schemas = _registry()
    validator = jsonschema.Draft202012Validator(schemas[name], registry=registry)
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise SchemaError(f"{name} document invalid at {where}: {err.message}")


def canonical_json(obj) -> str:
    """Sorted keys, no whitespace, floats at 17 significant digits."""
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ",".join(json.dumps(str(k)) + ":" + canonical_json(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    x = float(obj)
    if not math.isfinite(x):
        raise ValueError(f"cannot canonicalize non-finite float {x}")
    return format(x + 0.0, ".17g")


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None


# -- matrices ---------------------------------------------------------------

def cmat_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def rmat_to_json(a) -> list:
    return [[float(v) for v in row] for row in np.asarray(a, dtype=float)]


def cmat_from_json(data, rows: int, cols: int) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float).reshape(rows, cols, 2)
    except ValueError:
        raise SchemaError(f"expected a {rows}x{cols} complex matrix") from None
    return arr[..., 0] + 1j * arr[..., 1]


def rmat_from_json(data, rows: int, cols: int) -> np.ndarray:
    try:
        return np.asarray(data, dtype=float).reshape(rows, cols)
    except ValueError:
        raise SchemaError(f"expected a {rows}x{cols} real matrix") from None


def _ports_to_json(ports) -> list:
    return [{"label": label, "multiplicity": mult} for label, mult in ports]


def _ports_from_json(data):
    if data is None:
        return None
    return [(p["label"], p["multiplicity"]) for p in data]


# -- systems ----------------------------------------------------------------

def system_to_dict(g: SystemParams) -> dict:
    return {
        "schema": "qfnsynth.system",
        "version": VERSION,
        "n_dof": g.n_dof,
        "m": g.m,
        "S": cmat_to_json(g.S),
        "K": cmat_to_json(g.K),
        "R": rmat_to_json(g.R),
        "in_ports": _ports_to_json(g.in_ports),
        "out_ports": _ports_to_json(g.out_ports),
    }


def system_from_dict(doc: dict) -> SystemParams:
    validate(doc, "system")
    n, m = doc["n_dof"], doc["m"]
    return SystemParams(
        cmat_from_json(doc["S"], m, m),
        cmat_from_json(doc["K"], m, 2 * n),
        rmat_from_json(doc["R"], 2 * n, 2 * n),
        in_ports=_ports_from_json(doc.get("in_ports")),
        out_ports=_ports_from_json(doc.get("out_ports")),
    )


def target_hash(g: SystemParams) -> str:
    """SHA-256 of the canonical JSON encoding of ``g``."""
    return hashlib.sha256(canonical_json(system_to_dict(g)).encode()).hexdigest()


# -- model matrices ---------------------------------------------------------

def model_to_dict(mm: ModelMatrix, edges=None) -> dict:
    doc = {
        "schema": "qfnsynth.model_matrix",
        "version": VERSION,
        "system": system_to_dict(mm.params),
        "subsystems": [{"name": s.name, "outputs": list(s.outputs), "inputs": list(s.inputs)}
                       for s in mm.subsystems],
    }
    if edges is not None:
        doc["edges"] = [list(e) for e in edges]
    return doc


def model_from_dict(doc: dict) -> tuple[ModelMatrix, list]:
    """Decode a model-matrix document; returns the model and its edge list."""
    validate(doc, "model_matrix")
    g = system_from_dict(doc["system"])
    subs = tuple(Subsystem(s["name"], tuple(s["outputs"]), tuple(s["inputs"]))
                 for s in doc.get("subsystems", ()))
    if not subs:
        subs = (Subsystem("G", tuple(p[0] for p in g.out_ports), tuple(p[0] for p in g.in_ports)),)
    return ModelMatrix(g, subs), [tuple(e) for e in doc.get("edges", [])]


# -- netlists ---------------------------------------------------------------

def netlist_to_dict(net: SynthesisNetlist, report=None) -> dict:
    doc = {
        "schema": "qfnsynth.netlist",
        "version": VERSION,
        "target_hash": net.target_hash,
        "m": net.m,
        "n": net.n,
        "passive": net.passive,
        "static_scattering": None if net.static_scattering is None else cmat_to_json(net.static_scattering),
        "choices": [
            {"pair": [j, k], "theta_jk": c.theta_jk, "theta_kj": c.theta_kj,
             "kappa": c.kappa, "parameterization": c.parameterization.value}
            for (j, k), c in sorted(net.choices.items())
        ],
        "oscillators": [
            {"index": b.j, "R": rmat_to_json(b.R),
             "couplings": [{"partner": c.k, "S": cmat_to_json(c.S), "K": cmat_to_json(c.K)}
                           for c in b.couplings]}
            for b in net.oscillators
        ],
        "interaction_edges": [list(e) for e in net.interaction_edges],
        "cascade_edges": [list(e) for e in net.cascade_edges],
    }
    if report is not None:
        doc["verification"] = report.to_dict()
    return doc


def netlist_from_dict(doc: dict) -> SynthesisNetlist:
    validate(doc, "netlist")
    blocks = []
    for b in doc["oscillators"]:
        couplings = []
        for c in b["couplings"]:
            size = len(c["S"])
            couplings.append(Coupling(c["partner"], cmat_from_json(c["S"], size, size),
                                      cmat_from_json(c["K"], size, 2)))
        blocks.append(OscillatorBlock(b["index"], rmat_from_json(b["R"], 2, 2), couplings))
    static = doc.get("static_scattering")
    m = doc["m"]
    return SynthesisNetlist(
        oscillators=blocks,
        interaction_edges=doc["interaction_edges"],
        cascade_edges=doc["cascade_edges"],
        target_hash=doc["target_hash"],
        m=m,
        passive=doc["passive"],
        choices={tuple(c["pair"]): CouplingChoice(c["theta_jk"], c["theta_kj"], c["kappa"],
                                                  c["parameterization"])
                 for c in doc.get("choices", [])},
        static_scattering=None if static is None else cmat_from_json(static, m, m),
    )
