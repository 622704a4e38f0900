"""Synthesis of linear quantum stochastic systems as field-coupled oscillator networks."""

from .core import DEFAULT_TOL, QsdeMatrices, SystemParams, validate_system
from .errors import *  # noqa: F401,F403
from .model_matrix import (
    AdjacencyMatrix,
    ModelMatrix,
    build_model,
    concat_models,
    eliminate_edge,
    eliminate_simultaneous,
)
from .netlist import CouplingChoice, Parameterization, SynthesisNetlist
from .slh import concat, is_passive, qsde_matrices, series, to_passive_form
from .synthesis import (
    cascade_direct_decompose,
    construct_h_red,
    direct_coupling_solve,
    synthesize,
    synthesize_passive,
    synthesize_with_scattering,
)

__version__ = "0.1.0"
