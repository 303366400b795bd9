"""Synthesis of NCV quantum circuits from XOR-of-products Boolean functions."""
from .circuit import Circuit, Line, MctGate, NcvGate
from .factorization import factorize
from .mct_synth import apply_ctr, elide_trailing, synth_function
from .ncv import CostReport, lower_circuit, quantum_cost, simplify
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .pprm import BoolFunction, GvTerm, Literal, ProductTerm, evaluate, expand, normalize, parse_pprm
from .reorder import rearrange_max_last, reorder_method
from .verify import EquivalenceReport, check_equivalence

__version__ = "0.1.0"

__all__ = [
    "BoolFunction", "Circuit", "CostReport", "EquivalenceReport", "GvTerm", "Line", "Literal",
    "MctGate", "NcvGate", "PipelineConfig", "PipelineResult", "ProductTerm", "apply_ctr",
    "check_equivalence", "elide_trailing", "evaluate", "expand", "factorize", "lower_circuit",
    "normalize", "parse_pprm", "quantum_cost", "rearrange_max_last", "reorder_method",
    "run_pipeline", "simplify", "synth_function",
]
