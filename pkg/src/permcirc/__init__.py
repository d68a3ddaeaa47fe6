"""Toffoli-Hadamard circuit amplitudes as integer matrix permanents.

The pipeline: parse a circuit, normalize it so every line segment meets at
most one Toffoli, label it with GF(2) variables, fix the boundary, and compile
the clause set into a single integer matrix G whose permanent equals the
solution gap #{f=0} - #{f=1}, so that <out|U|in> = per(G) / sqrt(2)^h. Four
backends cross-check each other: exact state-vector simulation, solution-gap
enumeration, exact permanents (Ryser / Glynn), and a Monte-Carlo estimator.
"""

from .circuit import (
    Circuit,
    Gate,
    Hadamard,
    NormalizationReport,
    Toffoli,
    bits_to_index,
    format_basis_state,
    normalize,
    parse_basis_state,
    parse_circuit,
    random_circuit,
    serialize_circuit,
)
from .encoder import (
    Encoding,
    EncodingStructureWarning,
    GadgetTemplate,
    IntMatrix,
    amplitude_from_permanent,
    encode,
    encode_poly,
    export_dense,
    export_dot,
    export_matrix_market,
    gadget_cubic,
    gadget_quadratic,
    gadget_unary,
    read_matrix_market,
)
from .gf2poly import (
    Gf2Poly,
    Labeling,
    Substitution,
    count_gap,
    eval_poly,
    label_circuit,
    poly_to_text,
    substitute,
    xor_monomials,
)
from .permanent import (
    McEstimate,
    NormReport,
    gurvits_estimator_value,
    gurvits_norm_report,
    per_glynn_exact,
    per_gurvits,
    per_naive,
    per_ryser,
    spectral_norm,
)
from .statevector import DyadicAmplitude, DyadicState, amplitude, simulate

from . import errors

__version__ = "0.1.0"

__all__ = [
    "Circuit", "Gate", "Hadamard", "Toffoli", "NormalizationReport",
    "parse_circuit", "serialize_circuit", "normalize", "random_circuit",
    "parse_basis_state", "format_basis_state", "bits_to_index",
    "Gf2Poly", "Labeling", "Substitution", "label_circuit", "substitute",
    "eval_poly", "count_gap", "poly_to_text", "xor_monomials",
    "IntMatrix", "GadgetTemplate", "Encoding", "EncodingStructureWarning",
    "gadget_quadratic", "gadget_cubic", "gadget_unary",
    "encode", "encode_poly", "amplitude_from_permanent",
    "export_matrix_market", "read_matrix_market", "export_dense", "export_dot",
    "per_naive", "per_ryser", "per_glynn_exact", "per_gurvits",
    "gurvits_estimator_value", "spectral_norm", "gurvits_norm_report",
    "McEstimate", "NormReport",
    "DyadicAmplitude", "DyadicState", "simulate", "amplitude",
    "errors",
]
