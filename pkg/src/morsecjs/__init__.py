"""morsecjs: numerical Morse theory engine.

Layers:
  algebra       exact integer chain complexes, SNF, homology, cones
  flowcat       graded flow categories, Morse and cellular complexes
  continuation  chain-level flow continuations and exact triangles
  localmodel    blow-up chart formulas near breaking, smoothness checks
  morseflow     numerical flows on built-in closed surfaces
  cli           batch entry point
"""

from .algebra import (
    ChainComplex,
    ChainMap,
    HomologySummary,
    IntegerMatrix,
    homology,
    mapping_cone,
    smith_normal_form,
    verify_complex,
    verify_les_exactness,
)
from .flowcat import (
    EmbeddingDimensions,
    GradedFlowCategory,
    check_d_squared,
    cjs_cellular_complex,
    morse_complex,
    synthesize_embedding_dimensions,
)
from .continuation import (
    FlowContinuation,
    compose_continuations,
    continuation_chain_map,
    exact_triangle_report,
    merged_category,
)

__all__ = [
    "ChainComplex",
    "ChainMap",
    "EmbeddingDimensions",
    "FlowContinuation",
    "GradedFlowCategory",
    "HomologySummary",
    "IntegerMatrix",
    "check_d_squared",
    "cjs_cellular_complex",
    "compose_continuations",
    "continuation_chain_map",
    "exact_triangle_report",
    "homology",
    "mapping_cone",
    "merged_category",
    "morse_complex",
    "smith_normal_form",
    "synthesize_embedding_dimensions",
    "verify_complex",
    "verify_les_exactness",
]

__version__ = "0.1.0"
