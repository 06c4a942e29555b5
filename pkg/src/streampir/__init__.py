"""Streaming private information retrieval over convolutionally coded storage.

Core layers: exact finite-field arithmetic and linear algebra, convolutional
code diagnostics (column distances, stacked MDS levels), code construction
and search, the star-product retrieval protocol with two-stage erasure
decoding, channel models, and the experiment drivers.  The FastAPI app in
:mod:`streampir.service` exposes the drivers; :mod:`streampir.cli` is a thin
client over that app.
"""

from .conv import (ConvCode, column_distance_oracle, encode_truncated, is_basic,
                   is_column_optimal, is_mdp, is_stacked_mds)
from .errors import (BudgetExceededError, ConfigError, CorruptedStreamError,
                     FieldMismatchError, SearchExhaustedError)
from .factory import (SearchResult, SuitabilityReport, construct_alpha_power,
                      search_code, verify_suitability)
from .gf import (FieldElement, FieldSpec, lookup_primitive_spec, prime_field,
                 sample_uniform)
from .matrices import FieldMatrix, SolveResult, SolveVerdict

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError", "ConfigError", "ConvCode", "CorruptedStreamError",
    "FieldElement", "FieldMatrix", "FieldMismatchError", "FieldSpec",
    "SearchExhaustedError", "SearchResult", "SolveResult", "SolveVerdict",
    "SuitabilityReport", "column_distance_oracle", "construct_alpha_power",
    "encode_truncated", "is_basic", "is_column_optimal", "is_mdp",
    "is_stacked_mds", "lookup_primitive_spec", "prime_field", "sample_uniform",
    "search_code", "verify_suitability",
]
