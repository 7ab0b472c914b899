"""Private information retrieval over minimum-storage regenerating codes.

Layers, bottom up: exact prime-field arithmetic (``field``), immutable
matrices with a swappable compiled/pure compute backend (``matrix``,
``kernels``), the product-matrix storage code (``msr``), the private
retrieval protocol and its metrics (``pir``), and a deployable cluster:
storage daemons, coordinator, and CLI (``store``, ``node``,
``coordinator``, ``cluster``, ``cli``).
"""

from pmsr.field import Field, FieldElement, is_prime
from pmsr.kernels import BACKEND
from pmsr.matrix import Matrix, SingularMatrixError, vandermonde
from pmsr.msr import (
    CodeMatrix,
    EncodingMatrix,
    MessageMatrix,
    MsrParams,
    build_encoding_matrix,
    encode,
    message_matrix_from_record,
    record_from_message_matrix,
    recover,
    recover_oracle,
    repair_helper_symbol,
    repair_regenerate,
)
from pmsr.pir import (
    Interference,
    MetricsReport,
    PatternMatrix,
    PirConfig,
    VerifyReport,
    build_patterns,
    decode_record,
    decode_subquery,
    fresh_queries,
    gen_queries,
    metrics_report,
    node_answer,
    privacy_coupling_check,
    verify_scheme,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CodeMatrix",
    "EncodingMatrix",
    "Field",
    "FieldElement",
    "Interference",
    "Matrix",
    "MessageMatrix",
    "MetricsReport",
    "MsrParams",
    "PatternMatrix",
    "PirConfig",
    "SingularMatrixError",
    "VerifyReport",
    "build_encoding_matrix",
    "build_patterns",
    "decode_record",
    "decode_subquery",
    "encode",
    "fresh_queries",
    "gen_queries",
    "is_prime",
    "message_matrix_from_record",
    "metrics_report",
    "node_answer",
    "privacy_coupling_check",
    "record_from_message_matrix",
    "recover",
    "recover_oracle",
    "repair_helper_symbol",
    "repair_regenerate",
    "vandermonde",
    "verify_scheme",
    "__version__",
]
