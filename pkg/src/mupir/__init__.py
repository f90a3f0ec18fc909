"""Multi-user private information retrieval with cache-equipped users over GF(2)."""
from __future__ import annotations

from .audit import (CorruptedScheme, StrawmanScheme, audit_privacy, measure_load, realization_loads,
                    verify_correctness)
from .bounds import (RateCurve, cia_load, caching_converse_quarter, distinct_optimal_load, gap_ratio,
                     lower_convex_envelope, memory_share, pd_load, single_user_pir_bound,
                     uncoded_optimal_load, yu_bound_6x6)
from .cia import Cia1Scheme, Cia2Scheme
from .distinct import dd_corner1, dd_corner2
from .errors import (DecodeFailure, DimensionMismatch, IndivisibleLength, InvalidDemand, InvalidParameter,
                     MupirError, NotEnumerable, OutOfRange, ParamMismatch, SingularMatrix)
from .gf2 import BitMatrix, BitVector
from .product import NaiveScheme, ProductDesign, naive_scheme
from .sjpir import SjScheme
from .system import MessageLibrary, Query, Scheme, SystemParams, Transcript, execute, run_transcript

__all__ = [
    "BitMatrix", "BitVector", "Cia1Scheme", "Cia2Scheme", "CorruptedScheme", "DecodeFailure",
    "DimensionMismatch", "IndivisibleLength", "InvalidDemand", "InvalidParameter", "MessageLibrary",
    "MupirError", "NaiveScheme", "NotEnumerable", "OutOfRange", "ParamMismatch", "ProductDesign", "Query",
    "RateCurve", "Scheme", "SingularMatrix", "SjScheme", "StrawmanScheme", "SystemParams", "Transcript",
    "audit_privacy", "caching_converse_quarter", "cia_load", "dd_corner1", "dd_corner2",
    "distinct_optimal_load", "execute", "gap_ratio", "lower_convex_envelope", "measure_load",
    "memory_share", "naive_scheme", "pd_load", "realization_loads", "run_transcript",
    "single_user_pir_bound", "uncoded_optimal_load", "verify_correctness", "yu_bound_6x6",
]
