"""dep-annotate: batch dependency annotation into depjson records."""

__version__ = "0.1.0"

from .annotate import (AdapterConfig, SchemaViolation, Summary, VerifyReport,
                       annotate, verify_schema)
from .backends import (BackendUnavailable, BuiltinBackend, CoreNLPBackend,
                       coarse_pos, get_backend, ptb_to_upos)

__all__ = [
    "AdapterConfig", "BackendUnavailable", "BuiltinBackend", "CoreNLPBackend",
    "SchemaViolation", "Summary", "VerifyReport", "annotate", "coarse_pos",
    "get_backend", "ptb_to_upos", "verify_schema",
]
