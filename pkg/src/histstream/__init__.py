"""Differentially private continual release of histogram queries.

Streaming mechanisms for MaxSum, quantiles and other monotone sensitivity-1
histogram queries, plus an exact-oracle experiment harness.
"""

from histstream.noise import NoiseMode, NoiseSource, PrivacyParams
from histstream.streams import Stream, exact_prefix, generate
from histstream.queries import Query, QuerySet

__all__ = [
    "NoiseMode",
    "NoiseSource",
    "PrivacyParams",
    "Stream",
    "exact_prefix",
    "generate",
    "Query",
    "QuerySet",
]

__version__ = "0.1.0"
