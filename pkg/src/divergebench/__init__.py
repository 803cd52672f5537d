"""Challenge-set evaluation harness for machine translation.

A challenge set probes specific structural divergences between a language
pair with short, hand-built sentences. This package covers the full
workflow: authoring checks, deterministic blinded annotation sessions, a
durable annotation service, majority aggregation, and table rendering. It
ships a complete worked en-fr evaluation whose published results the
``reproduce`` command re-derives from the raw verdicts.
"""

from .core import (
    ChallengeItem,
    ChallengeSet,
    DivergenceCategory,
    DocumentError,
    HighlightSpan,
    SystemOutput,
    SystemOutputSet,
    parse_challenge_set,
    parse_outputs,
    serialize_challenge_set,
    validate_challenge_set,
)
from .scoring import (
    AggregatedVerdict,
    Judgment,
    NaPolicy,
    Rate,
    ScoreReport,
    ScoringError,
    Verdict,
    aggregate,
    build_score_report,
)
from .session import AnnotationSession, BlindingKey, build_sessions, unblind

__version__ = "0.1.0"

__all__ = [
    "AggregatedVerdict",
    "AnnotationSession",
    "BlindingKey",
    "ChallengeItem",
    "ChallengeSet",
    "DivergenceCategory",
    "DocumentError",
    "HighlightSpan",
    "Judgment",
    "NaPolicy",
    "Rate",
    "ScoreReport",
    "ScoringError",
    "SystemOutput",
    "SystemOutputSet",
    "Verdict",
    "aggregate",
    "build_score_report",
    "build_sessions",
    "parse_challenge_set",
    "parse_outputs",
    "serialize_challenge_set",
    "unblind",
    "validate_challenge_set",
]
