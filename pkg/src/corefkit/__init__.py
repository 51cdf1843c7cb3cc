"""Coreference annotation toolkit.

Cluster-based span annotation with an exhaustive-submission gate, a
token-level consolidation pass that re-derives cluster suggestions from
a prior annotation, scriptable onboarding (tutorial and guided modes),
CoNLL and JSON interchange, the standard coreference metrics, and a JSON
session protocol that UIs and tests drive the engines through.
"""
from .annotation import AnnotationState, apply_action
from .conll import export_conll, import_conll
from .corpus import (Cluster, Corpus, Document, Mention, MentionSpan, Token,
                     TokenRef, extract_mentions, span_order, spans_overlap)
from .errors import (CorefError, FormatError, IncompleteStateError,
                     MentionSetMismatch, OverlapError, ProtocolError,
                     ScriptError, SpanError)
from .metrics import (MetricReport, Score, b_cubed, ceaf_e, conll_average,
                      muc, percent, score_partitions)
from .onboarding import (ACK, GuidedScript, GuidedSession, StepResult,
                         TutorialScript, TutorialSession, validate_script)
from .review import (ACCEPT, ReviewState, TraceStep, build_antecedent_map,
                     run_identity_review, run_review)
from .session import Session, SessionService, view_delta
from .stateio import (canonical_json, dumps_state, export_state, import_state,
                      loads_state, parse_json, validate)

__version__ = "1.0.0"

__all__ = [
    "ACCEPT", "ACK", "AnnotationState", "Cluster", "CorefError", "Corpus",
    "Document", "FormatError", "GuidedScript", "GuidedSession",
    "IncompleteStateError", "Mention", "MentionSetMismatch", "MentionSpan",
    "MetricReport", "OverlapError", "ProtocolError", "ReviewState", "Score",
    "ScriptError", "Session", "SessionService", "SpanError", "StepResult",
    "Token", "TokenRef", "TraceStep", "TutorialScript", "TutorialSession",
    "apply_action", "b_cubed", "build_antecedent_map", "canonical_json",
    "ceaf_e", "conll_average", "dumps_state", "export_conll", "export_state",
    "extract_mentions", "import_conll", "import_state", "loads_state", "muc",
    "parse_json", "percent", "run_identity_review", "run_review",
    "score_partitions", "span_order", "spans_overlap", "validate",
    "validate_script", "view_delta",
]
