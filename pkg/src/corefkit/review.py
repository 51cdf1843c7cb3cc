"""Consolidation pass over a completed annotation.

The original annotation is re-presented mention by mention, earliest
first. For each presented mention the reviewer first settles the span
(accept it, reshape it, or commit an unrelated earlier span), then picks
a cluster. The engine suggests the clusters that correspond to the
original annotator's assignment, resolved through two token-level maps:

* the antecedent map, built once from the original clustering: each
  annotated token points at every token of its cluster that precedes it
  (tokens of earlier mentions, and earlier tokens of its own mention, so
  the halves of a split mention keep vouching for each other);
* a token-to-cluster map that grows with each committed reviewer span.

Candidate clusters for a span are the reviewer clusters holding any
committed antecedent token of any of its tokens, listed in cluster
creation order. An empty candidate set means the span opens something
the original annotation never connected backward.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .annotation import AnnotationState
from .corpus import Cluster, Corpus, Mention, MentionSpan, TokenRef, spans_overlap
from .errors import (IncompleteStateError, OverlapError, ProtocolError,
                     ScriptError, SpanError)

ACCEPT = "accept"


def build_antecedent_map(original: AnnotationState) -> dict[TokenRef, frozenset[TokenRef]]:
    """Static token-level map from the original annotation: every token of
    an annotated mention maps to all same-cluster tokens before it."""
    original.require_complete()
    ant: dict[TokenRef, frozenset[TokenRef]] = {}
    for cluster in original.clusters.values():
        refs = sorted(t for mid in cluster.mentions
                      for t in original.mentions[mid].span.tokens())
        seen: list[TokenRef] = []
        for t in refs:
            ant[t] = frozenset(seen)
            seen.append(t)
    return ant


@dataclass
class TraceStep:
    """One visible event of a scripted review, JSON-friendly."""

    kind: str                      # "assign" | "split" | "fix" | "insert"
    span: MentionSpan
    text: str
    presented: str | None = None   # text of the stack top the event acted on
    candidates: list[dict] | None = None   # [{"id", "label"}], assign steps only
    decision: dict | None = None           # {"cluster", "label", "new"}

    def to_json(self) -> dict:
        out = {"kind": self.kind, "span": self.span.to_json(), "text": self.text}
        if self.presented is not None:
            out["presented"] = self.presented
        if self.candidates is not None:
            out["candidates"] = self.candidates
        if self.decision is not None:
            out["decision"] = self.decision
        return out


class ReviewState:
    """Interactive review session.

    Strictly alternating two-phase protocol per step: ``review_span``
    fixes the span under review and computes its candidates, then
    ``select_cluster`` commits it. The unreviewed rest of the original
    annotation sits on a stack ordered by span, top = earliest.
    """

    def __init__(self, corpus: Corpus):
        self.corpus = corpus
        # reverse span order; top of stack = last element
        self.stack: list[tuple[Mention, str]] = []
        self.ant: Mapping[TokenRef, frozenset[TokenRef]] = {}
        self.t2c: dict[TokenRef, str] = {}
        self.mentions: dict[str, Mention] = {}
        self.assigned: dict[str, str] = {}
        self.clusters: dict[str, Cluster] = {}
        self.current_span: MentionSpan | None = None
        self.candidates: list[str] = []
        self.last_committed: MentionSpan | None = None
        self._mention_seq = 0
        self._cluster_seq = 0
        self._split_seq = 0

    @classmethod
    def create(cls, original: AnnotationState) -> "ReviewState":
        original.require_complete()
        state = cls(original.corpus)
        state.ant = build_antecedent_map(original)
        entries = [(original.mentions[mid], cid)
                   for mid, cid in original.assigned.items()]
        entries.sort(key=lambda e: e[0].span.key(), reverse=True)
        state.stack = entries
        return state

    # -- queries ----------------------------------------------------------

    @property
    def presented(self) -> Mention | None:
        """Stack top: the original mention currently offered for review."""
        return self.stack[-1][0] if self.stack else None

    @property
    def awaiting_cluster(self) -> bool:
        return self.current_span is not None

    @property
    def is_complete(self) -> bool:
        return not self.stack and self.current_span is None

    def cluster_label(self, cluster_id: str) -> str:
        first = self.clusters[cluster_id].mentions[0]
        return self.corpus.text_of(self.mentions[first].span)

    def committed_spans(self) -> list[MentionSpan]:
        return [m.span for m in self.mentions.values()]

    def candidate_entries(self) -> list[dict]:
        return [{"id": cid, "label": self.cluster_label(cid)}
                for cid in self.candidates]

    def partition(self) -> list[frozenset]:
        return [frozenset(self.mentions[mid].span.key() for mid in c.mentions)
                for c in self.clusters.values()]

    # -- operations -------------------------------------------------------

    def review_span(self, proposed: MentionSpan | str = ACCEPT) -> list[str]:
        """Fix the span under review and return its candidate clusters.

        ``ACCEPT`` takes the presented span as-is. A proposed span may
        reshape the presented mention (absorbing or truncating stack
        entries it covers), or sit strictly before it to insert a mention
        the original annotation missed. It may not overlap or precede
        anything already committed.
        """
        if self.awaiting_cluster:
            raise ProtocolError("span already under review; pick a cluster first")
        if not self.stack:
            raise ProtocolError("review finished: nothing left to present")
        if proposed == ACCEPT:
            span = self.stack[-1][0].span
        elif isinstance(proposed, MentionSpan):
            span = proposed
            self.corpus.validate_span(span)
        else:
            raise ProtocolError("expected a span or ACCEPT, got %r" % (proposed,))
        if self.last_committed is not None and span.start_ref <= self.last_committed.end_ref:
            if spans_overlap(span, self.last_committed):
                raise OverlapError("span %s overlaps reviewed span %s"
                                   % (span.key(), self.last_committed.key()))
            raise SpanError("span %s precedes already-reviewed text" % (span.key(),))

        end = span.end_ref
        while self.stack and self.stack[-1][0].span.end_ref <= end:
            self.stack.pop()
        if self.stack and self.stack[-1][0].span.start_ref <= end:
            mention, original_cluster = self.stack.pop()
            tail = MentionSpan(mention.span.doc, span.end + 1, mention.span.end)
            self.stack.append((Mention("s%d" % self._split_seq, tail), original_cluster))
            self._split_seq += 1

        self.current_span = span
        self.candidates = self._compute_candidates(span)
        return list(self.candidates)

    def select_cluster(self, target: str | None = None) -> str:
        """Commit the span under review to ``target`` (any bank cluster,
        candidate or not) or to a new cluster when ``None``."""
        if not self.awaiting_cluster:
            raise ProtocolError("no span under review")
        if target is None:
            cluster = Cluster("c%d" % self._cluster_seq, [])
            self._cluster_seq += 1
            self.clusters[cluster.cluster_id] = cluster
        elif target in self.clusters:
            cluster = self.clusters[target]
        else:
            raise ProtocolError("unknown cluster %r" % target)
        span = self.current_span
        m = Mention("m%d" % self._mention_seq, span)
        self._mention_seq += 1
        self.mentions[m.mention_id] = m
        self.assigned[m.mention_id] = cluster.cluster_id
        cluster.mentions.append(m.mention_id)
        for t in span.tokens():
            self.t2c[t] = cluster.cluster_id
        self.last_committed = span
        self.current_span = None
        self.candidates = []
        return cluster.cluster_id

    def result(self) -> AnnotationState:
        """The reviewed annotation as a complete state."""
        if not self.is_complete:
            raise IncompleteStateError("%d mentions still unreviewed" % len(self.stack))
        spans = [[self.mentions[mid].span for mid in c.mentions]
                 for c in self.clusters.values()]
        return AnnotationState.from_clusters(self.corpus, spans)

    # -- internals --------------------------------------------------------

    def _compute_candidates(self, span: MentionSpan) -> list[str]:
        found = set()
        for t in span.tokens():
            for a in self.ant.get(t, ()):
                cid = self.t2c.get(a)
                if cid is not None:
                    found.add(cid)
        return [cid for cid in self.clusters if cid in found]


def _decision_target(choice, candidates: Sequence[str], position: int) -> str | None:
    """Resolve a script's cluster decision to a cluster id (None = new)."""
    if choice == "new":
        return None
    if isinstance(choice, dict) and "candidate_index" in choice:
        idx = choice["candidate_index"]
        if not isinstance(idx, int) or not 0 <= idx < len(candidates):
            raise ScriptError("step %d: candidate index %r out of range (%d candidates)"
                              % (position, idx, len(candidates)), position)
        return candidates[idx]
    if isinstance(choice, dict) and "cluster_id" in choice:
        return str(choice["cluster_id"])
    raise ScriptError("step %d: bad cluster decision %r" % (position, choice), position)


def _span_decision(entry, position: int) -> MentionSpan | str:
    sp = entry.get("span", ACCEPT)
    if sp == ACCEPT:
        return ACCEPT
    if isinstance(sp, dict):
        return MentionSpan.from_json(sp)
    raise ScriptError("step %d: bad span decision %r" % (position, sp), position)


def run_review(original: AnnotationState,
               script: Sequence[dict]) -> tuple[ReviewState, list[TraceStep]]:
    """Drive a full review from a decision script.

    Each script entry supplies one span decision and one cluster decision:
    ``{"span": "accept" | {doc,start,end},
       "cluster": "new" | {"candidate_index": i} | {"cluster_id": s}}``.
    Returns the finished state plus a step trace. The script must run out
    exactly when the stack does.
    """
    state = ReviewState.create(original)
    trace: list[TraceStep] = []
    pos = 0
    while not state.is_complete:
        if pos >= len(script):
            raise ScriptError("script exhausted at step %d with %d mentions unreviewed"
                              % (pos, len(state.stack)), pos)
        entry = script[pos]
        presented = state.presented
        presented_text = state.corpus.text_of(presented.span)
        span = _span_decision(entry, pos)
        candidates = state.review_span(span)
        fixed = state.current_span
        if fixed != presented.span:
            trace.append(TraceStep(kind=_edit_kind(fixed, presented.span),
                                   span=fixed, text=state.corpus.text_of(fixed),
                                   presented=presented_text))
        target = _decision_target(entry.get("cluster", "new"), candidates, pos)
        entries = state.candidate_entries()
        is_new = target is None
        cid = state.select_cluster(target)
        trace.append(TraceStep(kind="assign", span=fixed,
                               text=state.corpus.text_of(fixed),
                               presented=presented_text,
                               candidates=entries,
                               decision={"cluster": cid,
                                         "label": state.cluster_label(cid),
                                         "new": is_new}))
        pos += 1
    if pos < len(script):
        raise ScriptError("script has %d unused steps after review finished"
                          % (len(script) - pos), pos)
    return state, trace


def _edit_kind(fixed: MentionSpan, presented: MentionSpan) -> str:
    if fixed.end_ref < presented.start_ref:
        return "insert"
    if (fixed.doc == presented.doc and fixed.start == presented.start
            and fixed.end < presented.end):
        return "split"
    return "fix"


def run_identity_review(original: AnnotationState) -> tuple[ReviewState, list[TraceStep]]:
    """Review that rubber-stamps the original annotation."""
    state = ReviewState.create(original)
    trace: list[TraceStep] = []
    while not state.is_complete:
        presented = state.presented
        candidates = state.review_span(ACCEPT)
        if len(candidates) > 1:
            raise ProtocolError("identity review saw %d candidates for %s"
                                % (len(candidates), presented.span.key()))
        entries = state.candidate_entries()
        target = candidates[0] if candidates else None
        cid = state.select_cluster(target)
        trace.append(TraceStep(kind="assign", span=presented.span,
                               text=state.corpus.text_of(presented.span),
                               presented=state.corpus.text_of(presented.span),
                               candidates=entries,
                               decision={"cluster": cid,
                                         "label": state.cluster_label(cid),
                                         "new": target is None}))
    return state, trace
