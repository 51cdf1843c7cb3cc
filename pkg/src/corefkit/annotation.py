"""Sequential cluster-assignment engine.

Mentions are presented one at a time: the current mention is always the
span-order-minimal entry of the pending queue. The annotator may reshape
its span or add missing spans, then assigns the current mention to an
existing cluster or a new one. Submission is gated on the pending queue
being empty, which guarantees exhaustive annotation.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from .corpus import Cluster, Corpus, Mention, MentionSpan, spans_overlap
from .errors import IncompleteStateError, OverlapError, ProtocolError, SpanError


class AnnotationState:
    """One annotation session over a corpus.

    Mention and cluster ids are deterministic counters ("m0", "c0", ...)
    so that identical action sequences replay to identical states.
    Mutations go through the operation methods below, which re-assert the
    non-overlap and partition invariants.
    """

    def __init__(self, corpus: Corpus):
        self.corpus = corpus
        self.mentions: dict[str, Mention] = {}
        self.pending: list[str] = []          # mention ids, span-order sorted
        self.assigned: dict[str, str] = {}    # mention id -> cluster id
        self.clusters: dict[str, Cluster] = {}  # insertion order = creation order
        self.selected: str | None = None
        self._mention_seq = 0
        self._cluster_seq = 0

    # -- construction -----------------------------------------------------

    @classmethod
    def create(cls, corpus: Corpus,
               mentions: Iterable[Mention | MentionSpan]) -> "AnnotationState":
        """Start a session: sort the input mentions, auto-assign the first
        one to a fresh cluster, leave the rest pending.

        Incoming mention identities are ignored; ids are reassigned in
        span order so unsorted input yields the same state as sorted.
        """
        spans = [m.span if isinstance(m, Mention) else m for m in mentions]
        if not spans:
            raise ProtocolError("cannot start annotation with no mentions")
        for s in spans:
            corpus.validate_span(s)
        spans.sort(key=MentionSpan.key)
        for a, b in zip(spans, spans[1:]):
            if spans_overlap(a, b):
                raise OverlapError("input mentions overlap: %s / %s" % (a.key(), b.key()))
        state = cls(corpus)
        for s in spans:
            m = state._new_mention(s)
            state.pending.append(m.mention_id)
        first = state.pending.pop(0)
        cluster = state._new_cluster()
        state.assigned[first] = cluster.cluster_id
        cluster.mentions.append(first)
        state._check()
        return state

    @classmethod
    def from_clusters(cls, corpus: Corpus,
                      clusters: Sequence[Sequence[MentionSpan]]) -> "AnnotationState":
        """Build a complete state whose partition equals ``clusters``.

        Replays the assignment flow in span order; cluster creation order
        is the span order of each cluster's earliest mention.
        """
        owner: dict[tuple, int] = {}
        for i, group in enumerate(clusters):
            if not group:
                raise ProtocolError("empty cluster in input")
            for span in group:
                if span.key() in owner:
                    raise OverlapError("span %s appears in two clusters" % (span.key(),))
                owner[span.key()] = i
        state = cls.create(corpus, [MentionSpan(*k) for k in owner])
        created: dict[int, str] = {}
        first = next(iter(state.assigned))
        created[owner[state.mentions[first].span.key()]] = state.assigned[first]
        while not state.is_complete:
            group = owner[state.current.span.key()]
            if group in created:
                state.assign_current(created[group])
            else:
                created[group] = state.assign_current()
        return state

    @classmethod
    def restore(cls, corpus: Corpus, mentions: dict[str, Mention],
                pending: list[str], clusters: list[Cluster],
                selected: str | None, mention_seq: int,
                cluster_seq: int) -> "AnnotationState":
        """Rebuild a state from persisted fields (see ``stateio``)."""
        state = cls(corpus)
        state.mentions = dict(mentions)
        state.pending = list(pending)
        state.clusters = {c.cluster_id: c for c in clusters}
        for c in clusters:
            for mid in c.mentions:
                state.assigned[mid] = c.cluster_id
        state.selected = selected
        state._mention_seq = mention_seq
        state._cluster_seq = cluster_seq
        state._check()
        return state

    # -- queries ----------------------------------------------------------

    @property
    def current(self) -> Mention | None:
        """The mention awaiting a decision (head of the pending queue)."""
        return self.mentions[self.pending[0]] if self.pending else None

    @property
    def is_complete(self) -> bool:
        return not self.pending

    def require_complete(self) -> None:
        if self.pending:
            raise IncompleteStateError("%d mentions still pending" % len(self.pending))

    def mention(self, mention_id: str) -> Mention:
        return self.mentions[mention_id]

    @property
    def counters(self) -> tuple[int, int]:
        """(next mention number, next cluster number) — persisted so a
        restored state keeps generating fresh ids."""
        return self._mention_seq, self._cluster_seq

    def mention_text(self, mention_id: str) -> str:
        return self.corpus.text_of(self.mentions[mention_id].span)

    def cluster_label(self, cluster_id: str) -> str:
        """Label = text of the cluster's earliest-assigned mention."""
        return self.mention_text(self.clusters[cluster_id].mentions[0])

    def assigned_spans(self) -> list[MentionSpan]:
        return [self.mentions[mid].span for mid in self.assigned]

    def partition(self) -> list[frozenset]:
        """Cluster structure as sets of span keys, in creation order."""
        return [frozenset(self.mentions[mid].span.key() for mid in c.mentions)
                for c in self.clusters.values()]

    # -- operations -------------------------------------------------------

    def fix_span(self, new_span: MentionSpan) -> None:
        """Replace the current mention's span.

        Pending mentions the new span passes over are absorbed; a pending
        mention it partially covers keeps only its tail; if the fix cuts
        the current span short, the leftover tail re-enters the queue as a
        new mention. Assigned spans are untouchable.
        """
        cur = self.current
        if cur is None:
            raise ProtocolError("no current mention to fix")
        if new_span.doc != cur.span.doc:
            raise SpanError("fixed span must stay in document %d" % cur.span.doc)
        self.corpus.validate_span(new_span)
        if new_span == cur.span:
            return
        for mid in self.assigned:
            if spans_overlap(new_span, self.mentions[mid].span):
                raise OverlapError("span %s overlaps assigned mention %s"
                                   % (new_span.key(), mid))

        new_end = new_span.end_ref
        survivors = []
        for mid in self.pending[1:]:
            sp = self.mentions[mid].span
            if sp.end_ref <= new_end:
                del self.mentions[mid]           # fully absorbed
                continue
            if sp.start_ref <= new_end:          # partial cover: keep the tail
                self.mentions[mid] = Mention(
                    mid, MentionSpan(sp.doc, new_span.end + 1, sp.end))
            survivors.append(mid)

        old = cur.span
        self.mentions[cur.mention_id] = Mention(cur.mention_id, new_span)
        self.pending = [cur.mention_id] + survivors
        if old.start_ref <= new_end < old.end_ref:
            # the fix shrank the span from the left; queue the remainder
            tail = self._new_mention(MentionSpan(old.doc, new_span.end + 1, old.end))
            self.pending.append(tail.mention_id)
        self._sort_pending()
        self._check()

    def add_mention(self, span: MentionSpan) -> Mention:
        """Introduce a span missing from the input. It becomes the current
        mention if it precedes the current one in span order."""
        self.corpus.validate_span(span)
        for mid in list(self.assigned) + self.pending:
            if spans_overlap(span, self.mentions[mid].span):
                raise OverlapError("span %s overlaps mention %s" % (span.key(), mid))
        m = self._new_mention(span)
        self.pending.append(m.mention_id)
        self._sort_pending()
        self._check()
        return m

    def assign_current(self, target: str | None = None) -> str:
        """Assign the current mention; ``target=None`` opens a new cluster.
        Returns the receiving cluster id and advances the queue."""
        cur = self.current
        if cur is None:
            raise ProtocolError("nothing to assign: annotation is complete")
        if target is None:
            cluster = self._new_cluster()
        else:
            cluster = self._get_cluster(target)
        self.pending.pop(0)
        self.assigned[cur.mention_id] = cluster.cluster_id
        cluster.mentions.append(cur.mention_id)
        self._check()
        return cluster.cluster_id

    def reassign(self, mention_id: str, target: str | None = None) -> str:
        """Move an already-assigned mention to another cluster (``None``
        opens a new one). A cluster emptied by the move is dropped."""
        if mention_id not in self.assigned:
            raise ProtocolError("mention %r is not assigned yet" % mention_id)
        source = self.assigned[mention_id]
        if target == source:
            return source
        if target is None:
            cluster = self._new_cluster()
        else:
            cluster = self._get_cluster(target)
        src = self.clusters[source]
        src.mentions.remove(mention_id)
        if not src.mentions:
            del self.clusters[source]
            if self.selected == source:
                self.selected = None
        self.assigned[mention_id] = cluster.cluster_id
        cluster.mentions.append(mention_id)
        self._check()
        return cluster.cluster_id

    def select_cluster(self, cluster_id: str | None) -> None:
        """Highlight a cluster in the bank (or clear with ``None``)."""
        if cluster_id is not None:
            self._get_cluster(cluster_id)
        self.selected = cluster_id

    # -- internals --------------------------------------------------------

    def _new_mention(self, span: MentionSpan) -> Mention:
        m = Mention("m%d" % self._mention_seq, span)
        self._mention_seq += 1
        self.mentions[m.mention_id] = m
        return m

    def _new_cluster(self) -> Cluster:
        c = Cluster("c%d" % self._cluster_seq, [])
        self._cluster_seq += 1
        self.clusters[c.cluster_id] = c
        return c

    def _get_cluster(self, cluster_id: str) -> Cluster:
        try:
            return self.clusters[cluster_id]
        except KeyError:
            raise ProtocolError("unknown cluster %r" % cluster_id) from None

    def _sort_pending(self) -> None:
        self.pending.sort(key=lambda mid: self.mentions[mid].span.key())

    def _check(self) -> None:
        spans = sorted((self.mentions[mid].span for mid in
                        list(self.assigned) + self.pending),
                       key=MentionSpan.key)
        for a, b in zip(spans, spans[1:]):
            assert not spans_overlap(a, b), "overlap invariant broken"
        assert not set(self.pending) & set(self.assigned)
        covered = [mid for c in self.clusters.values() for mid in c.mentions]
        assert sorted(covered) == sorted(self.assigned), "clusters must partition assigned"
        for c in self.clusters.values():
            assert c.mentions, "empty cluster %s" % c.cluster_id
            for mid in c.mentions:
                assert self.assigned[mid] == c.cluster_id


def apply_action(state: AnnotationState, op: str, params: dict) -> dict:
    """Dispatch one logged/protocol action onto the state.

    Op vocabulary matches the action log: ``fix``, ``add``, ``assign``,
    ``assign_new``, ``reassign``, plus the view-only ``select``. Returns
    the op's result fields (cluster/mention ids it produced or touched).
    """
    def need(key: str):
        if key not in params:
            raise ProtocolError("op %r needs a %r parameter" % (op, key))
        return params[key]

    if op == "fix":
        state.fix_span(MentionSpan.from_json(need("span")))
        return {}
    if op == "add":
        m = state.add_mention(MentionSpan.from_json(need("span")))
        return {"mention": m.mention_id}
    if op == "assign":
        return {"cluster": state.assign_current(need("cluster"))}
    if op == "assign_new":
        return {"cluster": state.assign_current(None)}
    if op == "reassign":
        return {"cluster": state.reassign(need("mention"), params.get("cluster"))}
    if op == "select":
        state.select_cluster(params.get("cluster"))
        return {}
    raise ProtocolError("unknown op %r" % op)
