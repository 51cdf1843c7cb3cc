"""Core data model: documents, tokens, spans, mentions, clusters.

Spans are token-granular with inclusive ends. Every position is a
(document index, token index) pair, ordered lexicographically; the
document order is fixed when the corpus is built, so positions give a
total order over the whole multi-document text.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import FormatError, SpanError


@dataclass(frozen=True, order=True)
class TokenRef:
    """Position of one token: (document index, token index)."""

    doc: int
    tok: int


@dataclass(frozen=True)
class Token:
    text: str
    pos: str | None = None

    def __post_init__(self):
        if not self.text:
            raise FormatError("token text must be non-empty")


@dataclass(frozen=True)
class Document:
    doc_id: str
    tokens: tuple[Token, ...]


@dataclass(frozen=True)
class MentionSpan:
    """Contiguous token range inside one document; ``end`` is inclusive."""

    doc: int
    start: int
    end: int

    def __post_init__(self):
        if self.doc < 0 or self.start < 0 or self.start > self.end:
            raise SpanError("bad span (%d, %d..%d)" % (self.doc, self.start, self.end))

    @property
    def start_ref(self) -> TokenRef:
        return TokenRef(self.doc, self.start)

    @property
    def end_ref(self) -> TokenRef:
        return TokenRef(self.doc, self.end)

    def key(self) -> tuple[int, int, int]:
        return (self.doc, self.start, self.end)

    def __len__(self) -> int:
        return self.end - self.start + 1

    def tokens(self) -> Iterator[TokenRef]:
        for i in range(self.start, self.end + 1):
            yield TokenRef(self.doc, i)

    def covers(self, other: "MentionSpan") -> bool:
        return (self.doc == other.doc
                and self.start <= other.start and other.end <= self.end)

    def to_json(self) -> dict:
        return {"doc": self.doc, "start": self.start, "end": self.end}

    @classmethod
    def from_json(cls, data: dict) -> "MentionSpan":
        try:
            return cls(int(data["doc"]), int(data["start"]), int(data["end"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError("bad span object: %r" % (data,)) from exc


def span_order(a: MentionSpan, b: MentionSpan) -> int:
    """Total order over spans: lexicographic by (doc, start, end).

    Returns -1, 0 or 1. For pairwise non-overlapping spans this is the
    presentation order of the annotation flow.
    """
    ka, kb = a.key(), b.key()
    return (ka > kb) - (ka < kb)


def spans_overlap(a: MentionSpan, b: MentionSpan) -> bool:
    """True iff the spans share at least one token."""
    return a.doc == b.doc and a.start <= b.end and b.start <= a.end


@dataclass(frozen=True)
class Mention:
    """A span with an engine-assigned identity. Text is always derived
    from the corpus, never stored."""

    mention_id: str
    span: MentionSpan


@dataclass
class Cluster:
    """A coreference cluster; ``mentions`` is in assignment order, and the
    cluster label is the text of its first mention."""

    cluster_id: str
    mentions: list[str]


class Corpus:
    """Immutable ordered collection of tokenized documents.

    Documents are stored in presentation order: the ``order`` permutation
    of the JSON form is applied at construction and document indices in
    spans refer to that order.
    """

    def __init__(self, documents: Iterable[Document]):
        self.documents: tuple[Document, ...] = tuple(documents)
        if not self.documents:
            raise FormatError("corpus needs at least one document")
        seen = set()
        for d in self.documents:
            if not d.tokens:
                raise FormatError("document %r has no tokens" % d.doc_id)
            if d.doc_id in seen:
                raise FormatError("duplicate document id %r" % d.doc_id)
            seen.add(d.doc_id)

    def __len__(self) -> int:
        return len(self.documents)

    def doc_len(self, doc: int) -> int:
        return len(self.documents[doc].tokens)

    def token(self, ref: TokenRef) -> Token:
        return self.documents[ref.doc].tokens[ref.tok]

    def validate_span(self, span: MentionSpan) -> None:
        if span.doc >= len(self.documents):
            raise SpanError("span %s: no document %d" % (span.key(), span.doc))
        if span.end >= self.doc_len(span.doc):
            raise SpanError("span %s exceeds document length %d"
                            % (span.key(), self.doc_len(span.doc)))

    def text_of(self, span: MentionSpan) -> str:
        self.validate_span(span)
        toks = self.documents[span.doc].tokens[span.start:span.end + 1]
        return " ".join(t.text for t in toks)

    def to_json(self) -> dict:
        return {"documents": [
            {"id": d.doc_id,
             "tokens": [{"text": t.text} if t.pos is None
                        else {"text": t.text, "pos": t.pos}
                        for t in d.tokens]}
            for d in self.documents]}

    @classmethod
    def from_json(cls, data: dict) -> "Corpus":
        if not isinstance(data, dict) or "documents" not in data:
            raise FormatError("corpus JSON needs a 'documents' list", path="/documents")
        docs = []
        for i, d in enumerate(data["documents"]):
            try:
                tokens = tuple(Token(t["text"], t.get("pos")) for t in d["tokens"])
                docs.append(Document(str(d["id"]), tokens))
            except (KeyError, TypeError) as exc:
                raise FormatError("bad document entry", path="/documents/%d" % i) from exc
        order = data.get("order")
        if order is not None:
            if sorted(order) != list(range(len(docs))):
                raise FormatError("'order' is not a permutation of 0..%d" % (len(docs) - 1),
                                  path="/order")
            docs = [docs[i] for i in order]
        return cls(docs)


def extract_mentions(corpus: Corpus, pos_tags: Iterable[str]) -> list[Mention]:
    """Single-token mention per token whose POS tag is in ``pos_tags``.

    Every token must be tagged; untagged tokens are reported all at once.
    Output is in span order and non-overlapping by construction.
    """
    recipe = set(pos_tags)
    untagged = [TokenRef(d, i)
                for d, doc in enumerate(corpus.documents)
                for i, t in enumerate(doc.tokens) if t.pos is None]
    if untagged:
        listing = ", ".join("(%d, %d)" % (r.doc, r.tok) for r in untagged)
        raise FormatError("tokens without part-of-speech tag: %s" % listing)
    out = []
    for d, doc in enumerate(corpus.documents):
        for i, t in enumerate(doc.tokens):
            if t.pos in recipe:
                out.append(Mention("m%d" % len(out), MentionSpan(d, i, i)))
    return out
