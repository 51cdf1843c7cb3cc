"""CoNLL coreference format: the exchange surface toward standard
scorers and model pipelines.

Column profile (tab-separated): doc_id, part, token index, word, coref.
Coref marks follow the usual parenthesis discipline — ``(3`` opens
cluster 3, ``3)`` closes it, ``(3)`` is a single-token mention, ``-`` is
outside any mention. This suite enforces non-overlap, so at most one
mention is ever open.
"""
from __future__ import annotations

import re

from .annotation import AnnotationState
from .corpus import Corpus, Document, MentionSpan, Token
from .errors import FormatError

_BEGIN = re.compile(r"^#begin document \((.*)\); part (\d+)$")
_END = "#end document"


def export_conll(state: AnnotationState) -> str:
    """Render a complete annotation, one block per corpus document.

    Cluster ids become dense integers in cluster creation order, so the
    output is deterministic for a given state. Refuses incomplete states:
    pending mentions have no CoNLL representation.
    """
    state.require_complete()
    number = {cid: i for i, cid in enumerate(state.clusters)}
    opens: dict[tuple[int, int], tuple[int, int]] = {}
    for cid, cluster in state.clusters.items():
        for mid in cluster.mentions:
            span = state.mentions[mid].span
            opens[(span.doc, span.start)] = (number[cid], span.end)

    lines: list[str] = []
    for d, doc in enumerate(state.corpus.documents):
        lines.append("#begin document (%s); part 000" % doc.doc_id)
        closing: tuple[int, int] | None = None   # (cluster number, end index)
        for i, token in enumerate(doc.tokens):
            if (d, i) in opens:
                num, end = opens[(d, i)]
                if end == i:
                    coref = "(%d)" % num
                else:
                    coref = "(%d" % num
                    closing = (num, end)
            elif closing is not None and i == closing[1]:
                coref = "%d)" % closing[0]
                closing = None
            else:
                coref = "-"
            lines.append("\t".join((doc.doc_id, "0", str(i), token.text, coref)))
        lines.append("")
        lines.append(_END)
    return "\n".join(lines) + "\n"


def import_conll(text: str) -> tuple[Corpus, AnnotationState]:
    """Parse CoNLL text back into a corpus plus a complete annotation.

    Cluster identity is the integer mark; reviewer-visible ids are
    reassigned in order of first appearance. Words become tokens without
    part-of-speech. Violations are reported with 1-based line numbers.
    """
    docs: list[Document] = []
    chains: dict[int, list[MentionSpan]] = {}
    doc_id: str | None = None
    words: list[Token] = []
    open_mark: tuple[int, int, int] | None = None   # (cluster, start, line)

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#begin"):
            m = _BEGIN.match(line)
            if not m:
                raise FormatError("malformed begin header", line=lineno)
            if doc_id is not None:
                raise FormatError("begin header inside open document", line=lineno)
            doc_id = m.group(1)
            words = []
            open_mark = None
            continue
        if line == _END:
            if doc_id is None:
                raise FormatError("end marker outside any document", line=lineno)
            if open_mark is not None:
                raise FormatError("unbalanced parentheses: cluster %d never closed"
                                  % open_mark[0], line=lineno)
            if not words:
                raise FormatError("no tokens in document %r" % doc_id, line=lineno)
            docs.append(Document(doc_id, tuple(words)))
            doc_id = None
            continue
        if doc_id is None:
            raise FormatError("token row outside any document", line=lineno)
        cols = line.split("\t")
        if len(cols) != 5:
            raise FormatError("expected 5 tab-separated columns, got %d"
                              % len(cols), line=lineno)
        row_doc, _part, idx_text, word, coref = cols
        if row_doc != doc_id:
            raise FormatError("doc id %r does not match header %r"
                              % (row_doc, doc_id), line=lineno)
        index = len(words)
        if idx_text != str(index):
            raise FormatError("token index %r out of sequence (expected %d)"
                              % (idx_text, index), line=lineno)
        words.append(Token(word))
        open_mark = _apply_coref(coref, len(docs), index, lineno, open_mark, chains)

    if doc_id is not None:
        raise FormatError("document %r never closed" % doc_id, line=len(text.splitlines()))
    if not docs:
        raise FormatError("no documents in input", line=1)

    corpus = Corpus(tuple(docs))
    ordered = sorted(chains, key=lambda c: min(s.key() for s in chains[c]))
    state = AnnotationState.from_clusters(corpus, [chains[c] for c in ordered])
    return corpus, state


def _apply_coref(field: str, doc: int, index: int, lineno: int,
                 open_mark: tuple[int, int, int] | None,
                 chains: dict[int, list[MentionSpan]]) -> tuple[int, int, int] | None:
    if field == "-":
        return open_mark
    if "|" in field:
        raise FormatError("overlapping mentions at line %d" % lineno, line=lineno)
    single = re.fullmatch(r"\((\d+)\)", field)
    opener = re.fullmatch(r"\((\d+)", field)
    closer = re.fullmatch(r"(\d+)\)", field)
    if single:
        if open_mark is not None:
            raise FormatError("overlapping mentions at line %d" % lineno, line=lineno)
        chains.setdefault(int(single.group(1)), []).append(
            MentionSpan(doc, index, index))
        return None
    if opener:
        if open_mark is not None:
            raise FormatError("overlapping mentions at line %d" % lineno, line=lineno)
        return (int(opener.group(1)), index, lineno)
    if closer:
        cluster = int(closer.group(1))
        if open_mark is None or open_mark[0] != cluster:
            raise FormatError("unbalanced parentheses: stray close of cluster %d"
                              % cluster, line=lineno)
        chains.setdefault(cluster, []).append(MentionSpan(doc, open_mark[1], index))
        return None
    raise FormatError("unrecognized coref field %r" % field, line=lineno)
