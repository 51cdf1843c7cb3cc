"""Uniform JSON message protocol over the annotation, review, and
onboarding engines.

A session wraps one engine behind ``{session_id, seq, op, params}``
request messages. Successful actions append to an action log; the
session snapshot is just ``{session_id, mode, config, log}``, and
restoring replays the log through the very same dispatch path, so a
restored session is behaviorally identical to the original. Session ids
are content hashes of the config, and engine ids are deterministic
counters, which together make snapshots byte-for-byte reproducible.
"""
from __future__ import annotations

import hashlib
from typing import Any

from .annotation import AnnotationState, apply_action
from .conll import export_conll
from .corpus import Corpus, Mention, MentionSpan
from .errors import (CorefError, FormatError, IncompleteStateError,
                     MentionSetMismatch, OverlapError, ProtocolError,
                     ScriptError, SpanError)
from .onboarding import (GuidedScript, GuidedSession, TutorialScript,
                         TutorialSession)
from .review import ACCEPT, ReviewState
from .stateio import canonical_json, dumps_state, import_state, parse_json, validate

MODES = ("annotate", "review", "tutorial", "guided")

# ops that mutate annotation state, straight from the action-log vocabulary
_ANNOTATE_OPS = ("fix", "add", "assign", "assign_new", "reassign", "select")

_ERROR_CODES = (
    (MentionSetMismatch, "mention_mismatch"),
    (OverlapError, "overlap"),
    (SpanError, "span"),
    (IncompleteStateError, "incomplete"),
    (ScriptError, "script"),
    (FormatError, "format"),
    (ProtocolError, "protocol"),
)

_REGION_FIELDS = {
    "documents": ("documents",),
    "memberships": ("memberships",),
    "current": ("current",),
    "bank": ("bank",),
    "candidates": ("candidates",),
    "status": ("mode", "version", "complete", "pending_count"),
    "overlay": ("prompt", "feedback", "toast"),
}


def error_code(exc: CorefError) -> str:
    for cls, code in _ERROR_CODES:
        if isinstance(exc, cls):
            return code
    return "error"


def session_id_for(config: dict) -> str:
    digest = hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()
    return "s" + digest[:16]


def view_delta(old: dict | None, new: dict) -> dict:
    """Which view regions changed, plus the full refreshed view."""
    if old is None:
        regions = list(_REGION_FIELDS)
    else:
        regions = [region for region, fields in _REGION_FIELDS.items()
                   if any(old[f] != new[f] for f in fields)]
    return {"regions": regions, "view": new}


class Session:
    """One engine instance behind the message protocol."""

    def __init__(self, config: dict):
        validate(config, "session-config")
        self.mode: str = config["mode"]
        self.config = config
        self.session_id = session_id_for(config)
        self.log: list[dict] = []
        self.version = 0
        self.last_seq: int | None = None
        self.last_feedback: str | None = None
        self.last_toast: str | None = None
        self.engine = self._build_engine(config)

    def _build_engine(self, config: dict):
        if self.mode == "annotate":
            corpus = Corpus.from_json(config["corpus"])
            spans = [MentionSpan.from_json(m) for m in config["mentions"]]
            return AnnotationState.create(corpus, spans)
        if self.mode == "review":
            return ReviewState.create(import_state(config["state"]))
        if self.mode == "tutorial":
            task = config["task"]
            state = AnnotationState.create(
                Corpus.from_json(task["corpus"]),
                [MentionSpan.from_json(m) for m in task["mentions"]])
            return TutorialSession(state, TutorialScript.from_json(config["script"]))
        if self.mode == "guided":
            script = GuidedScript.from_json(
                {"task": config["task"], "steps": config["steps"]})
            return GuidedSession(script)
        raise ProtocolError("unknown mode %r" % self.mode)

    # -- protocol ----------------------------------------------------------

    def handle(self, message: dict) -> dict:
        """Process one request message; always returns a response dict."""
        seq = message["seq"]
        if self.last_seq is not None and seq <= self.last_seq:
            return self._error(seq, ProtocolError(
                "stale seq %d (already at %d)" % (seq, self.last_seq)), "conflict")
        self.last_seq = seq
        op = message["op"]
        params = message.get("params", {})
        before = self.view()
        try:
            result = self._dispatch(seq, op, params)
        except CorefError as exc:
            return self._error(seq, exc)
        return {"seq": seq, "ok": True, "version": self.version,
                "result": result, "view_delta": view_delta(before, self.view())}

    def _error(self, seq: int, exc: CorefError, code: str | None = None) -> dict:
        return {"seq": seq, "ok": False,
                "error": {"code": code or error_code(exc), "message": str(exc)}}

    def _dispatch(self, seq: int, op: str, params: dict) -> dict:
        handler = {"annotate": self._apply_annotate,
                   "review": self._apply_review,
                   "tutorial": self._apply_onboarding,
                   "guided": self._apply_onboarding}[self.mode]
        return handler(seq, op, params)

    def _apply_annotate(self, seq: int, op: str, params: dict) -> dict:
        if op not in _ANNOTATE_OPS:
            raise ProtocolError("op %r not available in annotate mode" % op)
        result = apply_action(self.engine, op, params)
        self._record(seq, op, params)
        return result

    def _apply_review(self, seq: int, op: str, params: dict) -> dict:
        engine: ReviewState = self.engine
        if op == "review":
            raw = params.get("span", ACCEPT)
            span = raw if raw == ACCEPT else MentionSpan.from_json(raw)
            engine.review_span(span)
            result: dict[str, Any] = {"candidates": engine.candidate_entries()}
        elif op == "select_candidate":
            index = params.get("index")
            if not isinstance(index, int) or not 0 <= index < len(engine.candidates):
                raise ProtocolError("candidate index %r out of range (%d candidates)"
                                    % (index, len(engine.candidates)))
            result = {"cluster": engine.select_cluster(engine.candidates[index])}
        elif op == "assign":
            if "cluster" not in params:
                raise ProtocolError("op 'assign' needs a 'cluster' parameter")
            result = {"cluster": engine.select_cluster(params["cluster"])}
        elif op == "assign_new":
            result = {"cluster": engine.select_cluster(None)}
        else:
            raise ProtocolError("op %r not available in review mode" % op)
        self._record(seq, op, params)
        return result

    def _apply_onboarding(self, seq: int, op: str, params: dict) -> dict:
        outcome = self.engine.step({"op": op, **params})
        self.last_feedback = outcome.feedback if not outcome.accepted else None
        self.last_toast = outcome.toast if outcome.accepted else None
        self._record(seq, op, params, accepted=outcome.accepted)
        result = {"accepted": outcome.accepted}
        if outcome.feedback is not None:
            result["feedback"] = outcome.feedback
        if outcome.toast is not None:
            result["toast"] = outcome.toast
        return result

    def _record(self, seq: int, op: str, params: dict,
                accepted: bool = True) -> None:
        entry = {"op": op, **params, "seq": seq}
        if self.mode in ("tutorial", "guided"):
            entry["accepted"] = accepted
        self.log.append(entry)
        if accepted:
            self.version += 1

    # -- view model ---------------------------------------------------------

    def view(self) -> dict:
        if self.mode == "review":
            vm = self._review_view()
        else:
            state = self.engine if self.mode == "annotate" else self.engine.state
            vm = self._annotation_view(state)
        vm.update(mode=self.mode, version=self.version,
                  complete=self._complete(),
                  prompt=self._prompt(), feedback=self.last_feedback,
                  toast=self.last_toast)
        return vm

    def _complete(self) -> bool:
        if self.mode == "annotate":
            return self.engine.is_complete
        if self.mode == "review":
            return self.engine.is_complete
        if self.mode == "tutorial":
            return self.engine.passed
        return self.engine.completed

    def _prompt(self) -> dict | None:
        if self.mode != "tutorial":
            return None
        step = self.engine.current_step
        if step is None:
            return None
        return {"text": step.prompt, "target": step.target}

    def _annotation_view(self, state: AnnotationState) -> dict:
        corpus = state.corpus
        cur = state.current
        return {
            "documents": _documents(corpus),
            "memberships": _memberships(corpus, state.mentions, state.clusters),
            "current": _span_view(corpus, cur.span) if cur else None,
            "pending_count": len(state.pending),
            "bank": [{"id": c.cluster_id,
                      "label": state.cluster_label(c.cluster_id),
                      "size": len(c.mentions),
                      "selected": c.cluster_id == state.selected}
                     for c in state.clusters.values()],
            "candidates": [],
        }

    def _review_view(self) -> dict:
        engine: ReviewState = self.engine
        corpus = engine.corpus
        if engine.awaiting_cluster:
            span = engine.current_span
        else:
            span = engine.presented.span if engine.presented else None
        return {
            "documents": _documents(corpus),
            "memberships": _memberships(corpus, engine.mentions, engine.clusters),
            "current": _span_view(corpus, span) if span else None,
            "pending_count": len(engine.stack) + (1 if engine.awaiting_cluster else 0),
            "bank": [{"id": c.cluster_id,
                      "label": engine.cluster_label(c.cluster_id),
                      "size": len(c.mentions),
                      "selected": False}
                     for c in engine.clusters.values()],
            "candidates": engine.candidate_entries() if engine.awaiting_cluster else [],
        }

    # -- persistence ---------------------------------------------------------

    def snapshot_data(self) -> dict:
        return {"session_id": self.session_id, "mode": self.mode,
                "config": self.config, "log": self.log}

    def snapshot(self) -> str:
        return canonical_json(self.snapshot_data())


def _documents(corpus: Corpus) -> list[dict]:
    return [{"id": doc.doc_id, "tokens": [t.text for t in doc.tokens]}
            for doc in corpus.documents]


def _memberships(corpus: Corpus, mentions: dict[str, Mention],
                 clusters: dict) -> list[list]:
    rows: list[list] = [[None] * corpus.doc_len(d)
                        for d in range(len(corpus.documents))]
    for cluster in clusters.values():
        for mid in cluster.mentions:
            span = mentions[mid].span
            for i in range(span.start, span.end + 1):
                rows[span.doc][i] = cluster.cluster_id
    return rows


def _span_view(corpus: Corpus, span: MentionSpan) -> dict:
    return {"doc": span.doc, "start": span.start, "end": span.end,
            "text": corpus.text_of(span)}


class SessionService:
    """Registry + entry points: open, message dispatch, snapshot/restore,
    and gated export."""

    def __init__(self) -> None:
        self._sessions: dict[str, Session] = {}

    def open(self, config: dict) -> Session:
        session = Session(config)
        self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise ProtocolError("unknown session %r" % session_id) from None

    def handle(self, message: dict) -> dict:
        validate(message, "message")
        return self.get(message["session_id"]).handle(message)

    def snapshot(self, session_id: str) -> str:
        return self.get(session_id).snapshot()

    def restore(self, snapshot: dict | str) -> Session:
        """Rebuild a session by replaying its log through the normal
        dispatch path; any divergence from the recorded log is an error."""
        data = parse_json(snapshot) if isinstance(snapshot, str) else snapshot
        validate(data, "snapshot")
        session = Session(data["config"])
        if session.session_id != data["session_id"]:
            raise FormatError("snapshot id %r does not match its config"
                              % data["session_id"], path="/session_id")
        for entry in data["log"]:
            params = {k: v for k, v in entry.items()
                      if k not in ("op", "seq", "accepted")}
            response = session.handle({"session_id": session.session_id,
                                       "seq": entry["seq"], "op": entry["op"],
                                       "params": params})
            if not response["ok"]:
                raise ProtocolError("illegal action at seq %d: %s"
                                    % (entry["seq"], response["error"]["message"]))
        if session.log != data["log"]:
            raise ProtocolError("snapshot log does not replay to itself")
        self._sessions[session.session_id] = session
        return session

    def export(self, session_id: str, fmt: str = "conll") -> str:
        """Submission-gated output: CoNLL or state JSON for annotate and
        review sessions, outcome JSON for onboarding sessions."""
        session = self.get(session_id)
        if session.mode in ("tutorial", "guided"):
            if fmt != "json":
                raise ProtocolError("onboarding sessions export outcome JSON only")
            return canonical_json(session.engine.outcome())
        if session.mode == "review":
            state = session.engine.result()
        else:
            state = session.engine
        if fmt == "conll":
            return export_conll(state)
        if fmt == "json":
            state.require_complete()
            return dumps_state(state)
        raise ProtocolError("unknown export format %r" % fmt)
