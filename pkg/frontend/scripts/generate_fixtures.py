#!/usr/bin/env python3
"""Regenerate test/fixtures.json from the real session service.

The component tests replay recorded protocol traffic instead of faking
payload shapes by hand. Run from the frontend directory (needs the
corefkit package importable):

    npm run fixtures
"""
import json
import sys

from corefkit import AnnotationState, Corpus, Document, MentionSpan, Token
from corefkit.session import SessionService
from corefkit.stateio import export_state


def corpus_json(words):
    return {"documents": [{"id": "d0", "tokens": [{"text": w} for w in words]}]}


def record(config, steps):
    """Open a session and replay ``steps``; capture every exchange."""
    service = SessionService()
    session = service.open(config)
    scenario = {
        "config": config,
        "open": {
            "session_id": session.session_id,
            "view_delta": {"regions": sorted(
                ["documents", "memberships", "current", "bank",
                 "candidates", "status", "overlay"]),
                "view": session.view()},
        },
        "exchanges": [],
    }
    for seq, (op, params) in enumerate(steps, start=1):
        message = {"session_id": session.session_id, "seq": seq,
                   "op": op, "params": params}
        response = service.handle(message)
        scenario["exchanges"].append({"message": message, "response": response})
    for fmt in ("conll", "json"):
        try:
            scenario.setdefault("export", {})[fmt] = service.export(
                session.session_id, fmt)
        except Exception:
            pass
    return scenario


def annotate_scenario():
    config = {
        "mode": "annotate",
        "corpus": corpus_json(["The", "cat", "saw", "it"]),
        "mentions": [{"doc": 0, "start": 0, "end": 1},
                     {"doc": 0, "start": 3, "end": 3}],
    }
    return record(config, [
        ("select", {"cluster": "c0"}),
        ("fix", {"span": {"doc": 0, "start": 1, "end": 3}}),  # rejected
        ("assign", {"cluster": "c0"}),
    ])


def review_scenario():
    corpus = Corpus((Document("d0", tuple(
        Token(w) for w in ["Bank", "of", "America", "merged", "American",
                           "bank", "into", "BoA"])),))
    original = AnnotationState.from_clusters(
        corpus, [[MentionSpan(0, 0, 2), MentionSpan(0, 4, 5),
                  MentionSpan(0, 7, 7)]])
    config = {"mode": "review", "state": export_state(original)}
    return record(config, [
        ("review", {}),
        ("assign_new", {}),
        ("review", {"span": {"doc": 0, "start": 4, "end": 4}}),
        ("assign_new", {}),
        ("review", {}),
        ("select_candidate", {"index": 0}),
        ("review", {}),
        ("select_candidate", {"index": 0}),
    ])


def tutorial_scenario():
    config = {
        "mode": "tutorial",
        "task": {"corpus": corpus_json(["A", "saw", "A"]),
                 "mentions": [{"doc": 0, "start": 0, "end": 0},
                              {"doc": 0, "start": 2, "end": 2}]},
        "script": {"steps": [
            {"prompt": "Welcome.", "target": "none"},
            {"prompt": "Assign to the first cluster.",
             "target": "cluster_bank",
             "require": {"op": "assign", "cluster": "c0"}},
        ]},
    }
    return record(config, [
        ("assign", {"cluster": "c0"}),   # blocked by the welcome step
        ("ack", {}),
        ("assign", {"cluster": "c0"}),
    ])


def guided_scenario():
    config = {
        "mode": "guided",
        "task": {"corpus": corpus_json(["The", "dog", "saw", "it"]),
                 "mentions": [{"doc": 0, "start": 0, "end": 1},
                              {"doc": 0, "start": 3, "end": 3}]},
        "steps": [{"mention": 1, "expect": {"same_as": 0},
                   "on_wrong": "Try again.", "on_right": "Yes."}],
    }
    return record(config, [
        ("assign_new", {}),              # wrong decision
        ("assign", {"cluster": "c0"}),
    ])


def main():
    fixtures = {
        "annotate": annotate_scenario(),
        "review": review_scenario(),
        "tutorial": tutorial_scenario(),
        "guided": guided_scenario(),
    }
    json.dump(fixtures, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
