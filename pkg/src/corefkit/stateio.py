"""JSON interchange: schema validation, canonical serialization, and
lossless annotation-state round-tripping (pending queue included, which
the CoNLL format cannot carry).
"""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema
from referencing import Registry, Resource
from referencing.jsonschema import DRAFT202012

from .annotation import AnnotationState
from .corpus import Cluster, Corpus, Mention, MentionSpan
from .errors import CorefError, FormatError


def canonical_json(data) -> str:
    """The one serialization used for hashing and byte-equality checks."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False)


@lru_cache(maxsize=1)
def _schema_store() -> tuple[Registry, dict[str, dict]]:
    schemas: dict[str, dict] = {}
    for entry in resources.files("corefkit.schemas").iterdir():
        if entry.name.endswith(".schema.json"):
            data = json.loads(entry.read_text(encoding="utf-8"))
            schemas[data["$id"]] = data
    registry = Registry().with_resources(
        (sid, Resource.from_contents(body, default_specification=DRAFT202012))
        for sid, body in schemas.items())
    return registry, schemas


def schema_ids() -> list[str]:
    return sorted(_schema_store()[1])


def validate(instance, schema: str) -> None:
    """Validate against a bundled schema (short name or full id); the
    first violation is reported with its JSON-pointer path."""
    registry, schemas = _schema_store()
    sid = schema if schema.startswith("corefkit:") else "corefkit:" + schema
    if sid not in schemas:
        raise KeyError("no schema %r (known: %s)" % (schema, ", ".join(schema_ids())))
    validator = jsonschema.Draft202012Validator(schemas[sid], registry=registry)
    errors = sorted(validator.iter_errors(instance),
                    key=lambda e: (len(list(e.absolute_path)), str(e.absolute_path)))
    if errors:
        err = errors[0]
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        raise FormatError("%s: %s" % (pointer, err.message), path=pointer)


def parse_json(text: str, schema: str | None = None):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError("invalid JSON: %s" % exc.msg, line=exc.lineno) from None
    if schema is not None:
        validate(data, schema)
    return data


# -- annotation state ------------------------------------------------------

def export_state(state: AnnotationState) -> dict:
    return {
        "corpus": state.corpus.to_json(),
        "mentions": {mid: m.span.to_json() for mid, m in state.mentions.items()},
        "pending": list(state.pending),
        "clusters": [{"id": c.cluster_id, "mentions": list(c.mentions)}
                     for c in state.clusters.values()],
        "selected": state.selected,
        "counters": {"mention": state.counters[0], "cluster": state.counters[1]},
    }


def import_state(data: dict) -> AnnotationState:
    validate(data, "state")
    corpus = Corpus.from_json(data["corpus"])
    mentions = {mid: Mention(mid, MentionSpan.from_json(sp))
                for mid, sp in data["mentions"].items()}
    clusters = [Cluster(c["id"], list(c["mentions"])) for c in data["clusters"]]
    known = set(mentions)
    for mid in data["pending"]:
        if mid not in known:
            raise FormatError("pending references unknown mention %r" % mid,
                              path="/pending")
    placed = list(data["pending"])
    for c in clusters:
        for mid in c.mentions:
            if mid not in known:
                raise FormatError("cluster %r references unknown mention %r"
                                  % (c.cluster_id, mid), path="/clusters")
            placed.append(mid)
    if sorted(placed) != sorted(known):
        raise FormatError("each mention must sit in the pending queue or in "
                          "exactly one cluster", path="/clusters")
    for mid, m in mentions.items():
        try:
            corpus.validate_span(m.span)
        except CorefError as exc:
            raise FormatError("mention %r: %s" % (mid, exc),
                              path="/mentions/%s" % mid) from None
    return AnnotationState.restore(
        corpus, mentions, list(data["pending"]), clusters, data["selected"],
        data["counters"]["mention"], data["counters"]["cluster"])


def dumps_state(state: AnnotationState) -> str:
    return canonical_json(export_state(state))


def loads_state(text: str) -> AnnotationState:
    return import_state(parse_json(text))
