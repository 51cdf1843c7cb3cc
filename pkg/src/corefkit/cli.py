"""Batch command line: convert, score, simulate-review, replay,
extract-mentions, validate.

Exit codes: 0 on success, 1 for operational failures (I/O), 2 for
validation failures (parse errors, mismatched inputs, gate refusals).
Diagnostics go to stderr; results go to stdout or ``--out``.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .annotation import AnnotationState
from .conll import export_conll, import_conll
from .corpus import Corpus, extract_mentions
from .errors import CorefError, FormatError
from .metrics import MetricReport, percent, score_partitions
from .onboarding import GuidedScript, validate_script
from .review import run_review
from .session import SessionService
from .stateio import canonical_json, dumps_state, loads_state, parse_json
from .stateio import validate as validate_schema

_SCHEMA_KINDS = ("corpus", "mentions", "state", "reviewer-script",
                 "tutorial", "guided", "session-config", "snapshot",
                 "action-log", "message")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except FormatError as exc:
        where = ""
        if exc.line is not None:
            where = "line %d: " % exc.line
        _err(args, "%s%s" % (where, exc))
        return 2
    except CorefError as exc:
        _err(args, str(exc))
        return 2
    except OSError as exc:
        _err(args, str(exc))
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corefkit",
        description="coreference annotation toolkit: batch entry points")
    parser.add_argument("--json", action="store_true",
                        help="emit machine-readable JSON instead of tables")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress human-oriented output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert between CoNLL and state JSON")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--from", dest="src_format", choices=("conll", "json"))
    p.add_argument("--to", dest="dst_format", choices=("conll", "json"))
    p.set_defaults(handler=cmd_convert)

    p = sub.add_parser("score", help="score a response against a key")
    p.add_argument("key")
    p.add_argument("response")
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("simulate-review",
                       help="run a scripted review over a complete annotation")
    p.add_argument("original", help="complete annotation state JSON")
    p.add_argument("script", help="reviewer decision script JSON")
    p.add_argument("--out", help="write the reviewed state JSON here")
    p.set_defaults(handler=cmd_simulate_review)

    p = sub.add_parser("replay", help="replay an action log over a task config")
    p.add_argument("config", help="session config JSON")
    p.add_argument("log", help="action log (one JSON object per line)")
    p.add_argument("--out", help="write the final snapshot here")
    p.add_argument("--verify", help="compare the snapshot against this file")
    p.set_defaults(handler=cmd_replay)

    p = sub.add_parser("extract-mentions",
                       help="derive single-token candidate mentions by POS")
    p.add_argument("corpus", help="corpus JSON with pos-tagged tokens")
    p.add_argument("--pos-set", default="",
                   help="comma-separated tags, e.g. NOUN,PROPN,PRON,VERB")
    p.add_argument("--out", help="write the mentions JSON here")
    p.set_defaults(handler=cmd_extract_mentions)

    p = sub.add_parser("validate", help="check a JSON file against its schema")
    p.add_argument("path")
    p.add_argument("--kind", required=True, choices=_SCHEMA_KINDS)
    p.set_defaults(handler=cmd_validate)

    return parser


def _err(args, message: str) -> None:
    print("corefkit: %s" % message, file=sys.stderr)


def _emit(args, text: str, out: str | None = None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n",
                             encoding="utf-8")
    else:
        print(text)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _guess_format(path: str, override: str | None) -> str:
    if override:
        return override
    if path.endswith(".conll"):
        return "conll"
    if path.endswith(".json"):
        return "json"
    raise FormatError("cannot tell conll from json for %r; pass --from/--to" % path)


def _load_state(path: str, fmt: str) -> AnnotationState:
    text = _read(path)
    if fmt == "conll":
        return import_conll(text)[1]
    return loads_state(text)


def cmd_convert(args) -> int:
    src = _guess_format(args.input, args.src_format)
    dst = _guess_format(args.output, args.dst_format)
    state = _load_state(args.input, src)
    if dst == "conll":
        payload = export_conll(state)     # refuses states with pending mentions
    else:
        payload = dumps_state(state)
    Path(args.output).write_text(payload if payload.endswith("\n")
                                 else payload + "\n", encoding="utf-8")
    if not args.quiet and not args.json:
        print("wrote %s" % args.output)
    return 0


def cmd_score(args) -> int:
    key = _load_state(args.key, _guess_format(args.key, None))
    response = _load_state(args.response, _guess_format(args.response, None))
    key.require_complete()
    response.require_complete()
    report = score_partitions(key.partition(), response.partition())
    if args.json:
        print(json.dumps(report.to_json(), indent=2))
    elif not args.quiet:
        print(_format_report(report))
    return 0


def _format_report(report: MetricReport) -> str:
    rows = [("metric", "P", "R", "F1")]
    for name, score in (("muc", report.muc), ("b3", report.b3),
                        ("ceafe", report.ceafe)):
        rows.append((name, percent(score.precision), percent(score.recall),
                     percent(score.f1)))
    rows.append(("conll", "", "", percent(report.conll_f1)))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    return "\n".join("  ".join(cell.ljust(widths[i]) if i == 0 else
                               cell.rjust(widths[i])
                               for i, cell in enumerate(row)).rstrip()
                     for row in rows)


def cmd_simulate_review(args) -> int:
    original = loads_state(_read(args.original))
    script = parse_json(_read(args.script), "reviewer-script")
    state, trace = run_review(original, script)
    reviewed = state.result()
    steps = [t.to_json() for t in trace]
    if args.json:
        print(json.dumps({"trace": steps,
                          "result": json.loads(dumps_state(reviewed))},
                         indent=2, ensure_ascii=False))
    elif not args.quiet:
        for i, step in enumerate(trace, start=1):
            if step.kind == "assign":
                labels = ", ".join(c["label"] for c in step.candidates or [])
                target = "new cluster" if step.decision["new"] else \
                    "cluster %r" % step.decision["label"]
                print("%d. %r  candidates: [%s]  -> %s"
                      % (i, step.text, labels, target))
            else:
                print("%d. %s %r -> %r" % (i, step.kind, step.presented, step.text))
    if args.out:
        _emit(args, dumps_state(reviewed), args.out)
    return 0


def cmd_replay(args) -> int:
    config = parse_json(_read(args.config), "session-config")
    entries = _read_log(args.log)
    service = SessionService()
    session = service.open(config)
    for entry in entries:
        params = {k: v for k, v in entry.items()
                  if k not in ("op", "seq", "accepted")}
        response = session.handle({"session_id": session.session_id,
                                   "seq": entry["seq"], "op": entry["op"],
                                   "params": params})
        if not response["ok"]:
            _err(args, "illegal action at seq %d: %s"
                 % (entry["seq"], response["error"]["message"]))
            return 2
    snap = session.snapshot()
    if args.out:
        _emit(args, snap, args.out)
    elif not args.quiet:
        print(snap)
    if args.verify:
        expected = _read(args.verify)
        if expected.rstrip("\n") != snap.rstrip("\n"):
            _err(args, "snapshot diverges from %s" % args.verify)
            return 2
        if not args.quiet:
            print("snapshot matches %s" % args.verify, file=sys.stderr)
    return 0


def _read_log(path: str) -> list[dict]:
    entries = []
    for lineno, line in enumerate(_read(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            entries.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise FormatError("bad log line: %s" % exc.msg, line=lineno) from None
    validate_schema(entries, "action-log")
    return entries


def cmd_extract_mentions(args) -> int:
    corpus = Corpus.from_json(parse_json(_read(args.corpus), "corpus"))
    tags = {t.strip() for t in args.pos_set.split(",") if t.strip()}
    mentions = extract_mentions(corpus, tags)
    payload = canonical_json([m.span.to_json() for m in mentions])
    _emit(args, payload, args.out)
    return 0


def cmd_validate(args) -> int:
    text = _read(args.path)
    if args.kind == "action-log":
        data = _read_log(args.path)
    else:
        data = parse_json(text, args.kind)
    problems: list[str] = []
    if args.kind == "guided":
        problems = validate_script(GuidedScript.from_json(data))
    if problems:
        for p in problems:
            _err(args, p)
        return 2
    if args.json:
        print(json.dumps({"ok": True, "kind": args.kind}))
    elif not args.quiet:
        print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
