"""Command line entry points: exit codes, formats, and file handling."""
import json

import pytest

from corefkit import (AnnotationState, Corpus, Document, MentionSpan, Token,
                      dumps_state, export_conll)
from corefkit.cli import main


def corpus_of(*docs):
    return Corpus(tuple(Document("d%d" % i, tuple(Token(w) for w in words))
                        for i, words in enumerate(docs)))


def cat_state():
    corpus = corpus_of(["The", "cat", "slept", "It", "purred"])
    return AnnotationState.from_clusters(
        corpus, [[MentionSpan(0, 0, 1), MentionSpan(0, 3, 3)],
                 [MentionSpan(0, 4, 4)]])


@pytest.fixture()
def state_json(tmp_path):
    path = tmp_path / "state.json"
    path.write_text(dumps_state(cat_state()), encoding="utf-8")
    return path


@pytest.fixture()
def conll_file(tmp_path):
    path = tmp_path / "state.conll"
    path.write_text(export_conll(cat_state()), encoding="utf-8")
    return path


class TestConvert:
    def test_json_to_conll_and_back(self, tmp_path, state_json, capsys):
        out = tmp_path / "out.conll"
        assert main(["convert", str(state_json), str(out)]) == 0
        assert out.read_text() == export_conll(cat_state())
        assert "wrote" in capsys.readouterr().out

        back = tmp_path / "back.json"
        assert main(["convert", str(out), str(back)]) == 0
        reparsed = json.loads(back.read_text())
        assert reparsed["pending"] == []

    def test_explicit_formats_beat_extensions(self, tmp_path, state_json):
        odd = tmp_path / "data.txt"
        odd.write_text(state_json.read_text(), encoding="utf-8")
        out = tmp_path / "out.txt"
        assert main(["convert", str(odd), str(out),
                     "--from", "json", "--to", "conll"]) == 0
        assert out.read_text() == export_conll(cat_state())

    def test_unknown_extension_is_a_validation_error(self, tmp_path, capsys):
        src = tmp_path / "x.dat"
        src.write_text("{}", encoding="utf-8")
        assert main(["convert", str(src), str(tmp_path / "y.json")]) == 2
        assert "--from/--to" in capsys.readouterr().err

    def test_incomplete_state_refused(self, tmp_path, capsys):
        corpus = corpus_of(["a", "b"])
        state = AnnotationState.create(corpus, [MentionSpan(0, 0, 0),
                                                MentionSpan(0, 1, 1)])
        src = tmp_path / "pending.json"
        src.write_text(dumps_state(state), encoding="utf-8")
        assert main(["convert", str(src), str(tmp_path / "out.conll")]) == 2
        assert "pending" in capsys.readouterr().err

    def test_missing_file_is_operational(self, tmp_path, capsys):
        assert main(["convert", str(tmp_path / "absent.json"),
                     str(tmp_path / "out.conll")]) == 1

    def test_parse_error_carries_line_number(self, tmp_path, capsys):
        bad = tmp_path / "bad.conll"
        bad.write_text("#begin document (d); part 000\nd\t0\t1\ta\t-\n",
                       encoding="utf-8")
        assert main(["convert", str(bad), str(tmp_path / "out.json")]) == 2
        assert "line 2:" in capsys.readouterr().err


class TestScore:
    def test_table_output(self, tmp_path, state_json, conll_file, capsys):
        assert main(["score", str(state_json), str(conll_file)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].split() == ["metric", "P", "R", "F1"]
        assert lines[1].split() == ["muc", "100.0", "100.0", "100.0"]
        assert lines[4].split() == ["conll", "100.0"]

    def test_json_output(self, tmp_path, state_json, capsys):
        assert main(["--json", "score", str(state_json), str(state_json)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["conll_f1"] == 1.0

    def test_mismatched_mentions_exit_2(self, tmp_path, state_json, capsys):
        other = corpus_of(["The", "cat", "slept", "It", "purred"])
        response = AnnotationState.from_clusters(
            other, [[MentionSpan(0, 0, 1)], [MentionSpan(0, 4, 4)]])
        path = tmp_path / "response.json"
        path.write_text(dumps_state(response), encoding="utf-8")
        assert main(["score", str(state_json), str(path)]) == 2
        assert "mention" in capsys.readouterr().err


class TestSimulateReview:
    @pytest.fixture()
    def inputs(self, tmp_path):
        corpus = corpus_of(["Bank", "of", "America", "merged", "American",
                            "bank", "into", "BoA"])
        original = AnnotationState.from_clusters(
            corpus, [[MentionSpan(0, 0, 2), MentionSpan(0, 4, 5),
                      MentionSpan(0, 7, 7)]])
        original_path = tmp_path / "original.json"
        original_path.write_text(dumps_state(original), encoding="utf-8")
        script_path = tmp_path / "script.json"
        script_path.write_text(json.dumps([
            {"span": "accept", "cluster": "new"},
            {"span": {"doc": 0, "start": 4, "end": 4}, "cluster": "new"},
            {"span": "accept", "cluster": {"candidate_index": 0}},
            {"span": "accept", "cluster": {"candidate_index": 0}},
        ]), encoding="utf-8")
        return original_path, script_path

    def test_human_trace(self, inputs, capsys):
        original, script = inputs
        assert main(["simulate-review", str(original), str(script)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 5
        assert lines[0] == "1. 'Bank of America'  candidates: []  -> new cluster"
        assert lines[1] == "2. split 'American bank' -> 'American'"
        assert lines[2] == "3. 'American'  candidates: [Bank of America]  -> new cluster"
        assert lines[3].startswith("4. 'bank'  candidates: [Bank of America, American]")
        assert lines[3].endswith("-> cluster 'Bank of America'")
        assert lines[4].startswith("5. 'BoA'")

    def test_json_trace_and_result_file(self, inputs, tmp_path, capsys):
        original, script = inputs
        out = tmp_path / "reviewed.json"
        assert main(["--json", "simulate-review", str(original), str(script),
                     "--out", str(out)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert [s["kind"] for s in payload["trace"]] == \
            ["assign", "split", "assign", "assign", "assign"]
        reviewed = json.loads(out.read_text())
        assert payload["result"] == reviewed
        assert len(reviewed["clusters"]) == 2

    def test_script_errors_exit_2(self, inputs, tmp_path, capsys):
        original, _ = inputs
        short = tmp_path / "short.json"
        short.write_text(json.dumps([{"span": "accept", "cluster": "new"}]),
                         encoding="utf-8")
        assert main(["simulate-review", str(original), str(short)]) == 2


class TestReplay:
    @pytest.fixture()
    def config_path(self, tmp_path):
        config = {
            "mode": "annotate",
            "corpus": {"documents": [{"id": "d0", "tokens": [
                {"text": "The"}, {"text": "cat"}, {"text": "saw"},
                {"text": "it"}]}]},
            "mentions": [{"doc": 0, "start": 0, "end": 1},
                         {"doc": 0, "start": 3, "end": 3}],
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config), encoding="utf-8")
        return path

    def write_log(self, tmp_path, entries):
        path = tmp_path / "log.jsonl"
        path.write_text("".join(json.dumps(e) + "\n" for e in entries),
                        encoding="utf-8")
        return path

    def test_replay_prints_snapshot(self, config_path, tmp_path, capsys):
        log = self.write_log(tmp_path, [
            {"op": "assign", "cluster": "c0", "seq": 1}])
        assert main(["replay", str(config_path), str(log)]) == 0
        snap = json.loads(capsys.readouterr().out)
        assert snap["log"] == [{"op": "assign", "cluster": "c0", "seq": 1}]

    def test_replay_verify_and_out(self, config_path, tmp_path, capsys):
        log = self.write_log(tmp_path, [
            {"op": "assign", "cluster": "c0", "seq": 1}])
        out = tmp_path / "snap.json"
        assert main(["replay", str(config_path), str(log),
                     "--out", str(out)]) == 0
        assert main(["replay", str(config_path), str(log),
                     "--verify", str(out)]) == 0
        assert main(["--quiet", "replay", str(config_path), str(log),
                     "--verify", str(config_path)]) == 2

    def test_replay_rejects_illegal_action(self, config_path, tmp_path, capsys):
        log = self.write_log(tmp_path, [
            {"op": "assign", "cluster": "zzz", "seq": 1}])
        assert main(["replay", str(config_path), str(log)]) == 2
        assert "illegal action at seq 1" in capsys.readouterr().err


class TestExtractMentions:
    def test_pos_filter(self, tmp_path, capsys):
        corpus = {"documents": [{"id": "d0", "tokens": [
            {"text": "The", "pos": "DET"}, {"text": "cat", "pos": "NOUN"},
            {"text": "slept", "pos": "VERB"}]}]}
        path = tmp_path / "corpus.json"
        path.write_text(json.dumps(corpus), encoding="utf-8")
        assert main(["extract-mentions", str(path),
                     "--pos-set", "NOUN,PROPN"]) == 0
        spans = json.loads(capsys.readouterr().out)
        assert spans == [{"doc": 0, "start": 1, "end": 1}]


class TestValidate:
    def test_ok(self, tmp_path, capsys):
        path = tmp_path / "corpus.json"
        path.write_text(json.dumps(
            {"documents": [{"id": "d", "tokens": [{"text": "a"}]}]}),
            encoding="utf-8")
        assert main(["validate", str(path), "--kind", "corpus"]) == 0
        assert capsys.readouterr().out.strip() == "ok"

    def test_schema_violation(self, tmp_path, capsys):
        path = tmp_path / "corpus.json"
        path.write_text(json.dumps({"documents": [{"id": "d"}]}),
                        encoding="utf-8")
        assert main(["validate", str(path), "--kind", "corpus"]) == 2

    def test_guided_gate_lists_problems(self, tmp_path, capsys):
        script = {
            "task": {"corpus": {"documents": [{"id": "d", "tokens": [
                        {"text": "a"}, {"text": "b"}, {"text": "c"}]}]},
                     "mentions": [{"doc": 0, "start": 0, "end": 0},
                                  {"doc": 0, "start": 1, "end": 1},
                                  {"doc": 0, "start": 2, "end": 2}]},
            "steps": [{"mention": 1, "expect": {"same_as": 2},
                       "on_wrong": "no"},
                      {"mention": 2, "expect": {"same_as": 1},
                       "on_wrong": "no"}],
        }
        path = tmp_path / "guided.json"
        path.write_text(json.dumps(script), encoding="utf-8")
        assert main(["validate", str(path), "--kind", "guided"]) == 2
        assert "forward reference" in capsys.readouterr().err

    def test_action_log_is_jsonl(self, tmp_path, capsys):
        path = tmp_path / "log.jsonl"
        path.write_text('{"op": "assign", "cluster": "c0", "seq": 1}\n'
                        '{"op": "select", "cluster": null, "seq": 2}\n',
                        encoding="utf-8")
        assert main(["validate", str(path), "--kind", "action-log"]) == 0

    def test_action_log_bad_line_number(self, tmp_path, capsys):
        path = tmp_path / "log.jsonl"
        path.write_text('{"op": "assign", "seq": 1}\nnot json\n',
                        encoding="utf-8")
        assert main(["validate", str(path), "--kind", "action-log"]) == 2
        assert "line 2:" in capsys.readouterr().err
