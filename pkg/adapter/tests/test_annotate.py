import json
import shutil
import subprocess
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import pytest

from dep_annotate.annotate import AdapterConfig, annotate, verify_schema
from dep_annotate.backends import (BackendUnavailable, BuiltinBackend,
                                   CoreNLPBackend, coarse_pos, get_backend,
                                   ptb_to_upos)
from dep_annotate.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


def run_annotate(tmp_path, text, stage="external", backend=None):
    src = tmp_path / "in.txt"
    src.write_text(text)
    out = tmp_path / "out.depjson"
    cfg = AdapterConfig(input=src, output=out,
                        backend=backend or BuiltinBackend(), stage=stage)
    return annotate(cfg), out


class TestBuiltinBackend:
    def test_eat_apples(self):
        tokens = BuiltinBackend().parse("I eat apples.")
        by_surface = {t["surface"]: t for t in tokens}
        root = by_surface["eat"]
        assert root["head"] == 0 and root["rel"] == "root" and root["pos"] == "verb"
        obj = by_surface["apples"]
        assert obj["lemma"] == "apple"
        assert obj["rel"] == "obj"
        assert obj["head"] == root["i"]

    def test_prepositional_phrase_attaches_to_verb(self):
        tokens = BuiltinBackend().parse("I buy the apple at the store.")
        by_surface = {t["surface"]: t for t in tokens}
        assert by_surface["store"]["rel"] == "obl"
        assert by_surface["at"]["rel"] == "case"
        assert by_surface["at"]["head"] == by_surface["store"]["i"]

    def test_adverb_before_adjective(self):
        tokens = BuiltinBackend().parse("I enjoy the very sweet apple.")
        by_surface = {t["surface"]: t for t in tokens}
        assert by_surface["very"]["head"] == by_surface["sweet"]["i"]
        assert by_surface["sweet"]["rel"] == "amod"

    def test_non_first_person_fails(self):
        assert BuiltinBackend().parse("The apple is red.") is None

    def test_garbage_fails(self):
        assert BuiltinBackend().parse("\x00\x01 binary %% garbage 42") is None

    def test_trailing_punct_becomes_token(self):
        tokens = BuiltinBackend().parse("I sleep.")
        assert tokens[-1]["rel"] == "punct"
        assert tokens[-1]["pos"] == "other"


class TestPosMapping:
    def test_matches_shared_fixture(self):
        table = json.loads((FIXTURES / "pos_mapping.json").read_text())
        default = table.pop("default")
        for upos, coarse in table.items():
            assert coarse_pos(upos) == coarse
        assert coarse_pos("AUX") == default
        assert coarse_pos("X") == default

    def test_ptb_prefixes(self):
        assert ptb_to_upos("NNS") == "NOUN"
        assert ptb_to_upos("NNP") == "PROPN"
        assert ptb_to_upos("VBZ") == "VERB"
        assert ptb_to_upos("JJR") == "ADJ"
        assert ptb_to_upos("IN") == "ADP"
        assert ptb_to_upos(".") == "PUNCT"


class TestAnnotate:
    def test_golden_fixture_conformance(self, tmp_path):
        out = tmp_path / "out.depjson"
        cfg = AdapterConfig(input=FIXTURES / "raw_sentences.txt", output=out,
                            backend=BuiltinBackend(), stage="external")
        summary = annotate(cfg)
        assert summary.parsed == 20 and summary.failed == 0
        assert out.read_bytes() == (FIXTURES / "golden_parsed.depjson").read_bytes()

    def test_empty_input(self, tmp_path):
        summary, out = run_annotate(tmp_path, "")
        assert summary.parsed == 0 and summary.failed == 0
        assert out.read_text() == ""

    def test_garbage_line_skipped_and_counted(self, tmp_path):
        summary, out = run_annotate(
            tmp_path, "I eat the apple.\n\x00\xffnope 123\nI sleep.\n")
        assert summary.parsed == 2 and summary.failed == 1
        assert summary.failures[0][0] == 2
        assert len(out.read_text().splitlines()) == 2

    def test_stage_stamped(self, tmp_path):
        _, out = run_annotate(tmp_path, "I eat the apple.\n", stage="stage1")
        record = json.loads(out.read_text())
        assert record["stage"] == "stage1"
        assert record["id"] == "stage1-1"

    def test_output_order_is_input_order(self, tmp_path):
        _, out = run_annotate(tmp_path, "I slice the pear.\nI wash the plum.\n")
        lemmas = [json.loads(l)["tokens"][1]["lemma"]
                  for l in out.read_text().splitlines()]
        assert lemmas == ["slice", "wash"]

    def test_missing_input_raises(self, tmp_path):
        cfg = AdapterConfig(input=tmp_path / "nope.txt",
                            output=tmp_path / "out.depjson",
                            backend=BuiltinBackend())
        with pytest.raises(FileNotFoundError):
            annotate(cfg)


class TestVerifySchema:
    def test_golden_passes(self):
        report = verify_schema(FIXTURES / "golden_parsed.depjson")
        assert report.records == 20
        assert report.ok

    def test_empty_file_passes_with_zero_records(self, tmp_path):
        path = tmp_path / "e.depjson"
        path.write_text("")
        report = verify_schema(path)
        assert report.records == 0 and report.ok

    def test_head_out_of_range_named(self, tmp_path):
        path = tmp_path / "bad.depjson"
        path.write_text(json.dumps({"id": "x", "stage": "s", "tokens": [
            {"i": 1, "surface": "a", "lemma": "a", "pos": "noun",
             "head": 9, "rel": "root"}]}) + "\n")
        report = verify_schema(path)
        assert not report.ok
        assert report.violations[0].record == 1
        assert "out of range" in report.violations[0].message

    def test_two_roots_detected(self, tmp_path):
        path = tmp_path / "bad.depjson"
        path.write_text(json.dumps({"id": "x", "tokens": [
            {"i": 1, "surface": "a", "lemma": "a", "pos": "noun",
             "head": 0, "rel": "root"},
            {"i": 2, "surface": "b", "lemma": "b", "pos": "noun",
             "head": 0, "rel": "root"}]}) + "\n")
        report = verify_schema(path)
        assert any("one root" in v.message for v in report.violations)

    def test_cycle_detected(self, tmp_path):
        path = tmp_path / "bad.depjson"
        path.write_text(json.dumps({"id": "x", "tokens": [
            {"i": 1, "surface": "r", "lemma": "r", "pos": "verb",
             "head": 0, "rel": "root"},
            {"i": 2, "surface": "a", "lemma": "a", "pos": "noun",
             "head": 3, "rel": "dep"},
            {"i": 3, "surface": "b", "lemma": "b", "pos": "noun",
             "head": 2, "rel": "dep"}]}) + "\n")
        report = verify_schema(path)
        assert any("cycle" in v.message for v in report.violations)

    def test_uppercase_lemma_rejected(self, tmp_path):
        path = tmp_path / "bad.depjson"
        path.write_text(json.dumps({"id": "x", "tokens": [
            {"i": 1, "surface": "Run", "lemma": "Run", "pos": "verb",
             "head": 0, "rel": "root"}]}) + "\n")
        report = verify_schema(path)
        assert any("lowercase" in v.message for v in report.violations)


class TestCli:
    def test_annotate_and_verify(self, tmp_path, capsys):
        out = tmp_path / "out.depjson"
        code = main(["--in", str(FIXTURES / "raw_sentences.txt"),
                     "--out", str(out), "--stage", "external"])
        assert code == 0
        assert "annotated 20 sentences, 0 failed" in capsys.readouterr().out
        assert main(["--verify", str(out)]) == 0
        assert "0 violations" in capsys.readouterr().out

    def test_verify_failure_exit_1(self, tmp_path, capsys):
        path = tmp_path / "bad.depjson"
        path.write_text('{"id": "x", "tokens": []}\n')
        assert main(["--verify", str(path)]) == 1

    def test_missing_input_exit_1(self, tmp_path, capsys):
        code = main(["--in", str(tmp_path / "nope.txt"),
                     "--out", str(tmp_path / "out.depjson")])
        assert code == 1

    def test_usage_error_without_files(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_unknown_backend_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["--in", "x", "--out", "y", "--backend", "quantum"])
        assert exc.value.code == 2

    def test_corenlp_unconfigured_exit_1_with_hint(self, tmp_path, capsys,
                                                   monkeypatch):
        monkeypatch.delenv("CORENLP_URL", raising=False)
        src = tmp_path / "in.txt"
        src.write_text("I eat the apple.\n")
        code = main(["--in", str(src), "--out", str(tmp_path / "o.depjson"),
                     "--backend", "corenlp"])
        assert code == 1
        assert "CoreNLP" in capsys.readouterr().err


# --- CoreNLP backend against a miniature local server ---

CORENLP_RESPONSE = {
    "sentences": [{
        "tokens": [
            {"index": 1, "word": "I", "lemma": "I", "pos": "PRP"},
            {"index": 2, "word": "eat", "lemma": "eat", "pos": "VBP"},
            {"index": 3, "word": "apples", "lemma": "apple", "pos": "NNS"},
        ],
        "basicDependencies": [
            {"dep": "ROOT", "governor": 0, "dependent": 2},
            {"dep": "nsubj", "governor": 2, "dependent": 1},
            {"dep": "obj", "governor": 2, "dependent": 3},
        ],
    }]
}


class _FakeCoreNLP(BaseHTTPRequestHandler):
    def do_POST(self):
        self.rfile.read(int(self.headers.get("Content-Length", 0)))
        data = json.dumps(CORENLP_RESPONSE).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture()
def fake_corenlp():
    server = HTTPServer(("127.0.0.1", 0), _FakeCoreNLP)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestCoreNLPBackend:
    def test_parses_server_response(self, fake_corenlp):
        tokens = CoreNLPBackend(fake_corenlp).parse("I eat apples.")
        assert [t["lemma"] for t in tokens] == ["i", "eat", "apple"]
        assert [t["pos"] for t in tokens] == ["other", "verb", "noun"]
        assert tokens[1]["head"] == 0 and tokens[1]["rel"] == "root"
        assert tokens[2]["rel"] == "obj"

    def test_unreachable_server(self):
        backend = CoreNLPBackend("http://127.0.0.1:9", timeout=0.5)
        with pytest.raises(BackendUnavailable, match="not reachable"):
            backend.parse("I eat apples.")

    def test_unconfigured_url(self):
        with pytest.raises(BackendUnavailable, match="CoreNLP"):
            get_backend("corenlp", corenlp_url=None)


@pytest.mark.skipif(shutil.which("affordnet") is None,
                    reason="affordnet CLI not installed")
def test_golden_loads_through_graph_pipeline(tmp_path):
    """Cross-component contract: every emitted record ingests cleanly."""
    out = tmp_path / "ingested.depjson"
    result = subprocess.run(
        ["affordnet", "ingest", str(FIXTURES / "golden_parsed.depjson"),
         "--errors", "abort", "--out", str(out)],
        capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    assert "ingested 20 sentences (0 skipped)" in result.stdout
