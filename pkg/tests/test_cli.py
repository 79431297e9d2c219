from __future__ import annotations

import json

from kycsim.cli import load_corpus, main


class TestGenerate:
    def test_writes_corpus_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "data"
        assert main(["generate", "--out", str(out), "--scale", "0.002", "--seed", "5"]) == 0
        corpus = load_corpus(out / "corpus.jsonl")
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["submissions"] == len(corpus) == 120
        assert manifest["class_counts"]["selfie_deepfake"] == 10

    def test_roundtrip_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        main(["generate", "--out", str(a), "--scale", "0.002", "--seed", "5"])
        main(["generate", "--out", str(b), "--scale", "0.002", "--seed", "5"])
        assert (a / "corpus.jsonl").read_bytes() == (b / "corpus.jsonl").read_bytes()


class TestRunAndReport:
    def test_table2_run_and_render(self, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        assert main(["run", "--experiment", "table2", "--seed", "11", "--out", str(report_path)]) == 0
        out = capsys.readouterr().out
        assert "temporal_artifact" in out
        assert report_path.exists()
        assert main(["report", str(report_path)]) == 0
        rendered = capsys.readouterr().out
        assert "recall%" in rendered


class TestAuditVerify:
    def test_intact_and_broken(self, tmp_path, capsys):
        from kycsim.audit import AuditLog, derive_salt

        log = AuditLog(mode="redacted", salt=derive_salt(1))
        for i in range(5):
            log.append("svc", f"step{i}", f"S{i}", {"i": i}, float(i))
        path = tmp_path / "audit.log"
        log.save(str(path))
        assert main(["audit-verify", "--log", str(path)]) == 0
        assert "ok" in capsys.readouterr().out

        lines = path.read_bytes().splitlines()
        lines[2] = lines[2].replace(b"step2", b"stepX")
        path.write_bytes(b"\n".join(lines) + b"\n")
        assert main(["audit-verify", "--log", str(path)]) == 1
        assert "seq 2" in capsys.readouterr().out
