import csv
import json

import pytest

from sbld.cli import main

FAIL_BODY = "2019-04-05 10:00:0{s}.1{s}2 CEST: call setup from 10.0.0.{s}\n" \
            "2019-04-05 10:00:1{s} UTC ERROR: disk full on /var\n  at writer.flush()\n" \
            "2019-04-05 10:00:2{s} watchdog fired\n"
PASS_BODY = "2019-04-05 11:00:0{s}.9 CEST: call setup from 10.0.0.{s}\n2019-04-05 11:00:1{s} teardown ok\n"


@pytest.fixture
def corpus(tmp_path):
    root = tmp_path / "corpus"
    rows = []
    for v, body in (("fail", FAIL_BODY), ("pass", PASS_BODY)):
        (root / "t1" / v).mkdir(parents=True)
        for s in range(3):
            (root / "t1" / v / f"{s}.log").write_text(body.format(s=s))
            rows.append((f"t1/{v}/{s}.log", v.upper(), f"2019-04-0{s + 1}T0{1 if v == 'fail' else 2}:00:00Z"))
    with open(root / "manifest.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["source_id", "verdict", "produced_at"])
        w.writerows(rows)
    sig = {"signatures": [{"name": "DISK", "sub_patterns": ["disk full", "watchdog"]}], "tests": {"t1": "DISK"}}
    (tmp_path / "sig.json").write_text(json.dumps(sig))
    return root


class TestAbstract:
    def test_records_and_determinism(self, corpus, tmp_path):
        outs = []
        for n in (1, 2):
            out = tmp_path / f"abs{n}"
            assert main(["abstract", "--corpus", str(corpus), "--out", str(out), "--jobs", str(n)]) == 0
            outs.append(out)
        lines = (outs[0] / "logs.jsonl").read_text().splitlines()
        assert len(lines) == 6
        for name in ("logs.jsonl", "vocabulary.json"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
        texts = {e["text"] for e in json.loads((outs[0] / "vocabulary.json").read_text())}
        assert "<TS>: call setup from <IP4>\n" in texts
        assert len(texts) == 4

    def test_corrupt_config_names_rule(self, corpus, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"masking_rules": [{"name": "evil", "pattern": "[", "replacement": "x"}]}))
        code = main(["abstract", "--corpus", str(corpus), "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert code == 2
        assert "evil" in capsys.readouterr().err

    def test_missing_corpus(self, tmp_path):
        assert main(["abstract", "--corpus", str(tmp_path / "nope"), "--out", str(tmp_path / "o")]) == 2


class TestDiagnose:
    def test_build_then_diagnose(self, corpus, tmp_path, capsys):
        spec = tmp_path / "spec"
        assert main(["build", "--corpus", str(corpus), "--out", str(spec)]) == 0
        out = tmp_path / "rep.json"
        code = main(["diagnose", "--spectrum", str(spec), "--target", "t1/fail/1.log",
                     "--measure", "FailedOnly", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        top = {e["text"] for e in doc["clusters"][0]["events"]}
        assert top == {"<TS> ERROR: disk full on /var\n  at writer.flush()\n", "<TS> watchdog fired\n"}
        assert "not retrieved" in capsys.readouterr().out

    def test_k_all(self, corpus, tmp_path):
        out = tmp_path / "rep.json"
        assert main(["diagnose", "--corpus", str(corpus), "--target", "t1/fail/0.log",
                     "--k", "ALL", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["events_retrieved"] == doc["events_in_log"]
        assert all(c["retrieved"] for c in doc["clusters"])

    def test_missing_spectrum(self, tmp_path, capsys):
        code = main(["diagnose", "--spectrum", str(tmp_path / "none"), "--target", "x"])
        assert code == 2
        assert "sbld build" in capsys.readouterr().err

    def test_target_not_in_spectrum(self, corpus, tmp_path, capsys):
        spec = tmp_path / "spec"
        main(["build", "--corpus", str(corpus), "--out", str(spec)])
        assert main(["diagnose", "--spectrum", str(spec), "--target", "t1/pass/0.log"]) == 2
        assert "rebuild" in capsys.readouterr().err

    def test_bad_k(self, corpus):
        with pytest.raises(SystemExit) as exc:
            main(["diagnose", "--corpus", str(corpus), "--target", "t1/fail/0.log", "--k", "0"])
        assert exc.value.code == 2


class TestEvaluate:
    def test_outputs(self, corpus, tmp_path):
        out = tmp_path / "ev"
        assert main(["evaluate", "--corpus", str(corpus), "--signatures", str(tmp_path / "sig.json"),
                     "--out", str(out)]) == 0
        compare = (out / "compare.csv").read_text().splitlines()
        assert len(compare) == 2 + 12
        assert len((out / "sweep.csv").read_text().splitlines()) == 1 + 4 * 6
        assert len((out / "heatmap.csv").read_text().splitlines()) == 1 + 3 * 4

    def test_unassigned_test_excluded(self, corpus, tmp_path, caplog):
        (tmp_path / "sig2.json").write_text(json.dumps(
            {"signatures": [{"name": "DISK", "sub_patterns": ["disk"]}], "tests": {"other": "DISK"}}))
        code = main(["evaluate", "--corpus", str(corpus), "--signatures", str(tmp_path / "sig2.json"),
                     "--out", str(tmp_path / "ev")])
        assert code == 1
        assert "no signature" in caplog.text

    def test_stats_recompute(self, corpus, tmp_path):
        out = tmp_path / "ev"
        main(["evaluate", "--corpus", str(corpus), "--signatures", str(tmp_path / "sig.json"),
              "--out", str(out), "--no-sweep"])
        assert main(["stats", "--per-log", str(out / "per_log_scores.csv"), "--out", str(tmp_path / "c.csv")]) == 0
        assert (tmp_path / "c.csv").read_bytes() == (out / "compare.csv").read_bytes()


def test_synth(tmp_path):
    out = tmp_path / "s"
    assert main(["synth", "--out", str(out), "--tests", "1", "--failing", "2", "--passing", "3", "--seed", "4"]) == 0
    assert len(list(out.glob("*/*/*.log"))) == 5
    assert json.loads((out / "signatures.json").read_text())["tests"] == {"test01": "SIG01"}
