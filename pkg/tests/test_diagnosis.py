import json

import pytest

from sbld.diagnosis import diagnose, diagnose_many
from sbld.errors import UsageError
from sbld.evaluation import effort_reduction, recall_best
from sbld.spectrum import ALL_MEASURES, Measure, build_matrix


@pytest.fixture
def matrix(planted_corpus):
    return build_matrix(planted_corpus["failing"], planted_corpus["passing"])


def test_failed_only_isolates_planted_events(planted_corpus, matrix):
    report = diagnose("t/fail/a.log", matrix, Measure.FAILED_ONLY, 1, vocab=planted_corpus["vocab"])
    assert report.retrieved == planted_corpus["planted"]
    assert report.events_in_log == 5
    assert effort_reduction(report.events_retrieved, report.events_in_log) == pytest.approx(0.6)


@pytest.mark.parametrize("measure", ALL_MEASURES)
def test_every_measure_puts_planted_first(planted_corpus, matrix, measure):
    report = diagnose("t/fail/c.log", matrix, measure)
    assert planted_corpus["planted"] <= report.clusters[0].event_ids


def test_accepts_log_object(planted_corpus, matrix):
    target = planted_corpus["failing"][1]
    assert diagnose(target, matrix, Measure.OCHIAI).target == target.source_id


class TestErrors:
    def test_missing_target(self, matrix):
        with pytest.raises(UsageError, match="rebuild"):
            diagnose("t/fail/zzz.log", matrix, Measure.OCHIAI)

    def test_passing_target(self, matrix):
        with pytest.raises(UsageError):
            diagnose("t/pass/a.log", matrix, Measure.OCHIAI)

    def test_bad_k(self, matrix):
        with pytest.raises(UsageError):
            diagnose("t/fail/a.log", matrix, Measure.OCHIAI, 0)


class TestK:
    def test_k_all_gives_zero_effort_reduction(self, matrix):
        report = diagnose("t/fail/a.log", matrix, Measure.OCHIAI, 10**6)
        assert report.retrieved_k == len(report.clusters)
        assert report.events_retrieved == report.events_in_log
        assert effort_reduction(report.events_retrieved, report.events_in_log) == 0.0

    @pytest.mark.parametrize("measure", ALL_MEASURES)
    def test_monotone_in_k(self, planted_corpus, matrix, measure):
        for target in planted_corpus["failing"]:
            prev_r, prev_er = -1.0, 2.0
            for k in range(1, 6):
                rep = diagnose(target, matrix, measure, k)
                r = recall_best(rep.retrieved, planted_corpus["planted"])
                er = effort_reduction(rep.events_retrieved, rep.events_in_log)
                assert r >= prev_r and er <= prev_er
                prev_r, prev_er = r, er


class TestOutput:
    def test_json(self, planted_corpus, matrix):
        rep = diagnose("t/fail/a.log", matrix, Measure.FAILED_ONLY, vocab=planted_corpus["vocab"])
        doc = json.loads(rep.to_json())
        assert doc["measure"] == "FailedOnly"
        assert doc["clusters"][0]["retrieved"] is True
        texts = {e["text"] for e in doc["clusters"][0]["events"]}
        assert texts == {"ERROR: disk full on /var", "watchdog fired"}

    def test_render_marks_cutoff(self, planted_corpus, matrix):
        rep = diagnose("t/fail/a.log", matrix, Measure.FAILED_ONLY, vocab=planted_corpus["vocab"])
        text = rep.render()
        assert "---- not retrieved ----" in text
        assert text.index("watchdog fired") < text.index("---- not retrieved ----")

    def test_many(self, matrix):
        reps = diagnose_many("t/fail/b.log", matrix, [Measure.OP, Measure.WONG3])
        assert [r.measure for r in reps] == [Measure.OP, Measure.WONG3]
