from datetime import datetime, timedelta, timezone

import pytest

from sbld.abstraction import AbstractedLog, AbstractionConfig, EventVocabulary, Verdict
from sbld.corpus import abstract_corpus, load_corpus
from sbld.evaluation import load_signatures
from sbld.synth import SynthParams, generate

T0 = datetime(2019, 4, 5, tzinfo=timezone.utc)


def make_log(source_id, verdict, events, minutes=0):
    v = Verdict(verdict) if isinstance(verdict, str) else verdict
    return AbstractedLog(source_id, v, T0 + timedelta(minutes=minutes), tuple(events))


@pytest.fixture
def mklog():
    return make_log


@pytest.fixture(scope="session")
def synthetic_suite(tmp_path_factory):
    """The default synthetic suite: 5 tests x (10 failing, 20 passing), seed 0."""
    root = tmp_path_factory.mktemp("synthetic")
    corpus = root / "corpus"
    paths = generate(corpus, SynthParams(), seed=0)
    logs, vocab = abstract_corpus(load_corpus(corpus), AbstractionConfig())
    signatures, assignment = load_signatures(paths["signatures"])
    return {
        "root": root,
        "corpus": corpus,
        "paths": paths,
        "logs": logs,
        "vocab": vocab,
        "signatures": signatures,
        "assignment": assignment,
    }


@pytest.fixture
def planted_corpus():
    """3 failing / 3 passing logs; events 100 and 101 only ever occur in failing logs."""
    vocab = EventVocabulary()
    texts = {i: f"event {i}" for i in range(6)}
    texts[100] = "ERROR: disk full on /var"
    texts[101] = "watchdog fired"
    ids = {}
    for key in sorted(texts):
        ids[key] = vocab.intern(texts[key])
    fail = [
        make_log("t/fail/a.log", "FAIL", [ids[0], ids[1], ids[100], ids[101], ids[2]], 0),
        make_log("t/fail/b.log", "FAIL", [ids[0], ids[3], ids[100], ids[101]], 10),
        make_log("t/fail/c.log", "FAIL", [ids[0], ids[1], ids[4], ids[100], ids[101], ids[101]], 20),
    ]
    passing = [
        make_log("t/pass/a.log", "PASS", [ids[0], ids[1], ids[2]], 5),
        make_log("t/pass/b.log", "PASS", [ids[0], ids[3], ids[4]], 15),
        make_log("t/pass/c.log", "PASS", [ids[0], ids[5]], 25),
    ]
    return {"vocab": vocab, "failing": fail, "passing": passing, "planted": {ids[100], ids[101]}, "ids": ids}


# ---- acceptance reporting -------------------------------------------------

_ACCEPTANCE: dict[int, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" else "FAIL"
        _ACCEPTANCE[number] = (title, status, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status, duration = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] criterion {number:>2}: {title} ({duration:.2f}s)")
