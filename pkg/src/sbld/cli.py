"""Command-line entry point: ``sbld <command> [options]``.

Commands
--------
synth      generate a synthetic corpus with planted failure events
abstract   turn a raw corpus into a vocabulary and abstracted logs
build      build a spectrum database (coverage matrix CSV + vocabulary)
diagnose   rank and cluster the events of one failing log
evaluate   run the sweep, evidence variants, baseline and statistics
stats      recompute comparisons from a per_log_scores.csv file

Exit status: 0 success, 1 no admissible logs to evaluate, 2 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import kernels
from .abstraction import AbstractionConfig, EventVocabulary, Verdict, load_logs, save_logs
from .clustering import AGGREGATES
from .corpus import abstract_corpus, load_corpus
from .diagnosis import diagnose
from .errors import ConfigError, SBLDError, UsageError
from .evaluation import (
    Evidence,
    ExcludedLog,
    PerLogScore,
    chronological,
    compare_per_log,
    evidence_config,
    group_of,
    load_signatures,
    run_evaluation,
)
from .spectrum import CoverageMatrix, Measure, build_matrix
from .stats import comparisons_to_csv
from .synth import SynthParams, generate, seed_from_env

log = logging.getLogger("sbld")

VOCAB_FILE = "vocabulary.json"
LOGS_FILE = "logs.jsonl"
SPECTRUM_FILE = "spectrum.csv"

EXIT_OK, EXIT_NO_LOGS, EXIT_CONFIG = 0, 1, 2


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return n


def _k_value(value: str) -> int:
    if value.upper() == "ALL":
        return sys.maxsize
    return _positive_int(value)


def _load_config(path: str | None) -> AbstractionConfig:
    return AbstractionConfig.load(path) if path else AbstractionConfig()


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise ConfigError(f"{path} not found; {hint}")
    return path


def _abstracted(args) -> tuple[list, EventVocabulary]:
    """Abstracted logs from ``--abstracted DIR`` or by abstracting ``--corpus``."""
    if getattr(args, "abstracted", None):
        root = Path(args.abstracted)
        hint = "run 'sbld abstract' first"
        vocab = EventVocabulary.load(_require(root / VOCAB_FILE, hint))
        return load_logs(_require(root / LOGS_FILE, hint)), vocab
    if not getattr(args, "corpus", None):
        raise ConfigError("either --corpus or --abstracted is required")
    raws = load_corpus(args.corpus, args.manifest)
    return abstract_corpus(raws, _load_config(args.config), jobs=args.jobs)


def cmd_synth(args) -> int:
    params = SynthParams(**{f.name: getattr(args, f.name) for f in fields(SynthParams)
                            if getattr(args, f.name, None) is not None})
    seed = args.seed if args.seed is not None else seed_from_env()
    paths = generate(args.out, params, seed)
    print(f"wrote synthetic corpus to {args.out} (seed {seed}); signatures: {paths['signatures']}")
    return EXIT_OK


def cmd_abstract(args) -> int:
    config = _load_config(args.config)
    raws = load_corpus(args.corpus, args.manifest)
    vocab = EventVocabulary.load(args.vocab) if args.vocab else None
    logs, vocab = abstract_corpus(raws, config, vocab, jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    vocab.save(out / VOCAB_FILE)
    save_logs(logs, out / LOGS_FILE)
    print(f"abstracted {len(logs)} logs into {len(vocab)} distinct events -> {out}")
    return EXIT_OK


def cmd_build(args) -> int:
    logs, vocab = _abstracted(args)
    if args.test:
        logs = [lg for lg in logs if group_of(lg.source_id) == args.test]
        if not logs:
            raise ConfigError(f"no logs for test {args.test!r}")
    logs = chronological(logs)
    matrix = build_matrix([lg for lg in logs if lg.verdict is Verdict.FAIL],
                          [lg for lg in logs if lg.verdict is Verdict.PASS])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    matrix.save(out / SPECTRUM_FILE)
    vocab.save(out / VOCAB_FILE)
    print(f"spectrum: {matrix.n_failing} failing, {matrix.n_passing} passing logs, "
          f"{len(matrix.columns)} events -> {out}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    measures = Measure.parse_list(args.measure)
    if args.spectrum:
        root = Path(args.spectrum)
        hint = "rebuild it with 'sbld build' including the target log"
        matrix = CoverageMatrix.load(_require(root / SPECTRUM_FILE, hint))
        vocab = EventVocabulary.load(_require(root / VOCAB_FILE, hint))
    else:
        logs, vocab = _abstracted(args)
        by_id = {lg.source_id: lg for lg in logs}
        if args.target not in by_id:
            raise UsageError(f"target {args.target!r} not found among abstracted logs")
        target = by_id[args.target]
        peers = [lg for lg in logs if group_of(lg.source_id) == group_of(target.source_id)]
        failing = chronological(lg for lg in peers if lg.verdict is Verdict.FAIL)
        passing = chronological(lg for lg in peers if lg.verdict is Verdict.PASS)
        f, p = evidence_config(failing, passing, target, Evidence(args.variant))
        matrix = build_matrix(f, p)
    reports = [diagnose(args.target, matrix, m, args.k, aggregate=args.aggregate, vocab=vocab) for m in measures]
    for report in reports:
        sys.stdout.write(report.render())
        if len(reports) > 1:
            sys.stdout.write("\n")
    if args.out:
        payload = [r.to_dict() for r in reports]
        doc = payload[0] if len(payload) == 1 else payload
        Path(args.out).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    logs, vocab = _abstracted(args)
    signatures, assignment = load_signatures(args.signatures, args.signature_map)
    result = run_evaluation(
        logs, vocab, signatures, assignment,
        measures=Measure.parse_list(args.measure), k=args.k, aggregate=args.aggregate,
        jobs=args.jobs, run_sweep=not args.no_sweep,
    )
    paths = result.write(args.out)
    n_targets = sum(len(t.failing) for t in result.tests)
    print(f"evaluated {n_targets} failing logs in {len(result.tests)} tests "
          f"({len(result.sweep)} sweep records, {len(result.comparisons)} comparisons)")
    for name, path in paths.items():
        print(f"  {name}: {path}")
    return EXIT_OK


def cmd_stats(args) -> int:
    try:
        with open(args.per_log, newline="", encoding="utf-8") as fh:
            rows = [PerLogScore(r["test"], r["source_id"], r["variant"], r["metric"], float(r["value"]), r["note"])
                    for r in csv.DictReader(fh)]
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read {args.per_log}: {exc}") from exc
    text = comparisons_to_csv(compare_per_log(rows))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sbld", description="Spectrum-based diagnosis of failing CI logs.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--version", action="version", version=f"%(prog)s 0.1.0 (kernels: {kernels.BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input(p, corpus=True):
        if corpus:
            p.add_argument("--corpus", help="raw corpus root: <test>/{fail,pass}/*.log")
            p.add_argument("--config", help="abstraction config JSON (delimiter, masking_rules)")
            p.add_argument("--manifest", help="CSV source_id,verdict,produced_at (default: <corpus>/manifest.csv)")
        p.add_argument("--abstracted", help="directory written by 'sbld abstract'")
        p.add_argument("--jobs", type=_positive_int, default=1)

    def add_analysis(p):
        p.add_argument("--measure", default="ALL", help="measure name, comma-separated list, or ALL")
        p.add_argument("--k", type=_k_value, default=1, help="clusters to retrieve (integer or ALL)")
        p.add_argument("--aggregate", choices=AGGREGATES, default="mean")

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, help="random seed (default: $SBLD_SEED or 0)")
    for f in fields(SynthParams):
        p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, type=type(f.default))
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("abstract", help="abstract a raw corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config")
    p.add_argument("--manifest")
    p.add_argument("--vocab", help="existing vocabulary to extend")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.set_defaults(func=cmd_abstract)

    p = sub.add_parser("build", help="build a spectrum database")
    add_input(p)
    p.add_argument("--test", help="restrict to one test")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("diagnose", help="diagnose one failing log")
    add_input(p)
    p.add_argument("--spectrum", help="directory written by 'sbld build'")
    p.add_argument("--target", required=True, help="source ID of the failing log")
    p.add_argument("--variant", choices=[e.value for e in Evidence], default="maximal",
                   help="evidence used when building the spectrum on the fly")
    p.add_argument("--out", help="write the report(s) as JSON")
    add_analysis(p)
    p.set_defaults(func=cmd_diagnose, measure="Ochiai")

    p = sub.add_parser("evaluate", help="run the full evaluation")
    add_input(p)
    p.add_argument("--signatures", required=True)
    p.add_argument("--signature-map", help="JSON object test -> signature name")
    p.add_argument("--out", required=True)
    p.add_argument("--no-sweep", action="store_true", help="skip the chronological sweep")
    add_analysis(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="recompute comparisons from per-log scores")
    p.add_argument("--per-log", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ExcludedLog as exc:
        print(f"sbld: {exc}", file=sys.stderr)
        return EXIT_NO_LOGS
    except (SBLDError, OSError) as exc:
        print(f"sbld: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
