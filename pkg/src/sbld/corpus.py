"""Reading log corpora laid out as ``<root>/<test>/{fail,pass}/*.log``."""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .abstraction import (
    AbstractedLog,
    AbstractionConfig,
    EventVocabulary,
    RawLog,
    Verdict,
    mask_blocks,
    parse_timestamp,
)
from .errors import ConfigError

MANIFEST_NAME = "manifest.csv"
_VERDICT_DIRS = {"fail": Verdict.FAIL, "pass": Verdict.PASS}


def read_manifest(path: str | Path) -> dict[str, tuple[Verdict, datetime]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = {"source_id", "verdict", "produced_at"} - set(reader.fieldnames or ())
            if missing:
                raise ConfigError(f"manifest {path} lacks columns: {', '.join(sorted(missing))}")
            return {
                row["source_id"]: (Verdict(row["verdict"].strip().upper()), parse_timestamp(row["produced_at"]))
                for row in reader
            }
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc


def discover(root: str | Path) -> list[tuple[str, Verdict, Path]]:
    root = Path(root)
    if not root.is_dir():
        raise ConfigError(f"corpus root {root} is not a directory")
    found = []
    for path in sorted(root.glob("*/*/*.log")):
        verdict = _VERDICT_DIRS.get(path.parent.name)
        if verdict is None:
            continue
        found.append((path.relative_to(root).as_posix(), verdict, path))
    return found


def load_corpus(root: str | Path, manifest: str | Path | None = None) -> list[RawLog]:
    """Load every log under ``root``; timestamps come from the manifest or mtime."""
    root = Path(root)
    if manifest is None and (root / MANIFEST_NAME).exists():
        manifest = root / MANIFEST_NAME
    meta = read_manifest(manifest) if manifest else {}
    logs = []
    for source_id, verdict, path in discover(root):
        try:
            text = path.read_text(encoding="utf-8", errors="replace")
            mtime = path.stat().st_mtime
        except OSError as exc:
            raise ConfigError(f"cannot read log {path}: {exc}") from exc
        if source_id in meta:
            m_verdict, produced_at = meta[source_id]
            if m_verdict is not verdict:
                raise ConfigError(f"{source_id}: manifest verdict {m_verdict.value} contradicts directory")
        else:
            produced_at = datetime.fromtimestamp(int(mtime), tz=timezone.utc)
        logs.append(RawLog(source_id, verdict, produced_at, text))
    return logs


def _mask_job(args) -> list[str]:
    text, config_doc = args
    return mask_blocks(text, AbstractionConfig.from_dict(config_doc))


def abstract_corpus(
    raws: Sequence[RawLog],
    config: AbstractionConfig,
    vocab: EventVocabulary | None = None,
    jobs: int = 1,
) -> tuple[list[AbstractedLog], EventVocabulary]:
    """Abstract logs, masking in parallel but interning in input order.

    Interning serially keeps event IDs independent of ``jobs``.
    """
    vocab = vocab if vocab is not None else EventVocabulary()
    if jobs > 1 and len(raws) > 1:
        doc = config.to_dict()
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            masked = list(pool.map(_mask_job, [(r.text, doc) for r in raws], chunksize=8))
    else:
        masked = [mask_blocks(r.text, config) for r in raws]
    out = [
        AbstractedLog(r.source_id, r.verdict, r.produced_at, tuple(vocab.intern(b) for b in blocks))
        for r, blocks in zip(raws, masked)
    ]
    return out, vocab
