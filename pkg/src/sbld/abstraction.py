"""Log abstraction: split raw logs into events and mask run-specific data.

A raw log is cut into blocks at every line that starts with the configured
delimiter (by default an ISO-like timestamp). Each block is then passed
through an ordered list of masking rules, and the resulting text is interned
in an :class:`EventVocabulary` so recurring events share one integer ID.
"""

from __future__ import annotations

import enum
import json
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError


class Verdict(str, enum.Enum):
    FAIL = "FAIL"
    PASS = "PASS"


@dataclass(frozen=True)
class RawLog:
    source_id: str
    verdict: Verdict
    produced_at: datetime
    text: str


@dataclass(frozen=True)
class MaskingRule:
    """Replace every match of ``pattern`` with the literal ``replacement``."""

    name: str
    pattern: str
    replacement: str
    regex: re.Pattern = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        try:
            compiled = re.compile(self.pattern)
        except re.error as exc:
            raise ConfigError(f"masking rule {self.name!r}: invalid pattern: {exc}") from exc
        object.__setattr__(self, "regex", compiled)

    def apply(self, text: str) -> str:
        repl = self.replacement
        return self.regex.sub(lambda _m: repl, text)


_TZ = r"(?:Z|UTC|GMT|CES?T|EES?T|WES?T|BST|IST|JST|[ECMP][SD]T)"

DEFAULT_DELIMITER = r"\d{4}-\d{2}-\d{2}[ T]\d{2}:\d{2}:\d{2}"

DEFAULT_RULES: tuple[tuple[str, str, str], ...] = (
    (
        "timestamp",
        r"\d{4}-\d{2}-\d{2}[ T]\d{2}:\d{2}:\d{2}(?:[.,]\d+)?(?:\s?" + _TZ + r"\b|[+-]\d{2}:?\d{2})?",
        "<TS>",
    ),
    (
        "uuid",
        r"\b[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}\b",
        "<UUID>",
    ),
    (
        "ipv6",
        r"(?<![\w:])(?:(?:[0-9A-Fa-f]{1,4}:){7}[0-9A-Fa-f]{1,4}"
        r"|[0-9A-Fa-f]{1,4}(?::[0-9A-Fa-f]{1,4}){0,6}::(?:[0-9A-Fa-f]{1,4}(?::[0-9A-Fa-f]{1,4}){0,6})?)(?![\w:])",
        "<IP6>",
    ),
    ("ipv4", r"\b(?:\d{1,3}\.){3}\d{1,3}\b", "<IP4>"),
    ("number", r"\b\d{6,}\b", "<NUM>"),
    ("hex", r"\b(?:0x)?[0-9a-fA-F]{8,}\b", "<HEX>"),
)


def default_rules() -> list[MaskingRule]:
    return [MaskingRule(*spec) for spec in DEFAULT_RULES]


def check_rules(rules: Sequence[MaskingRule]) -> None:
    """Reject rule sets whose placeholders could be re-matched by any rule.

    This is what makes :func:`mask` idempotent.
    """
    for rule in rules:
        for other in rules:
            if other.regex.search(rule.replacement):
                raise ConfigError(
                    f"masking rule {rule.name!r}: replacement {rule.replacement!r} "
                    f"is matched by rule {other.name!r}"
                )


def compile_delimiter(delimiter: str | re.Pattern) -> re.Pattern:
    if isinstance(delimiter, re.Pattern):
        return delimiter
    try:
        return re.compile(r"^(?:" + delimiter + r")", re.MULTILINE)
    except re.error as exc:
        raise ConfigError(f"invalid delimiter {delimiter!r}: {exc}") from exc


@dataclass(frozen=True)
class AbstractionConfig:
    delimiter: str = DEFAULT_DELIMITER
    masking_rules: tuple[MaskingRule, ...] = field(default_factory=lambda: tuple(default_rules()))

    def __post_init__(self) -> None:
        compile_delimiter(self.delimiter)
        check_rules(self.masking_rules)

    @property
    def delimiter_regex(self) -> re.Pattern:
        return compile_delimiter(self.delimiter)

    @classmethod
    def from_dict(cls, doc: dict) -> "AbstractionConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        delimiter = doc.get("delimiter", DEFAULT_DELIMITER)
        if not isinstance(delimiter, str):
            raise ConfigError("config 'delimiter' must be a string")
        if "masking_rules" not in doc:
            return cls(delimiter=delimiter)
        rules = []
        for i, entry in enumerate(doc["masking_rules"]):
            if not isinstance(entry, dict):
                raise ConfigError(f"masking rule #{i}: expected an object")
            name = entry.get("name", f"#{i}")
            missing = [k for k in ("pattern", "replacement") if not isinstance(entry.get(k), str)]
            if missing:
                raise ConfigError(f"masking rule {name!r}: missing or non-string {', '.join(missing)}")
            rules.append(MaskingRule(str(name), entry["pattern"], entry["replacement"]))
        return cls(delimiter=delimiter, masking_rules=tuple(rules))

    @classmethod
    def load(cls, path: str | Path) -> "AbstractionConfig":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return {
            "delimiter": self.delimiter,
            "masking_rules": [
                {"name": r.name, "pattern": r.pattern, "replacement": r.replacement}
                for r in self.masking_rules
            ],
        }


def delineate(text: str, delimiter: str | re.Pattern) -> list[str]:
    """Split ``text`` into event blocks, each starting at a delimiter match.

    Text before the first match is returned as a leading preamble block, so
    ``"".join(delineate(text, d)) == text`` always holds.
    """
    if not text:
        return []
    regex = compile_delimiter(delimiter)
    starts = [m.start() for m in regex.finditer(text)]
    if not starts or starts[0] != 0:
        starts.insert(0, 0)
    bounds = starts + [len(text)]
    return [text[a:b] for a, b in zip(bounds, bounds[1:]) if b > a]


def mask(block: str, rules: Iterable[MaskingRule]) -> str:
    for rule in rules:
        block = rule.apply(block)
    return block


class EventVocabulary:
    """Bidirectional map between dense integer event IDs and event texts.

    ``intern`` is an atomic get-or-insert, so concurrent callers behave as if
    serialized.
    """

    def __init__(self, texts: Iterable[str] = ()) -> None:
        self._texts: list[str] = []
        self._ids: dict[str, int] = {}
        self._lock = threading.Lock()
        for text in texts:
            if text in self._ids:
                raise ValueError(f"duplicate vocabulary text: {text!r}")
            self.intern(text)

    def intern(self, text: str) -> int:
        with self._lock:
            event_id = self._ids.get(text)
            if event_id is None:
                event_id = len(self._texts)
                self._texts.append(text)
                self._ids[text] = event_id
            return event_id

    def text(self, event_id: int) -> str:
        return self._texts[event_id]

    def id_of(self, text: str) -> int | None:
        return self._ids.get(text)

    def __len__(self) -> int:
        return len(self._texts)

    def __contains__(self, event_id: object) -> bool:
        return isinstance(event_id, int) and 0 <= event_id < len(self._texts)

    def items(self) -> list[tuple[int, str]]:
        return list(enumerate(self._texts))

    def texts(self) -> set[str]:
        return set(self._texts)

    def to_json(self) -> str:
        return json.dumps([{"id": i, "text": t} for i, t in enumerate(self._texts)], ensure_ascii=False, indent=1)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, payload: str) -> "EventVocabulary":
        entries = json.loads(payload)
        entries = sorted(entries, key=lambda e: e["id"])
        if [e["id"] for e in entries] != list(range(len(entries))):
            raise ConfigError("vocabulary IDs must be dense and start at 0")
        return cls(e["text"] for e in entries)

    @classmethod
    def load(cls, path: str | Path) -> "EventVocabulary":
        try:
            return cls.from_json(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot read vocabulary {path}: {exc}") from exc


@dataclass(frozen=True)
class AbstractedLog:
    source_id: str
    verdict: Verdict
    produced_at: datetime
    events: tuple[int, ...]

    @property
    def event_count(self) -> int:
        return len(self.events)

    @property
    def distinct_events(self) -> frozenset[int]:
        return frozenset(self.events)

    def to_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "verdict": self.verdict.value,
            "produced_at": format_timestamp(self.produced_at),
            "events": list(self.events),
            "event_count": self.event_count,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AbstractedLog":
        events = tuple(int(e) for e in doc["events"])
        if "event_count" in doc and doc["event_count"] != len(events):
            raise ConfigError(f"{doc['source_id']}: event_count does not match events")
        return cls(doc["source_id"], Verdict(doc["verdict"]), parse_timestamp(doc["produced_at"]), events)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(value: str) -> datetime:
    value = value.strip()
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(value)
    except ValueError as exc:
        raise ConfigError(f"bad timestamp {value!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def mask_blocks(text: str, config: AbstractionConfig) -> list[str]:
    return [mask(block, config.masking_rules) for block in delineate(text, config.delimiter_regex)]


def abstract_log(
    raw: RawLog,
    delimiter: str | re.Pattern,
    rules: Sequence[MaskingRule],
    vocab: EventVocabulary,
) -> AbstractedLog:
    blocks = delineate(raw.text, delimiter)
    events = tuple(vocab.intern(mask(block, rules)) for block in blocks)
    return AbstractedLog(raw.source_id, raw.verdict, raw.produced_at, events)


def save_logs(logs: Iterable[AbstractedLog], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for log in logs:
            fh.write(json.dumps(log.to_dict(), ensure_ascii=False) + "\n")


def load_logs(path: str | Path) -> list[AbstractedLog]:
    try:
        with open(path, encoding="utf-8") as fh:
            return [AbstractedLog.from_dict(json.loads(line)) for line in fh if line.strip()]
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read abstracted logs {path}: {exc}") from exc
