"""Coverage matrix, spectrum primitives and the ten interestingness measures."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .abstraction import AbstractedLog, Verdict
from .errors import ConfigError, UsageError

INF = math.inf


class Measure(str, enum.Enum):
    TARANTULA = "Tarantula"
    JACCARD = "Jaccard"
    OCHIAI = "Ochiai"
    OCHIAI2 = "Ochiai2"
    ZOLTAR = "Zoltar"
    DSTAR2 = "DStar2"
    OP = "Op"
    WONG3 = "Wong3"
    KULCZYNSKI2 = "Kulczynski2"
    FAILED_ONLY = "FailedOnly"

    @classmethod
    def parse(cls, name: str) -> "Measure":
        for m in cls:
            if m.value.lower() == name.strip().lower() or m.name.lower() == name.strip().lower():
                return m
        raise ConfigError(f"unknown measure {name!r}; expected one of {', '.join(m.value for m in cls)}")

    @classmethod
    def parse_list(cls, spec: str | Sequence[str] | None) -> list["Measure"]:
        """Parse ``"ALL"``, a comma-separated string, or a list of names."""
        if spec is None:
            return list(cls)
        if isinstance(spec, str):
            spec = [s for s in spec.split(",") if s.strip()]
        if any(s.strip().upper() == "ALL" for s in spec):
            return list(cls)
        measures = [cls.parse(s) for s in spec]
        if not measures:
            raise ConfigError("no measure selected")
        return list(dict.fromkeys(measures))


ALL_MEASURES: tuple[Measure, ...] = tuple(Measure)


@dataclass(frozen=True)
class SpectrumPrimitives:
    """The four counts for one event.

    ``n_fi``/``n_fe``: failing logs that include/exclude the event;
    ``n_pi``/``n_pe``: passing logs that include/exclude it.
    """

    n_fi: int
    n_fe: int
    n_pi: int
    n_pe: int

    def __post_init__(self) -> None:
        if min(self.n_fi, self.n_fe, self.n_pi, self.n_pe) < 0:
            raise UsageError(f"negative spectrum count in {self}")

    # SBFL literature aliases
    cef = aef = property(lambda self: self.n_fi)
    cnf = anf = property(lambda self: self.n_fe)
    cep = aep = property(lambda self: self.n_pi)
    cnp = anp = property(lambda self: self.n_pe)

    @property
    def total_failing(self) -> int:
        return self.n_fi + self.n_fe

    @property
    def total_passing(self) -> int:
        return self.n_pi + self.n_pe


class _Unbounded(Exception):
    pass


def _div(x: float, y: float) -> float:
    if y == 0:
        if x == 0:
            return 0.0
        raise _Unbounded
    return x / y


def _wong3_h(ep: float) -> float:
    if ep <= 2:
        return ep
    if ep <= 10:
        return 2 + 0.1 * (ep - 2)
    return 2.8 + 0.001 * (ep - 10)


def score(p: SpectrumPrimitives, m: Measure) -> float:
    """Interestingness of one event; higher is more interesting.

    Degenerate fractions follow one rule: 0/0 is 0, and x/0 with x > 0 makes
    the whole measure +inf. Zoltar scores 0 whenever ``n_fi`` is 0.
    """
    ef, nf, ep, np_ = float(p.n_fi), float(p.n_fe), float(p.n_pi), float(p.n_pe)
    try:
        if m is Measure.TARANTULA:
            fail = _div(ef, ef + nf)
            pas = _div(ep, ep + np_)
            return _div(fail, fail + pas)
        if m is Measure.JACCARD:
            return _div(ef, ef + nf + ep)
        if m is Measure.OCHIAI:
            return _div(ef, math.sqrt((ef + nf) * (ef + ep)))
        if m is Measure.OCHIAI2:
            return _div(ef * np_, math.sqrt((ef + ep) * (nf + np_) * (ef + nf) * (ep + np_)))
        if m is Measure.ZOLTAR:
            if ef == 0:
                return 0.0
            return ef / (ef + nf + ep + 10000.0 * nf * ep / ef)
        if m is Measure.DSTAR2:
            return _div(ef * ef, nf + ep)
        if m is Measure.OP:
            return ef - ep / (ep + np_ + 1.0)
        if m is Measure.WONG3:
            return ef - _wong3_h(ep)
        if m is Measure.KULCZYNSKI2:
            return 0.5 * (_div(ef, ef + nf) + _div(ef, ef + ep))
        if m is Measure.FAILED_ONLY:
            return 1.0 if p.n_pi == 0 else 0.0
    except _Unbounded:
        return INF
    raise ValueError(f"unknown measure {m!r}")


def _vdiv(x: np.ndarray, y: np.ndarray, unbounded: np.ndarray) -> np.ndarray:
    zero = y == 0
    unbounded |= zero & (x != 0)
    return np.divide(x, y, out=np.zeros_like(x), where=~zero)


def score_arrays(n_fi, n_fe, n_pi, n_pe, m: Measure) -> np.ndarray:
    """Vectorized :func:`score` over parallel count arrays (bit-identical)."""
    ef = np.asarray(n_fi, dtype=np.float64)
    nf = np.asarray(n_fe, dtype=np.float64)
    ep = np.asarray(n_pi, dtype=np.float64)
    np_ = np.asarray(n_pe, dtype=np.float64)
    unb = np.zeros(ef.shape, dtype=bool)
    if m is Measure.TARANTULA:
        fail = _vdiv(ef, ef + nf, unb)
        pas = _vdiv(ep, ep + np_, unb)
        out = _vdiv(fail, fail + pas, unb)
    elif m is Measure.JACCARD:
        out = _vdiv(ef, ef + nf + ep, unb)
    elif m is Measure.OCHIAI:
        out = _vdiv(ef, np.sqrt((ef + nf) * (ef + ep)), unb)
    elif m is Measure.OCHIAI2:
        out = _vdiv(ef * np_, np.sqrt((ef + ep) * (nf + np_) * (ef + nf) * (ep + np_)), unb)
    elif m is Measure.ZOLTAR:
        safe = np.where(ef == 0, 1.0, ef)
        denom = ef + nf + ep + 10000.0 * nf * ep / safe
        out = np.divide(ef, denom, out=np.zeros_like(ef), where=ef != 0)
    elif m is Measure.DSTAR2:
        out = _vdiv(ef * ef, nf + ep, unb)
    elif m is Measure.OP:
        out = ef - ep / (ep + np_ + 1.0)
    elif m is Measure.WONG3:
        h = np.where(ep <= 2, ep, np.where(ep <= 10, 2 + 0.1 * (ep - 2), 2.8 + 0.001 * (ep - 10)))
        out = ef - h
    elif m is Measure.KULCZYNSKI2:
        out = 0.5 * (_vdiv(ef, ef + nf, unb) + _vdiv(ef, ef + ep, unb))
    elif m is Measure.FAILED_ONLY:
        out = np.where(ep == 0, 1.0, 0.0)
    else:
        raise ValueError(f"unknown measure {m!r}")
    out = np.array(out, dtype=np.float64)
    out[unb] = INF
    return out


class CoverageMatrix:
    """Binary logs x events occurrence matrix.

    Rows keep the order in which logs were supplied; columns are event IDs in
    ascending order. Immutable after construction.
    """

    def __init__(self, rows: Sequence[tuple[str, Verdict]], columns: Sequence[int], cells: np.ndarray) -> None:
        self.rows: tuple[tuple[str, Verdict], ...] = tuple((sid, Verdict(v)) for sid, v in rows)
        self.columns: tuple[int, ...] = tuple(int(c) for c in columns)
        cells = np.asarray(cells, dtype=bool).reshape(len(self.rows), len(self.columns))
        cells.setflags(write=False)
        self.cells = cells
        self._row_index: dict[str, int] = {}
        for i, (sid, _) in enumerate(self.rows):
            if sid in self._row_index:
                raise UsageError(f"duplicate log {sid!r} in coverage matrix")
            self._row_index[sid] = i
        self._col_index = {e: j for j, e in enumerate(self.columns)}
        failing = np.array([v is Verdict.FAIL for _, v in self.rows], dtype=bool)
        self.n_failing = int(failing.sum())
        self.n_passing = len(self.rows) - self.n_failing
        self.n_fi = cells[failing].sum(axis=0).astype(np.int64)
        self.n_pi = cells[~failing].sum(axis=0).astype(np.int64)
        for arr in (self.n_fi, self.n_pi):
            arr.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def column_of(self, event_id: int) -> int:
        return self._col_index[event_id]

    def primitives(self, event_id: int) -> SpectrumPrimitives:
        j = self._col_index[event_id]
        fi, pi = int(self.n_fi[j]), int(self.n_pi[j])
        return SpectrumPrimitives(fi, self.n_failing - fi, pi, self.n_passing - pi)

    def primitive_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.n_fi, self.n_failing - self.n_fi, self.n_pi, self.n_passing - self.n_pi

    def has_row(self, source_id: str) -> bool:
        return source_id in self._row_index

    def verdict_of(self, source_id: str) -> Verdict:
        return self.rows[self._row_index[source_id]][1]

    def row_events(self, source_id: str) -> tuple[int, ...]:
        row = self.cells[self._row_index[source_id]]
        return tuple(self.columns[j] for j in np.flatnonzero(row))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoverageMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.columns == other.columns
            and np.array_equal(self.cells, other.cells)
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["source_id", "verdict", "event_id", "value"])
        for i, (sid, verdict) in enumerate(self.rows):
            present = np.flatnonzero(self.cells[i])
            if len(present) == 0:
                writer.writerow([sid, verdict.value, "", 0])
            for j in present:
                writer.writerow([sid, verdict.value, self.columns[j], 1])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CoverageMatrix":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header != ["source_id", "verdict", "event_id", "value"]:
            raise ConfigError(f"unexpected spectrum header {header}")
        rows: dict[str, Verdict] = {}
        present: dict[str, list[int]] = {}
        for rec in reader:
            if not rec:
                continue
            sid, verdict, event, value = rec
            rows.setdefault(sid, Verdict(verdict))
            present.setdefault(sid, [])
            if value == "1":
                present[sid].append(int(event))
        columns = sorted({e for evs in present.values() for e in evs})
        col = {e: j for j, e in enumerate(columns)}
        cells = np.zeros((len(rows), len(columns)), dtype=bool)
        for i, sid in enumerate(rows):
            cells[i, [col[e] for e in present[sid]]] = True
        return cls(list(rows.items()), columns, cells)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "CoverageMatrix":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read spectrum {path}: {exc}") from exc
        try:
            return cls.from_csv(text)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"malformed spectrum {path}: {exc}") from exc


def build_matrix(failing: Iterable[AbstractedLog], passing: Iterable[AbstractedLog]) -> CoverageMatrix:
    logs = [(log, Verdict.FAIL) for log in failing] + [(log, Verdict.PASS) for log in passing]
    columns = sorted({e for log, _ in logs for e in log.events})
    col = {e: j for j, e in enumerate(columns)}
    cells = np.zeros((len(logs), len(columns)), dtype=bool)
    for i, (log, _) in enumerate(logs):
        if log.events:
            cells[i, [col[e] for e in set(log.events)]] = True
    return CoverageMatrix([(log.source_id, v) for log, v in logs], columns, cells)


def score_all(matrix: CoverageMatrix, m: Measure) -> dict[int, float]:
    scores = score_arrays(*matrix.primitive_arrays(), m)
    return dict(zip(matrix.columns, scores.tolist()))
