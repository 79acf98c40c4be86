from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator
from contextlib import contextmanager
from pathlib import Path

from pydantic import ValidationError

from hamcount.core import AllDistinctPairs, Composition, Count, Pair, count_to_decimal
from hamcount.errors import UsageError
from hamcount.schemas import CacheKind, CacheRecord, CalibrationRecord, CountObject, CountQuery


logger = logging.getLogger(__name__)

RecordKey = tuple[str, tuple[int, ...], tuple[int, ...] | None]

OBJECT_KINDS = {
    CountObject.smirnov_total: CacheKind.S,
    CountObject.circular_positioned: CacheKind.S,
    CountObject.admissible_words: CacheKind.W,
    CountObject.ham_paths: CacheKind.W,
    CountObject.ham_cycles: CacheKind.H,
    CountObject.ham_cycles_directed: CacheKind.H_directed,
    CountObject.necklaces: CacheKind.necklace,
}


def _sorted_colors(parts: Composition) -> dict[int, int]:
    order = sorted(range(1, parts.m + 1), key=parts.part)
    return {color: position for position, color in enumerate(order, 1)}


def record_key(query: CountQuery) -> tuple[CacheKind, Composition, tuple[int, int] | None]:
    """Cache identity of a query: parts sorted, endpoint colors renamed to follow them."""
    parts = query.parts
    endpoints = query.endpoints
    if query.object == CountObject.cut_closure:
        parts = parts.with_extra(endpoints.s)
        pair = (endpoints.s, endpoints.s)
    elif query.object == CountObject.smirnov_endpoint and not isinstance(endpoints, AllDistinctPairs):
        if isinstance(endpoints, Pair):
            pair = (endpoints.s, endpoints.r)
        else:
            pair = (endpoints.s, endpoints.s)
    else:
        kind = OBJECT_KINDS.get(query.object, CacheKind.S)
        return kind, parts.canonical(), None

    renamed = _sorted_colors(parts)
    return CacheKind.F, parts.canonical(), (renamed[pair[0]], renamed[pair[1]])


def make_record(query: CountQuery, value: Count) -> CacheRecord:
    kind, parts, endpoints = record_key(query)
    return CacheRecord(
        kind=kind,
        parts=list(parts.parts),
        endpoints=list(endpoints) if endpoints is not None else None,
        value=count_to_decimal(value),
    )


def _lines(path: Path) -> Iterator[tuple[int, bytes]]:
    if not path.exists():
        return
    try:
        with path.open("rb") as handle:
            for number, line in enumerate(handle, 1):
                line = line.strip()
                if line:
                    yield number, line
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc


def cache_read(path: Path) -> dict[RecordKey, CacheRecord]:
    records: dict[RecordKey, CacheRecord] = {}
    for number, line in _lines(path):
        try:
            record = CacheRecord.model_validate_json(line.decode("utf-8"))
        except UnicodeDecodeError:
            logger.warning("%s:%d: skipping corrupt cache line (not UTF-8)", path, number)
            continue
        except ValidationError as exc:
            logger.warning("%s:%d: skipping corrupt cache line (%s)", path, number, exc.errors()[0]["msg"])
            continue
        records[record.key] = record
    return records


def cache_write(path: Path, records: Iterable[CacheRecord]) -> int:
    written = 0
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.model_dump_json() + "\n")
            written += 1
    return written


class CacheStore:
    """Reads a cache file once, serves lookups, and appends new records on flush."""

    def __init__(self, path: Path | None):
        self.path = path
        self.records = cache_read(path) if path is not None else {}
        self.pending: list[CacheRecord] = []

    def get(self, query: CountQuery) -> Count | None:
        if self.path is None:
            return None
        kind, parts, endpoints = record_key(query)
        record = self.records.get((kind.value, parts.parts, endpoints))
        return record.count if record is not None else None

    def put(self, query: CountQuery, value: Count) -> None:
        if self.path is None:
            return
        record = make_record(query, value)
        self.records[record.key] = record
        self.pending.append(record)

    def flush(self) -> None:
        if self.path is not None and self.pending:
            try:
                cache_write(self.path, self.pending)
            except OSError as exc:
                logger.warning("could not append %d records to %s: %s", len(self.pending), self.path, exc)
            else:
                logger.debug("appended %d records to %s", len(self.pending), self.path)
        self.pending = []


@contextmanager
def open_cache(path: Path | None):
    store = CacheStore(path)
    try:
        yield store
    finally:
        store.flush()


def read_calibrations(path: Path) -> dict[tuple[int, int, int], CalibrationRecord]:
    records: dict[tuple[int, int, int], CalibrationRecord] = {}
    for number, line in _lines(path):
        try:
            record = CalibrationRecord.model_validate_json(line.decode("utf-8"))
        except (UnicodeDecodeError, ValidationError):
            logger.warning("%s:%d: skipping corrupt calibration line", path, number)
            continue
        records[record.key] = record
    return records


def write_calibration(path: Path, record: CalibrationRecord) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8") as handle:
            handle.write(record.model_dump_json() + "\n")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from exc
