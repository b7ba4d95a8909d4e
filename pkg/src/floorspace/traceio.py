"""Line-delimited JSON readers and writers.

Every file the package produces is one JSON object per line with a
``"type"`` discriminator. ``"-"`` stands for stdin/stdout everywhere.
"""
from __future__ import annotations

import json
import logging
import sys
from contextlib import contextmanager
from typing import Any, Iterable, Iterator, TextIO

from .errors import TraceFormatError
from .model import FloorPartition, Trace, VadEvent

log = logging.getLogger(__name__)


@contextmanager
def open_text(path: str, mode: str = "r") -> Iterator[TextIO]:
    if path == "-":
        yield sys.stdout if "w" in mode else sys.stdin
        return
    with open(path, mode, encoding="utf-8", newline="\n") as fh:
        yield fh


def dumps(record: dict[str, Any]) -> str:
    return json.dumps(record, ensure_ascii=False, allow_nan=False)


def write_records(records: Iterable[dict[str, Any]], path: str) -> None:
    with open_text(path, "w") as fh:
        for record in records:
            fh.write(dumps(record) + "\n")


def read_records(path: str) -> Iterator[tuple[int, dict[str, Any]]]:
    with open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(record, dict) or "type" not in record:
                raise TraceFormatError(f"line {lineno}: record without a 'type' field")
            yield lineno, record


def _floors_record(p: FloorPartition) -> list[list[str]]:
    return [list(b) for b in p.floors]


def trace_records(trace: Trace) -> list[dict[str, Any]]:
    """Serialize a trace: header first, then vad/truth lines in time order."""
    header = {"type": "header", "participants": list(trace.participants), "duration": trace.duration}
    body: list[tuple[tuple, dict[str, Any]]] = []
    for g in trace.ground_truth or ():
        body.append(((g.at, 0, ""), {"type": "truth", "time": g.at, "floors": _floors_record(g)}))
    for e in trace.events:
        body.append(
            ((e.start, 1, e.speaker), {"type": "vad", "speaker": e.speaker, "start": e.start, "end": e.end})
        )
    body.sort(key=lambda item: item[0])
    return [header] + [r for _, r in body]


def write_trace(trace: Trace, path: str) -> None:
    write_records(trace_records(trace), path)


def _number(record: dict, key: str, lineno: int) -> float:
    value = record.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TraceFormatError(f"line {lineno}: field {key!r} must be a number")
    return float(value)


def parse_trace(records: Iterable[tuple[int, dict[str, Any]]]) -> Trace:
    header = None
    events: list[VadEvent] = []
    truth: list[FloorPartition] = []
    for lineno, rec in records:
        kind = rec["type"]
        if kind == "header":
            if header is not None:
                raise TraceFormatError(f"line {lineno}: second header record")
            parts = rec.get("participants")
            if not isinstance(parts, list) or not all(isinstance(p, str) for p in parts):
                raise TraceFormatError(f"line {lineno}: header needs a list of participant ids")
            header = (tuple(parts), _number(rec, "duration", lineno))
        elif header is None:
            raise TraceFormatError(f"line {lineno}: record before header")
        elif kind == "vad":
            speaker = rec.get("speaker")
            if not isinstance(speaker, str):
                raise TraceFormatError(f"line {lineno}: vad record needs a speaker id")
            events.append(VadEvent(speaker, _number(rec, "start", lineno), _number(rec, "end", lineno)))
        elif kind == "truth":
            floors = rec.get("floors")
            if not isinstance(floors, list) or not all(isinstance(b, list) for b in floors):
                raise TraceFormatError(f"line {lineno}: truth record needs a list of floors")
            truth.append(FloorPartition(tuple(tuple(b) for b in floors), 0.0, _number(rec, "time", lineno)))
        else:
            log.warning("line %d: skipping unknown record type %r", lineno, kind)
    if header is None:
        raise TraceFormatError("missing header record")
    participants, duration = header
    return Trace(participants, tuple(events), duration, tuple(truth) if truth else None)


def read_trace(path: str) -> Trace:
    return parse_trace(read_records(path))
