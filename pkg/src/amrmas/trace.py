"""Run trace: an ordered list of JSON-ready records, written as JSONL.

Three record shapes share the stream:

* message   ``{"tick", "msg_id", "from", "to", "correlates", "payload"}``
* event     ``{"tick", "agent", "event", ...}``
* snapshot  ``{"tick", "robots", "obstacles"}``
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

from .messaging import Envelope


class Trace:
    def __init__(self) -> None:
        self.records: list[dict[str, Any]] = []

    def message(self, env: Envelope) -> None:
        self.records.append(env.to_record())

    def event(self, tick: int, agent: str, event: str, **fields: Any) -> None:
        self.records.append({"tick": tick, "agent": agent, "event": event, **fields})

    def snapshot(self, record: dict[str, Any]) -> None:
        self.records.append(record)


def record_kind(rec: dict[str, Any]) -> str:
    if "event" in rec:
        return "event"
    if "msg_id" in rec:
        return "message"
    if "robots" in rec:
        return "snapshot"
    return "unknown"


def dumps_jsonl(records: Iterable[dict[str, Any]]) -> str:
    return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in records)


def write_jsonl(records: Iterable[dict[str, Any]], path: str | Path) -> None:
    Path(path).write_text(dumps_jsonl(records), encoding="utf-8")


def read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out
