"""Append-only event log with gapless sequence numbers.

Records are JSON-lines friendly: every payload is plain data, serialized
canonically so identical runs yield byte-identical logs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, IO

from .documents import canonical_json

CATEGORIES = ("intent", "sla", "profile", "slice", "mano", "kpi", "action")


@dataclass(frozen=True)
class EventRecord:
    seq: int
    t: float  # simulation timestamp
    category: str
    payload: dict

    def to_line(self) -> str:
        return canonical_json(
            {"seq": self.seq, "t": self.t, "category": self.category, "payload": self.payload}
        )

    @classmethod
    def from_doc(cls, doc: dict) -> "EventRecord":
        return cls(seq=doc["seq"], t=doc["t"], category=doc["category"], payload=doc["payload"])


class EventLog:
    def __init__(self, sink: IO[str] | None = None, base_seq: int = 0):
        self.records: list[EventRecord] = []
        self.sink = sink
        self.base_seq = base_seq  # seq to continue from after a snapshot restore
        self.listeners: list[Callable[[EventRecord], None]] = []

    @property
    def last_seq(self) -> int:
        return self.records[-1].seq if self.records else self.base_seq

    def append(self, category: str, payload: dict, t: float) -> EventRecord:
        if category not in CATEGORIES:
            raise ValueError(f"unknown event category {category!r}")
        record = EventRecord(seq=self.last_seq + 1, t=t, category=category, payload=payload)
        self.records.append(record)
        if self.sink is not None:
            self.sink.write(record.to_line() + "\n")
        for listener in self.listeners:
            listener(record)
        return record

    def after(self, seq: int, limit: int | None = None) -> list[EventRecord]:
        out = [r for r in self.records if r.seq > seq]
        return out[:limit] if limit is not None else out

    def dump_lines(self) -> str:
        return "\n".join(r.to_line() for r in self.records) + ("\n" if self.records else "")
