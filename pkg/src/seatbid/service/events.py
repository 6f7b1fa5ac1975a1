"""Ordered event fan-out for live subscribers.

One event per appended block, published in ledger order. Subscribers name a
resume sequence and receive every event with seq >= resume, first from the
backlog and then live, with no gaps; identical for every subscriber.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Iterator


@dataclass(frozen=True)
class Event:
    kind: str  # PhaseChanged | DeclarationRecorded | BidRecorded | CourseTotalsChanged | Settled
    seq: int
    payload: dict

    def sse(self) -> str:
        data = json.dumps(
            {"kind": self.kind, "seq": self.seq, "payload": self.payload},
            sort_keys=True,
            separators=(",", ":"),
        )
        return f"id: {self.seq}\nevent: {self.kind}\ndata: {data}\n\n"


class EventBus:
    def __init__(self):
        self._events: list[Event] = []
        self._cond = threading.Condition()
        self._closed = False

    def publish(self, event: Event) -> None:
        with self._cond:
            if self._events and event.seq != self._events[-1].seq + 1:
                raise ValueError("events must arrive in ledger seq order")
            if not self._events and event.seq != 0:
                raise ValueError("first event must carry seq 0")
            self._events.append(event)
            self._cond.notify_all()

    def backlog(self, resume: int = 0) -> list[Event]:
        with self._cond:
            return self._events[max(resume, 0):]

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def subscribe(self, resume: int = 0, poll_seconds: float = 15.0) -> Iterator[Event | None]:
        """Yield events from resume onward, blocking for new ones.

        Yields None on poll timeout so callers can emit keepalives and notice
        dropped connections.
        """
        cursor = max(resume, 0)
        while True:
            with self._cond:
                while cursor >= len(self._events) and not self._closed:
                    if not self._cond.wait(timeout=poll_seconds):
                        break
                if self._closed:
                    return
                chunk = self._events[cursor:]
            if chunk:
                for event in chunk:
                    yield event
                cursor += len(chunk)
            else:
                yield None
