"""Service runtime: durable engine + clock + event fan-out.

Every mutating request is serialized through the engine; the block hits disk
(flush + fsync) before the engine call returns, so a 200 response implies
the transaction is already durable. Restarting the service replays the
ledger file and is indistinguishable from never having stopped.
"""

from __future__ import annotations

import os
import time
from pathlib import Path

from ..engine import (
    KIND_ADVANCE_PHASE,
    KIND_BID,
    KIND_DECLARE,
    KIND_OPEN_EPOCH,
    KIND_REGISTER_COURSE,
    KIND_SETTLEMENT,
    LedgerState,
    PHASE_PREPARATION,
    PHASE_VOTING,
    VotingEngine,
    balance_of,
    phase_view,
)
from ..errors import PhaseError
from ..ledger import Block, block_to_line, iter_ledger_lines, load_ledger_lines
from .config import CLOCK_FIXED, ServiceConfig
from .events import Event, EventBus



class ServiceRuntime:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.bus = EventBus()
        self._fixed_now = config.clock_start
        self._ledger_path = Path(config.ledger_path)
        self._file = None

        existing: list[Block] = []
        if self._ledger_path.exists() and self._ledger_path.stat().st_size > 0:
            data = self._ledger_path.read_bytes()
            existing = load_ledger_lines(iter_ledger_lines(data))

        if existing:
            # from_blocks verifies the chain and refuses corrupt files.
            self.engine = VotingEngine.from_blocks(
                existing, sink=self._write_block, observer=self._publish_block
            )
        else:
            self.engine = VotingEngine(sink=self._write_block, observer=self._publish_block)

        self._file = open(self._ledger_path, "ab")

    # -- clock

    def now(self) -> int:
        if self.config.clock_mode == CLOCK_FIXED:
            return self._fixed_now
        wall = int(time.time() * 1000)
        # A wall clock that steps backwards must not break append ordering.
        return max(wall, self.engine.state.last_timestamp)

    def set_clock(self, now: int) -> int:
        if self.config.clock_mode != CLOCK_FIXED:
            raise PhaseError("clock is adjustable only in fixed mode")
        if now < self._fixed_now:
            raise PhaseError(f"clock cannot move backwards (now {self._fixed_now})")
        self._fixed_now = now
        self.engine.tick(now)
        return now

    # -- durability and events

    def _write_block(self, block: Block) -> None:
        line = (block_to_line(block) + "\n").encode("utf-8")
        self._file.write(line)
        self._file.flush()
        os.fsync(self._file.fileno())

    def _publish_block(self, block: Block, state: LedgerState) -> None:
        self.bus.publish(self._derive_event(block, state))

    @staticmethod
    def _derive_event(block: Block, state: LedgerState) -> Event:
        txn = block.txn
        if txn.kind == KIND_OPEN_EPOCH:
            return Event("PhaseChanged", txn.seq, {"epoch_id": txn.epoch_id, "phase": PHASE_PREPARATION})
        if txn.kind == KIND_ADVANCE_PHASE:
            return Event("PhaseChanged", txn.seq, {"epoch_id": txn.epoch_id, "phase": PHASE_VOTING})
        if txn.kind == KIND_REGISTER_COURSE:
            return Event(
                "CourseTotalsChanged",
                txn.seq,
                {
                    "course_id": txn.payload["course_id"],
                    "title": txn.payload["title"],
                    "credits": txn.payload["credits"],
                    "capacity": txn.payload["capacity"],
                    "slots": txn.payload["slots"],
                    "total_tokens": 0,
                },
            )
        if txn.kind == KIND_DECLARE:
            return Event(
                "DeclarationRecorded",
                txn.seq,
                {
                    "student_id": txn.payload["student_id"],
                    "declared_credits": txn.payload["declared_credits"],
                    "minted_tokens": txn.payload["minted_tokens"],
                },
            )
        if txn.kind == KIND_BID:
            student = str(txn.payload["student_id"])
            course = str(txn.payload["course_id"])
            ep = state.current()
            total = None
            if ep is not None and course in ep.catalog:
                total = sum(
                    amount for (s, c), amount in ep.effective_bids.items() if c == course
                )
            return Event(
                "BidRecorded",
                txn.seq,
                {
                    "student_id": student,
                    "course_id": course,
                    "amount": txn.payload["amount"],
                    "accepted": bool(int(txn.payload["accepted"])),
                    "reason": txn.payload["reason"],
                    "balance": balance_of(state, student),
                    "course_total": total,
                },
            )
        if txn.kind == KIND_SETTLEMENT:
            return Event("Settled", txn.seq, {"epoch_id": txn.epoch_id})
        raise ValueError(f"no event mapping for transaction kind {txn.kind!r}")

    # -- views

    def phase_info(self) -> dict:
        now = self.now()
        with self.engine._lock:
            cfg = self.engine.epoch_config()
            return {
                "phase": phase_view(self.engine.state, now),
                "now": now,
                "epoch_id": cfg.epoch_id if cfg else None,
                "voting_open": cfg.voting_open if cfg else None,
                "voting_close": cfg.voting_close if cfg else None,
            }

    def results_view(self) -> dict | None:
        with self.engine._lock:
            result = self.engine.results()
            if result is None:
                return None
            declared = self.engine.declared_credits()
            return {
                "epoch_id": result.epoch_id,
                "awards": [
                    {"student_id": a.student_id, "course_id": a.course_id, "round": a.round}
                    for a in result.awards
                ],
                "per_student_credits": dict(result.per_student_credits),
                "declared_credits": declared,
                "unfilled": dict(result.unfilled),
            }

    def ledger_bytes(self) -> bytes:
        with self.engine._lock:
            return self._ledger_path.read_bytes()

    def close(self) -> None:
        self.bus.close()
        if self._file is not None:
            self._file.close()
            self._file = None
