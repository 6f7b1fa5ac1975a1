"""Offline ledger audit.

Verifies chain integrity, replays the log under full rule checking, and
recomputes every settlement record with a ranking implementation separate
from the engine's, then diffs the two. The recompute deliberately shares
only the data types with the live allocator so a bug (or a forged record)
in one path cannot hide in the other.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .engine import apply_transaction, initial_state
from .ledger import (
    Block,
    KIND_SETTLEMENT,
    iter_ledger_lines,
    load_ledger_lines,
    verify_chain,
)
from .errors import CorruptLedgerError, SeatbidError
from .settlement import (
    AllocationResult,
    Award,
    ROUND_FALLBACK,
    ROUND_PRIMARY,
    SettlementInstance,
    instance_from_state,
)


@dataclass
class AuditReport:
    ok: bool
    messages: list[str] = field(default_factory=list)

    def line(self) -> str:
        return "\n".join(self.messages)


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def recompute_allocation(inst: SettlementInstance) -> AllocationResult:
    """Reference recomputation of a settlement, written independently of the
    live allocator: same stated rules, separate walk."""
    catalog = {c.course_id: c for c in inst.courses}
    totals: dict[str, int] = {cid: 0 for cid in catalog}
    per_course: dict[str, list[tuple[str, int]]] = {cid: [] for cid in catalog}
    for (student, cid), amount in inst.bids.items():
        totals[cid] += amount
        per_course[cid].append((student, amount))

    course_order = sorted(catalog, key=lambda cid: (-totals[cid], cid))

    schedule: dict[str, list[str]] = {s: [] for s in inst.declared}
    credit_sum: dict[str, int] = {s: 0 for s in inst.declared}
    seats_left: dict[str, int] = {cid: catalog[cid].capacity for cid in catalog}

    def clashes(student: str, cid: str) -> bool:
        new = catalog[cid].slots
        return any(catalog[held].slots & new for held in schedule[student])

    def admissible(student: str, cid: str) -> bool:
        return (
            cid not in schedule[student]
            and not clashes(student, cid)
            and credit_sum[student] + catalog[cid].credits <= inst.declared[student]
        )

    awards: list[Award] = []
    for cid in course_order:
        ranked = sorted(
            per_course[cid],
            key=lambda e: (-e[1], _digest(f"{inst.epoch_id}|{cid}|{e[0]}")),
        )
        for student, _amount in ranked:
            if seats_left[cid] == 0:
                break
            if not admissible(student, cid):
                continue
            schedule[student].append(cid)
            credit_sum[student] += catalog[cid].credits
            seats_left[cid] -= 1
            awards.append(Award(student, cid, ROUND_PRIMARY))

    lost_tokens: dict[str, int] = {s: 0 for s in inst.declared}
    for (student, cid), amount in inst.bids.items():
        if cid not in schedule.get(student, []):
            lost_tokens[student] = lost_tokens.get(student, 0) + amount

    needy = [s for s in inst.declared if credit_sum[s] < inst.declared[s]]
    needy.sort(key=lambda s: (-lost_tokens[s], _digest(f"{inst.epoch_id}|fallback|{s}")))
    for student in needy:
        for cid in course_order:
            if credit_sum[student] >= inst.declared[student]:
                break
            if seats_left[cid] == 0 or not admissible(student, cid):
                continue
            schedule[student].append(cid)
            credit_sum[student] += catalog[cid].credits
            seats_left[cid] -= 1
            awards.append(Award(student, cid, ROUND_FALLBACK))

    return AllocationResult(
        epoch_id=inst.epoch_id,
        awards=tuple(sorted(awards, key=lambda a: (a.student_id, a.course_id))),
        per_student_credits=credit_sum,
        unfilled=seats_left,
    )


def diff_results(recorded: AllocationResult, recomputed: AllocationResult) -> list[str]:
    """Human-readable differences, course by course, empty when identical."""
    diffs: list[str] = []
    courses = sorted(set(recorded.unfilled) | set(recomputed.unfilled))
    for cid in courses:
        rec = sorted(a.student_id for a in recorded.awards if a.course_id == cid)
        cal = sorted(a.student_id for a in recomputed.awards if a.course_id == cid)
        if rec != cal:
            diffs.append(
                f"course {cid}: recorded {','.join(rec) or '-'}, recomputed {','.join(cal) or '-'}"
            )
    if not diffs and recorded.to_payload() != recomputed.to_payload():
        diffs.append("settlement metadata (credits/unfilled/rounds) differs")
    return diffs


def audit_blocks(blocks: list[Block]) -> AuditReport:
    report = verify_chain(blocks)
    if not report.ok:
        return AuditReport(False, [f"chain FAILED at block {report.index}: {report.kind} ({report.detail})"])

    messages = [f"chain OK ({len(blocks)} blocks)"]
    state = initial_state()
    settlements = 0
    for block in blocks:
        txn = block.txn
        if txn.kind == KIND_SETTLEMENT:
            # Diff against an independent recompute before folding the record in.
            inst = instance_from_state(state)
            recorded = AllocationResult.from_payload(txn.epoch_id, txn.payload)
            recomputed = recompute_allocation(inst)
            diffs = diff_results(recorded, recomputed)
            if diffs:
                messages.append(f"settlement at block {txn.seq} does not recompute:")
                messages.extend("  " + d for d in diffs)
                return AuditReport(False, messages)
            settlements += 1
        try:
            apply_transaction(state, txn, verify_settlement=False)
        except SeatbidError as exc:
            messages.append(f"invalid transition at block {txn.seq}: {exc}")
            return AuditReport(False, messages)

    if settlements:
        messages.append(f"settlement matches ({settlements} record(s) recomputed)")
    else:
        messages.append("no settlement recorded")
    return AuditReport(True, messages)


def audit_lines(lines: list[bytes | str]) -> AuditReport:
    try:
        blocks = load_ledger_lines(lines)
    except CorruptLedgerError as exc:
        return AuditReport(False, [f"parse error: {exc}"])
    return audit_blocks(blocks)


def audit_ledger(path: str | Path) -> AuditReport:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        return AuditReport(False, [f"cannot read ledger: {exc}"])
    return audit_lines(iter_ledger_lines(data))
