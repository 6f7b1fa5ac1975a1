"""Deterministic seat allocation.

Primary round: courses are processed from most to least contested (total
tokens invested, ties by course id); within a course, bidders are ranked by
effective bid with identifier-hash tie-breaks, and seats go to the top
bidders that fit the student's schedule and declared credit budget.

Fallback round: students still short of their declared credits are filled
into courses with spare seats, most-contested course first, students ordered
by how many tokens they spent on bids that won nothing.

Tie-breaks hash identifiers only, never timestamps, so nothing about the
outcome rewards submission speed.
"""

from __future__ import annotations

import hashlib
import io
import csv
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping

from .errors import BadIdentifierError, NoEpochError, NotClosedError
from .registrar import CourseOffering

if TYPE_CHECKING:  # pragma: no cover
    from .engine import LedgerState

ROUND_PRIMARY = "primary"
ROUND_FALLBACK = "fallback"


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def tie_key(epoch_id: str, course_id: str, student_id: str) -> str:
    """Order-free tie-break digest; lexicographically smaller hex wins."""
    for value in (epoch_id, course_id, student_id):
        if not value or "|" in value:
            raise BadIdentifierError(f"tie key identifiers must be non-empty and '|'-free: {value!r}")
    return _sha(f"{epoch_id}|{course_id}|{student_id}")


def fallback_key(epoch_id: str, student_id: str) -> str:
    for value in (epoch_id, student_id):
        if not value or "|" in value:
            raise BadIdentifierError(f"fallback key identifiers must be non-empty and '|'-free: {value!r}")
    return _sha(f"{epoch_id}|fallback|{student_id}")


@dataclass(frozen=True)
class Award:
    student_id: str
    course_id: str
    round: str  # ROUND_PRIMARY | ROUND_FALLBACK


@dataclass(frozen=True)
class CourseStanding:
    course_id: str
    total_tokens: int
    ranked_bidders: tuple[tuple[str, int], ...]  # (student_id, effective_bid), best first


@dataclass(frozen=True)
class SettlementInstance:
    """Everything the allocator needs, detached from live engine state."""

    epoch_id: str
    courses: tuple[CourseOffering, ...]
    declared: Mapping[str, int]  # student -> declared credits
    bids: Mapping[tuple[str, str], int]  # (student, course) -> effective tokens
    arrivals: tuple[tuple[str, str, int], ...] = ()  # accepted bids in intake order


@dataclass(frozen=True)
class AllocationResult:
    epoch_id: str
    awards: tuple[Award, ...]  # sorted by (student_id, course_id)
    per_student_credits: Mapping[str, int]
    unfilled: Mapping[str, int]  # course -> remaining seats

    def awards_by_round(self, which: str) -> set[tuple[str, str]]:
        return {(a.student_id, a.course_id) for a in self.awards if a.round == which}

    def courses_of(self, student_id: str) -> set[str]:
        return {a.course_id for a in self.awards if a.student_id == student_id}

    def to_payload(self) -> dict[str, str]:
        """Flat encoding suitable for an on-ledger settlement record."""
        awards = ",".join(
            f"{a.student_id}:{a.course_id}:{a.round}"
            for a in sorted(self.awards, key=lambda a: (a.student_id, a.course_id))
        )
        credits = ",".join(f"{s}:{self.per_student_credits[s]}" for s in sorted(self.per_student_credits))
        unfilled = ",".join(f"{c}:{self.unfilled[c]}" for c in sorted(self.unfilled))
        return {"awards": awards, "credits": credits, "unfilled": unfilled}

    @classmethod
    def from_payload(cls, epoch_id: str, payload: Mapping[str, int | str]) -> "AllocationResult":
        def split_pairs(text: str) -> list[list[str]]:
            return [item.split(":") for item in text.split(",")] if text else []

        awards = tuple(
            Award(student_id=s, course_id=c, round=r)
            for s, c, r in split_pairs(str(payload["awards"]))
        )
        credits = {s: int(n) for s, n in split_pairs(str(payload["credits"]))}
        unfilled = {c: int(n) for c, n in split_pairs(str(payload["unfilled"]))}
        return cls(epoch_id=epoch_id, awards=awards, per_student_credits=credits, unfilled=unfilled)


def _sorted_awards(awards: Iterable[Award]) -> tuple[Award, ...]:
    return tuple(sorted(awards, key=lambda a: (a.student_id, a.course_id)))


def course_standings(inst: SettlementInstance) -> list[CourseStanding]:
    """Per-course totals and bidder rankings, in processing order."""
    standings = []
    for course in inst.courses:
        entries = [
            (student, amount)
            for (student, course_id), amount in inst.bids.items()
            if course_id == course.course_id
        ]
        entries.sort(key=lambda e: (-e[1], tie_key(inst.epoch_id, course.course_id, e[0])))
        standings.append(
            CourseStanding(
                course_id=course.course_id,
                total_tokens=sum(a for _, a in entries),
                ranked_bidders=tuple(entries),
            )
        )
    standings.sort(key=lambda st: (-st.total_tokens, st.course_id))
    return standings


class _ScheduleTracker:
    """Constraint bookkeeping shared by both allocation rounds."""

    def __init__(self, inst: SettlementInstance):
        self.by_id = {c.course_id: c for c in inst.courses}
        self.declared = dict(inst.declared)
        self.credits = {s: 0 for s in inst.declared}
        self.held: dict[str, set[str]] = {s: set() for s in inst.declared}
        self.slots: dict[str, set] = {s: set() for s in inst.declared}

    def fits(self, student: str, course_id: str) -> bool:
        if student not in self.declared:
            return False
        course = self.by_id[course_id]
        if course_id in self.held[student]:
            return False
        if self.slots[student] & course.slots:
            return False
        return self.credits[student] + course.credits <= self.declared[student]

    def grant(self, student: str, course_id: str) -> None:
        course = self.by_id[course_id]
        self.held[student].add(course_id)
        self.slots[student] |= course.slots
        self.credits[student] += course.credits


def allocate_primary(inst: SettlementInstance) -> AllocationResult:
    """Rank-and-award round: top bidders within capacity, constraints enforced
    as seats are handed out. Skipped bidders keep their tokens spent."""
    tracker = _ScheduleTracker(inst)
    awards: list[Award] = []
    remaining: dict[str, int] = {}
    for standing in course_standings(inst):
        seats = tracker.by_id[standing.course_id].capacity
        for student, _amount in standing.ranked_bidders:
            if seats == 0:
                break
            if not tracker.fits(student, standing.course_id):
                continue
            tracker.grant(student, standing.course_id)
            awards.append(Award(student, standing.course_id, ROUND_PRIMARY))
            seats -= 1
        remaining[standing.course_id] = seats
    return AllocationResult(
        epoch_id=inst.epoch_id,
        awards=_sorted_awards(awards),
        per_student_credits=dict(tracker.credits),
        unfilled=remaining,
    )


def complete_with_fallback(inst: SettlementInstance, primary: AllocationResult) -> AllocationResult:
    """Fill under-credited students into leftover seats.

    Student priority: tokens spent on bids that won nothing, descending;
    course scan: total tokens descending. Shortfall is a valid outcome.
    """
    tracker = _ScheduleTracker(inst)
    for award in primary.awards:
        tracker.grant(award.student_id, award.course_id)

    losing_spend = {s: 0 for s in inst.declared}
    for (student, course_id), amount in inst.bids.items():
        if course_id not in tracker.held.get(student, set()):
            losing_spend[student] = losing_spend.get(student, 0) + amount

    queue = sorted(
        (s for s in inst.declared if tracker.credits[s] < tracker.declared[s]),
        key=lambda s: (-losing_spend[s], fallback_key(inst.epoch_id, s)),
    )
    scan_order = [st.course_id for st in course_standings(inst)]
    remaining = dict(primary.unfilled)

    awards = list(primary.awards)
    for student in queue:
        for course_id in scan_order:
            if tracker.credits[student] >= tracker.declared[student]:
                break
            if remaining[course_id] == 0:
                continue
            if not tracker.fits(student, course_id):
                continue
            tracker.grant(student, course_id)
            awards.append(Award(student, course_id, ROUND_FALLBACK))
            remaining[course_id] -= 1
    return AllocationResult(
        epoch_id=inst.epoch_id,
        awards=_sorted_awards(awards),
        per_student_credits=dict(tracker.credits),
        unfilled=remaining,
    )


def allocate(inst: SettlementInstance) -> AllocationResult:
    return complete_with_fallback(inst, allocate_primary(inst))


def fcfs_allocate(inst: SettlementInstance) -> AllocationResult:
    """First-come-first-served baseline: amounts are ignored, each arriving
    bid grabs a seat if one is free and the schedule constraints allow it."""
    tracker = _ScheduleTracker(inst)
    remaining = {c.course_id: c.capacity for c in inst.courses}
    awards: list[Award] = []
    for student, course_id, _amount in inst.arrivals:
        if remaining.get(course_id, 0) == 0:
            continue
        if not tracker.fits(student, course_id):
            continue
        tracker.grant(student, course_id)
        awards.append(Award(student, course_id, ROUND_PRIMARY))
        remaining[course_id] -= 1
    return AllocationResult(
        epoch_id=inst.epoch_id,
        awards=_sorted_awards(awards),
        per_student_credits=dict(tracker.credits),
        unfilled=remaining,
    )


# --- live-state entry points ----------------------------------------------


def instance_from_state(state: "LedgerState") -> SettlementInstance:
    ep = state.current()
    if ep is None:
        raise NoEpochError("no epoch open")
    return SettlementInstance(
        epoch_id=ep.config.epoch_id,
        courses=tuple(ep.catalog.values()),
        declared={s: d.declared_credits for s, d in ep.declarations.items()},
        bids=dict(ep.effective_bids),
        arrivals=tuple(ep.accepted_bids),
    )


def _require_closed(state: "LedgerState", now: int) -> None:
    ep = state.current()
    if ep is None:
        raise NoEpochError("no epoch open")
    if now < ep.config.voting_close:
        raise NotClosedError(
            f"voting open until {ep.config.voting_close}, settlement requested at {now}"
        )


def settle(state: "LedgerState", now: int) -> AllocationResult:
    """Primary round over the live state; voting must have closed."""
    _require_closed(state, now)
    return allocate_primary(instance_from_state(state))


def fallback_fill(state: "LedgerState", primary: AllocationResult) -> AllocationResult:
    return complete_with_fallback(instance_from_state(state), primary)


def fcfs_baseline(state: "LedgerState", now: int) -> AllocationResult:
    _require_closed(state, now)
    return fcfs_allocate(instance_from_state(state))


# --- exports ---------------------------------------------------------------


def results_csv(inst: SettlementInstance, result: AllocationResult) -> str:
    """Award rows: ``student_id,course_id,round,credits``."""
    by_id = {c.course_id: c for c in inst.courses}
    round_rank = {ROUND_PRIMARY: 0, ROUND_FALLBACK: 1}
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["student_id", "course_id", "round", "credits"])
    for award in sorted(result.awards, key=lambda a: (round_rank[a.round], a.course_id, a.student_id)):
        writer.writerow([award.student_id, award.course_id, award.round, by_id[award.course_id].credits])
    return out.getvalue()


def summary_csv(inst: SettlementInstance, result: AllocationResult) -> str:
    """Course rows: ``course_id,total_tokens,seats_filled,capacity``."""
    totals = {c.course_id: 0 for c in inst.courses}
    for (_student, course_id), amount in inst.bids.items():
        totals[course_id] += amount
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["course_id", "total_tokens", "seats_filled", "capacity"])
    for course in sorted(inst.courses, key=lambda c: c.course_id):
        filled = course.capacity - result.unfilled.get(course.course_id, course.capacity)
        writer.writerow([course.course_id, totals[course.course_id], filled, course.capacity])
    return out.getvalue()
