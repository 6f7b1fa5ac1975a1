"""Course-selection state machine over the hash-chained log.

State is nothing but the fold of the transaction log. Every command
validates against current state, appends exactly one transaction, then
applies it; replaying a log therefore reproduces the state exactly, and a
log that fails validation during replay was not produced by this engine.

Phases move one way only: Unopened -> Preparation -> Voting -> Settled.
The engine records the Preparation->Voting crossing as an AdvancePhase
marker the first time it handles a command at or past voting_open; the
Settled transition is carried by the settlement record itself.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from . import settlement
from .errors import (
    AlreadyDeclaredError,
    BadConfigError,
    BadIdentifierError,
    CorruptLedgerError,
    CreditBoundsError,
    DuplicateCourseError,
    EpochActiveError,
    InvalidTransitionError,
    NoEpochError,
    PhaseError,
    SeatbidError,
    SeqGapError,
    TimeRegressionError,
)
from .ledger import (
    Block,
    Chain,
    KIND_ADVANCE_PHASE,
    KIND_BID,
    KIND_DECLARE,
    KIND_OPEN_EPOCH,
    KIND_REGISTER_COURSE,
    KIND_SETTLEMENT,
    Transaction,
    verify_chain,
)
from .registrar import (
    CourseOffering,
    Declaration,
    EpochConfig,
    TokenAccount,
    check_identifier,
    config_from_payload,
    config_to_payload,
    course_from_payload,
    course_to_payload,
    mint_for,
    slots_to_str,
    validate_course,
    validate_epoch_config,
)

PHASE_UNOPENED = "Unopened"
PHASE_PREPARATION = "Preparation"
PHASE_VOTING = "Voting"
PHASE_AWAITING_SETTLEMENT = "AwaitingSettlement"
PHASE_SETTLED = "Settled"

# Rank for monotonicity checks; AwaitingSettlement is the reported tail of
# the Voting phase, never stored.
PHASE_ORDER = (
    PHASE_UNOPENED,
    PHASE_PREPARATION,
    PHASE_VOTING,
    PHASE_AWAITING_SETTLEMENT,
    PHASE_SETTLED,
)

REASON_OK = "OK"
REASON_PHASE = "Phase"
REASON_UNKNOWN_STUDENT = "UnknownStudent"
REASON_UNKNOWN_COURSE = "UnknownCourse"
REASON_NON_POSITIVE = "NonPositive"
REASON_INSUFFICIENT = "InsufficientTokens"

BID_REASONS = (
    REASON_OK,
    REASON_PHASE,
    REASON_UNKNOWN_STUDENT,
    REASON_UNKNOWN_COURSE,
    REASON_NON_POSITIVE,
    REASON_INSUFFICIENT,
)


@dataclass(frozen=True)
class BidOutcome:
    accepted: bool
    reason: str
    balance: int


@dataclass
class EpochState:
    config: EpochConfig
    phase: str = PHASE_PREPARATION
    catalog: dict[str, CourseOffering] = field(default_factory=dict)
    declarations: dict[str, Declaration] = field(default_factory=dict)
    accounts: dict[str, TokenAccount] = field(default_factory=dict)
    effective_bids: dict[tuple[str, str], int] = field(default_factory=dict)
    accepted_bids: list[tuple[str, str, int]] = field(default_factory=list)
    settlement: settlement.AllocationResult | None = None


@dataclass
class LedgerState:
    epochs: dict[str, EpochState] = field(default_factory=dict)
    current_epoch_id: str | None = None
    next_seq: int = 0
    last_timestamp: int = 0

    def current(self) -> EpochState | None:
        if self.current_epoch_id is None:
            return None
        return self.epochs[self.current_epoch_id]


def initial_state() -> LedgerState:
    return LedgerState()


def phase_view(state: LedgerState, clock: int) -> str:
    """Effective phase at a given logical time (pure, total)."""
    ep = state.current()
    if ep is None:
        return PHASE_UNOPENED
    if ep.phase == PHASE_SETTLED:
        return PHASE_SETTLED
    cfg = ep.config
    if clock < cfg.voting_open:
        return PHASE_PREPARATION
    if clock < cfg.voting_close:
        return PHASE_VOTING
    return PHASE_AWAITING_SETTLEMENT


def evaluate_bid(state: LedgerState, student_id: str, course_id: str, amount: int, at: int) -> str:
    """First failing reason, in fixed order: Phase, UnknownStudent,
    UnknownCourse, NonPositive, InsufficientTokens."""
    ep = state.current()
    if (
        ep is None
        or ep.phase != PHASE_VOTING
        or not (ep.config.voting_open <= at < ep.config.voting_close)
    ):
        return REASON_PHASE
    if student_id not in ep.declarations:
        return REASON_UNKNOWN_STUDENT
    if course_id not in ep.catalog:
        return REASON_UNKNOWN_COURSE
    if amount < 1:
        return REASON_NON_POSITIVE
    if ep.accounts[student_id].remaining < amount:
        return REASON_INSUFFICIENT
    return REASON_OK


def balance_of(state: LedgerState, student_id: str, epoch_id: str | None = None) -> int:
    """Remaining tokens; 0 for unknown students or any non-current epoch."""
    ep = state.current()
    if ep is None:
        return 0
    if epoch_id is not None and epoch_id != ep.config.epoch_id:
        return 0
    account = ep.accounts.get(student_id)
    return account.remaining if account else 0


# --- transition function ----------------------------------------------------


def apply_transaction(state: LedgerState, txn: Transaction, *, verify_settlement: bool = True) -> None:
    """Validate and apply one transaction in place.

    Raises the same domain errors command intake would; callers replaying a
    foreign log should treat any of them as proof of forgery.
    """
    if txn.seq != state.next_seq:
        raise SeqGapError(f"expected seq {state.next_seq}, got {txn.seq}")
    if txn.timestamp < state.last_timestamp:
        raise TimeRegressionError(
            f"timestamp {txn.timestamp} precedes {state.last_timestamp}"
        )

    handler = _HANDLERS.get(txn.kind)
    if handler is None:
        raise InvalidTransitionError(f"unknown transaction kind {txn.kind!r}")
    handler(state, txn, verify_settlement)

    state.next_seq += 1
    state.last_timestamp = txn.timestamp


def _require_current(state: LedgerState, txn: Transaction) -> EpochState:
    ep = state.current()
    if ep is None or txn.epoch_id != state.current_epoch_id:
        raise NoEpochError(f"transaction targets epoch {txn.epoch_id!r} which is not open")
    return ep


def _apply_open_epoch(state: LedgerState, txn: Transaction, _v: bool) -> None:
    ep = state.current()
    if ep is not None and ep.phase != PHASE_SETTLED:
        raise EpochActiveError(f"epoch {state.current_epoch_id} is still active")
    if txn.epoch_id in state.epochs:
        raise BadConfigError(f"epoch id {txn.epoch_id!r} already used on this ledger")
    cfg = validate_epoch_config(config_from_payload(txn.epoch_id, txn.payload))
    state.epochs[txn.epoch_id] = EpochState(config=cfg)
    state.current_epoch_id = txn.epoch_id


def _apply_register_course(state: LedgerState, txn: Transaction, _v: bool) -> None:
    ep = _require_current(state, txn)
    if ep.phase != PHASE_PREPARATION or txn.timestamp >= ep.config.voting_open:
        raise PhaseError("courses can only be registered during Preparation")
    course = validate_course(course_from_payload(txn.payload))
    if course.course_id in ep.catalog:
        raise DuplicateCourseError(f"course {course.course_id} already registered")
    ep.catalog[course.course_id] = course


def _apply_declare(state: LedgerState, txn: Transaction, _v: bool) -> None:
    ep = _require_current(state, txn)
    cfg = ep.config
    student_id = check_identifier(str(txn.payload["student_id"]), "student_id")
    credits = int(txn.payload["declared_credits"])
    minted = int(txn.payload["minted_tokens"])
    if not (cfg.declaration_open <= txn.timestamp < cfg.declaration_close):
        raise PhaseError(
            f"declarations accepted in [{cfg.declaration_open}, {cfg.declaration_close})"
        )
    if not (cfg.min_declared_credits <= credits <= cfg.max_declared_credits):
        raise CreditBoundsError(
            f"declared credits {credits} outside [{cfg.min_declared_credits}, {cfg.max_declared_credits}]"
        )
    if student_id in ep.declarations:
        raise AlreadyDeclaredError(f"student {student_id} already declared this epoch")
    if minted != mint_for(credits, cfg.tokens_per_credit):
        raise InvalidTransitionError("minted_tokens does not equal credits * tokens_per_credit")
    ep.declarations[student_id] = Declaration(
        student_id=student_id,
        epoch_id=cfg.epoch_id,
        declared_credits=credits,
        minted_tokens=minted,
    )
    ep.accounts[student_id] = TokenAccount(
        student_id=student_id, epoch_id=cfg.epoch_id, minted=minted, spent=0
    )


def _apply_bid(state: LedgerState, txn: Transaction, _v: bool) -> None:
    student_id = str(txn.payload["student_id"])
    course_id = str(txn.payload["course_id"])
    amount = int(txn.payload["amount"])
    recorded_accepted = bool(int(txn.payload["accepted"]))
    recorded_reason = str(txn.payload["reason"])
    if txn.epoch_id != (state.current_epoch_id or ""):
        raise InvalidTransitionError(
            f"bid labeled for epoch {txn.epoch_id!r} while {state.current_epoch_id!r} is current"
        )

    reason = evaluate_bid(state, student_id, course_id, amount, txn.timestamp)
    if recorded_reason != reason or recorded_accepted != (reason == REASON_OK):
        raise InvalidTransitionError(
            f"bid outcome on record ({recorded_reason}) does not match engine rules ({reason})"
        )
    if reason == REASON_OK:
        ep = state.current()
        assert ep is not None
        ep.accounts[student_id].spent += amount
        key = (student_id, course_id)
        ep.effective_bids[key] = ep.effective_bids.get(key, 0) + amount
        ep.accepted_bids.append((student_id, course_id, amount))


def _apply_advance_phase(state: LedgerState, txn: Transaction, _v: bool) -> None:
    ep = _require_current(state, txn)
    if str(txn.payload.get("to")) != PHASE_VOTING:
        raise InvalidTransitionError("the only recorded crossing is Preparation -> Voting")
    if ep.phase != PHASE_PREPARATION:
        raise PhaseError(f"cannot advance to Voting from {ep.phase}")
    if txn.timestamp < ep.config.voting_open:
        raise PhaseError("Voting cannot begin before voting_open")
    ep.phase = PHASE_VOTING


def _apply_settlement(state: LedgerState, txn: Transaction, verify: bool) -> None:
    ep = _require_current(state, txn)
    if ep.phase == PHASE_SETTLED:
        raise PhaseError("epoch already settled")
    if ep.phase != PHASE_VOTING:
        raise PhaseError(f"cannot settle from phase {ep.phase}")
    if txn.timestamp < ep.config.voting_close:
        raise PhaseError("voting still open")
    recorded = settlement.AllocationResult.from_payload(ep.config.epoch_id, txn.payload)
    if verify:
        recomputed = settlement.allocate(settlement.instance_from_state(state))
        if recomputed.to_payload() != dict(txn.payload):
            raise InvalidTransitionError("settlement record does not match recomputed allocation")
        recorded = recomputed
    ep.settlement = recorded
    ep.phase = PHASE_SETTLED


_HANDLERS: dict[str, Callable[[LedgerState, Transaction, bool], None]] = {
    KIND_OPEN_EPOCH: _apply_open_epoch,
    KIND_REGISTER_COURSE: _apply_register_course,
    KIND_DECLARE: _apply_declare,
    KIND_BID: _apply_bid,
    KIND_ADVANCE_PHASE: _apply_advance_phase,
    KIND_SETTLEMENT: _apply_settlement,
}


def replay(blocks: Sequence[Block]) -> LedgerState:
    """Fold a verified block sequence into state.

    Raises CorruptLedgerError if the chain fails verification and
    InvalidTransitionError if any logged transaction breaks engine rules.
    """
    report = verify_chain(blocks)
    if not report.ok:
        raise CorruptLedgerError(report.detail, index=report.index, kind=report.kind)
    state = initial_state()
    for block in blocks:
        try:
            apply_transaction(state, block.txn)
        except InvalidTransitionError:
            raise
        except SeatbidError as exc:
            raise InvalidTransitionError(f"block {block.txn.seq}: {exc}") from exc
    return state


# --- command intake ----------------------------------------------------------


class VotingEngine:
    """Single-writer command intake in front of the chain.

    All mutating commands are serialized by one lock; the transition function
    is pure given (state, transaction), so a restart that replays the chain
    is indistinguishable from a process that never stopped.
    """

    def __init__(
        self,
        sink: Callable[[Block], None] | None = None,
        observer: Callable[[Block, LedgerState], None] | None = None,
    ):
        self.chain = Chain()
        self.state = initial_state()
        self._sink = sink
        self._observer = observer
        self._lock = threading.RLock()

    @classmethod
    def from_blocks(
        cls,
        blocks: Sequence[Block],
        sink: Callable[[Block], None] | None = None,
        observer: Callable[[Block, LedgerState], None] | None = None,
    ) -> "VotingEngine":
        """Restore an engine from a verified log, firing the observer for
        every historical block (events are derived from the log, not stored)."""
        report = verify_chain(blocks)
        if not report.ok:
            raise CorruptLedgerError(report.detail, index=report.index, kind=report.kind)
        engine = cls(sink=None, observer=None)
        for block in blocks:
            try:
                apply_transaction(engine.state, block.txn)
            except InvalidTransitionError:
                raise
            except SeatbidError as exc:
                raise InvalidTransitionError(f"block {block.txn.seq}: {exc}") from exc
            if observer is not None:
                observer(block, engine.state)
        engine.chain = Chain(blocks)
        engine._sink = sink
        engine._observer = observer
        return engine

    # -- internals

    def _commit(self, kind: str, epoch_id: str, payload: Mapping[str, int | str], at: int) -> Block:
        txn = Transaction(
            seq=self.state.next_seq,
            kind=kind,
            epoch_id=epoch_id,
            timestamp=at,
            payload=dict(payload),
        )
        apply_transaction(self.state, txn)
        block = self.chain.append(txn)
        if self._sink is not None:
            self._sink(block)
        if self._observer is not None:
            self._observer(block, self.state)
        return block

    def _advance_locked(self, at: int) -> None:
        ep = self.state.current()
        if ep is not None and ep.phase == PHASE_PREPARATION and at >= ep.config.voting_open:
            self._commit(KIND_ADVANCE_PHASE, ep.config.epoch_id, {"to": PHASE_VOTING}, at)

    # -- commands

    def tick(self, at: int) -> None:
        """Record any phase boundary the clock has crossed."""
        with self._lock:
            self._advance_locked(at)

    def open_epoch(self, cfg: EpochConfig, at: int) -> Block:
        with self._lock:
            validate_epoch_config(cfg)
            return self._commit(KIND_OPEN_EPOCH, cfg.epoch_id, config_to_payload(cfg), at)

    def register_course(self, course: CourseOffering, at: int) -> Block:
        with self._lock:
            self._advance_locked(at)
            validate_course(course)
            ep = self.state.current()
            if ep is None:
                raise NoEpochError("no epoch open")
            return self._commit(
                KIND_REGISTER_COURSE, ep.config.epoch_id, course_to_payload(course), at
            )

    def register_catalog(self, courses: Sequence[CourseOffering], at: int) -> list[Block]:
        with self._lock:
            return [self.register_course(c, at) for c in courses]

    def declare(self, student_id: str, credits: int, at: int) -> Declaration:
        with self._lock:
            self._advance_locked(at)
            check_identifier(student_id, "student_id")
            if isinstance(credits, bool) or not isinstance(credits, int):
                raise BadIdentifierError("credits must be an integer")
            ep = self.state.current()
            if ep is None:
                raise NoEpochError("no epoch open")
            minted = mint_for(credits, ep.config.tokens_per_credit)
            payload = {
                "student_id": student_id,
                "declared_credits": credits,
                "minted_tokens": minted,
            }
            self._commit(KIND_DECLARE, ep.config.epoch_id, payload, at)
            return ep.declarations[student_id]

    def place_bid(self, student_id: str, course_id: str, amount: int, at: int) -> BidOutcome:
        """Record one bid attempt. Every attempt lands on the ledger, accepted
        or rejected; the outcome is returned, never silently dropped."""
        with self._lock:
            check_identifier(student_id, "student_id")
            check_identifier(course_id, "course_id")
            if isinstance(amount, bool) or not isinstance(amount, int):
                raise BadIdentifierError("amount must be an integer")
            self._advance_locked(at)
            reason = evaluate_bid(self.state, student_id, course_id, amount, at)
            accepted = reason == REASON_OK
            payload = {
                "student_id": student_id,
                "course_id": course_id,
                "amount": amount,
                "accepted": int(accepted),
                "reason": reason,
            }
            epoch_id = self.state.current_epoch_id or ""
            self._commit(KIND_BID, epoch_id, payload, at)
            return BidOutcome(
                accepted=accepted,
                reason=reason,
                balance=balance_of(self.state, student_id),
            )

    def run_settlement(self, at: int) -> settlement.AllocationResult:
        with self._lock:
            self._advance_locked(at)
            ep = self.state.current()
            if ep is None:
                raise PhaseError("no epoch open")
            if ep.phase == PHASE_SETTLED:
                raise PhaseError("epoch already settled")
            if at < ep.config.voting_close:
                raise PhaseError(f"voting open until {ep.config.voting_close}")
            result = settlement.allocate(settlement.instance_from_state(self.state))
            self._commit(KIND_SETTLEMENT, ep.config.epoch_id, result.to_payload(), at)
            return result

    # -- queries (immutable snapshots under the same lock)

    def current_phase(self, clock: int) -> str:
        with self._lock:
            if self.state.current() is None:
                raise NoEpochError("no epoch open")
            return phase_view(self.state, clock)

    def phase(self, clock: int) -> str:
        with self._lock:
            return phase_view(self.state, clock)

    def balance(self, student_id: str, epoch_id: str | None = None) -> int:
        with self._lock:
            return balance_of(self.state, student_id, epoch_id)

    def account_view(self, student_id: str) -> tuple[int, int, int]:
        """(minted, spent, remaining) for the current epoch; zeros if unknown."""
        with self._lock:
            ep = self.state.current()
            account = ep.accounts.get(student_id) if ep else None
            if account is None:
                return (0, 0, 0)
            return (account.minted, account.spent, account.remaining)

    def epoch_config(self) -> EpochConfig | None:
        with self._lock:
            ep = self.state.current()
            return ep.config if ep else None

    def course_rows(self) -> list[dict]:
        """Catalog joined with live effective-bid totals."""
        with self._lock:
            ep = self.state.current()
            if ep is None:
                return []
            totals = {cid: 0 for cid in ep.catalog}
            for (_student, cid), amount in ep.effective_bids.items():
                totals[cid] += amount
            return [
                {
                    "course_id": c.course_id,
                    "title": c.title,
                    "credits": c.credits,
                    "capacity": c.capacity,
                    "slots": slots_to_str(c.slots),
                    "total_tokens": totals[c.course_id],
                }
                for c in ep.catalog.values()
            ]

    def results(self) -> settlement.AllocationResult | None:
        with self._lock:
            ep = self.state.current()
            return ep.settlement if ep else None

    def declared_credits(self) -> dict[str, int]:
        with self._lock:
            ep = self.state.current()
            if ep is None:
                return {}
            return {s: d.declared_credits for s, d in ep.declarations.items()}
