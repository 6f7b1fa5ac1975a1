"""Token-voting course selection over an append-only hash-chained ledger.

Students declare credits, receive epoch-scoped tokens in exact proportion,
bid them on courses during a timed voting window, and a deterministic
settlement ranks bidders per course and fills remaining shortfalls. Every
state change is one transaction in one hash-chained block; system state is
the pure replay of the log.
"""

from .engine import (
    BidOutcome,
    LedgerState,
    PHASE_AWAITING_SETTLEMENT,
    PHASE_PREPARATION,
    PHASE_SETTLED,
    PHASE_UNOPENED,
    PHASE_VOTING,
    VotingEngine,
    phase_view,
    replay,
)
from .errors import SeatbidError
from .ledger import (
    Block,
    Chain,
    GENESIS_HASH,
    IntegrityReport,
    Transaction,
    load_ledger,
    verify_chain,
    verify_ledger_file,
    write_ledger,
)
from .registrar import CourseOffering, Declaration, EpochConfig, MeetingSlot, TokenAccount
from .settlement import (
    AllocationResult,
    Award,
    SettlementInstance,
    allocate,
    allocate_primary,
    complete_with_fallback,
    fcfs_allocate,
    settle,
    tie_key,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationResult",
    "Award",
    "BidOutcome",
    "Block",
    "Chain",
    "CourseOffering",
    "Declaration",
    "EpochConfig",
    "GENESIS_HASH",
    "IntegrityReport",
    "LedgerState",
    "MeetingSlot",
    "PHASE_AWAITING_SETTLEMENT",
    "PHASE_PREPARATION",
    "PHASE_SETTLED",
    "PHASE_UNOPENED",
    "PHASE_VOTING",
    "SeatbidError",
    "SettlementInstance",
    "TokenAccount",
    "Transaction",
    "VotingEngine",
    "allocate",
    "allocate_primary",
    "complete_with_fallback",
    "fcfs_allocate",
    "load_ledger",
    "phase_view",
    "replay",
    "settle",
    "tie_key",
    "verify_chain",
    "verify_ledger_file",
    "write_ledger",
]
