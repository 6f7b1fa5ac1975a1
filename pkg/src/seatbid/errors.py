"""Exception types shared across the package."""


class SeatbidError(Exception):
    """Base class for every domain error raised by this package."""


class SeqGapError(SeatbidError):
    """Transaction sequence number does not continue the log."""


class TimeRegressionError(SeatbidError):
    """Transaction timestamp is earlier than the log tail."""


class CorruptLedgerError(SeatbidError):
    """Ledger bytes fail parsing or chain verification."""

    def __init__(self, message: str, index: int | None = None, kind: str | None = None):
        super().__init__(message)
        self.index = index
        self.kind = kind


class InvalidTransitionError(SeatbidError):
    """A logged transaction violates engine rules; the log was not produced
    by this engine."""


class EpochActiveError(SeatbidError):
    """An epoch is already open and not yet settled."""


class BadConfigError(SeatbidError):
    """Epoch configuration violates window ordering or bounds."""


class PhaseError(SeatbidError):
    """Operation attempted outside its phase window."""


class DuplicateCourseError(SeatbidError):
    """Course id already registered in the active epoch."""


class CreditBoundsError(SeatbidError):
    """Declared credits fall outside the epoch's configured bounds."""


class AlreadyDeclaredError(SeatbidError):
    """Student already holds a declaration for this epoch."""


class NoEpochError(SeatbidError):
    """No epoch is open."""


class BadIdentifierError(SeatbidError):
    """Identifier or text contains characters the ledger encoding reserves."""


class NotClosedError(SeatbidError):
    """Settlement requested while the voting window is still open."""


class ScenarioError(SeatbidError):
    """Scenario script problem, carrying the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
