"""Append-only, hash-chained transaction log.

Every state change in the system is one Transaction wrapped in one Block.
The block hash covers a canonical text encoding of the transaction together
with the previous block's hash, so altering any recorded byte afterwards is
detectable by re-verification. Blocks are stored one per line as JSON
(UTF-8, LF endings).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import CorruptLedgerError, BadIdentifierError, SeqGapError, TimeRegressionError

GENESIS_HASH = "0" * 64

KIND_OPEN_EPOCH = "OpenEpoch"
KIND_REGISTER_COURSE = "RegisterCourse"
KIND_DECLARE = "Declare"
KIND_BID = "Bid"
KIND_ADVANCE_PHASE = "AdvancePhase"
KIND_SETTLEMENT = "SettlementRecord"

TRANSACTION_KINDS = (
    KIND_OPEN_EPOCH,
    KIND_REGISTER_COURSE,
    KIND_DECLARE,
    KIND_BID,
    KIND_ADVANCE_PHASE,
    KIND_SETTLEMENT,
)

# Failure kinds reported by verification.
FAIL_HASH = "hash-mismatch"
FAIL_LINK = "link-break"
FAIL_SEQ = "seq-gap"
FAIL_MALFORMED = "malformed"

_BLOCK_KEYS = {"seq", "kind", "epoch_id", "timestamp", "payload", "prev_hash", "this_hash"}


@dataclass(frozen=True)
class Transaction:
    """One typed, timestamped command. The only way state ever changes."""

    seq: int
    kind: str
    epoch_id: str
    timestamp: int
    payload: Mapping[str, int | str]


@dataclass(frozen=True)
class Block:
    txn: Transaction
    prev_hash: str
    this_hash: str


@dataclass
class IntegrityReport:
    ok: bool
    index: int | None = None
    kind: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def check_encodable_text(value: str) -> str:
    """Reject strings that would be ambiguous inside the canonical encoding."""
    if "|" in value or ";" in value:
        raise BadIdentifierError(f"text may not contain '|' or ';': {value!r}")
    return value


def canonical_payload(payload: Mapping[str, int | str]) -> str:
    parts = []
    for name in sorted(payload):
        value = payload[name]
        check_encodable_text(name)
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            raise BadIdentifierError(f"payload field {name!r} must be int or str")
        if isinstance(value, str):
            check_encodable_text(value)
        parts.append(f"{name}={value}")
    return ";".join(parts)


def canonical_encoding(prev_hash: str, txn: Transaction) -> str:
    check_encodable_text(txn.kind)
    check_encodable_text(txn.epoch_id)
    return (
        f"{prev_hash}|{txn.seq}|{txn.kind}|{txn.epoch_id}|{txn.timestamp}|"
        f"{canonical_payload(txn.payload)}"
    )


def block_hash(prev_hash: str, txn: Transaction) -> str:
    encoded = canonical_encoding(prev_hash, txn).encode("utf-8")
    return hashlib.sha256(encoded).hexdigest()


def make_block(prev_hash: str, txn: Transaction) -> Block:
    return Block(txn=txn, prev_hash=prev_hash, this_hash=block_hash(prev_hash, txn))


class Chain:
    """In-memory block sequence with append-only discipline.

    Appends must be serialized by the caller; reads over the blocks tuple are
    safe against a snapshot because existing blocks are never mutated.
    """

    def __init__(self, blocks: Iterable[Block] = ()):
        self._blocks: list[Block] = list(blocks)

    def __len__(self) -> int:
        return len(self._blocks)

    @property
    def blocks(self) -> tuple[Block, ...]:
        return tuple(self._blocks)

    def tip_hash(self) -> str:
        return self._blocks[-1].this_hash if self._blocks else GENESIS_HASH

    def last_timestamp(self) -> int:
        return self._blocks[-1].txn.timestamp if self._blocks else 0

    def append(self, txn: Transaction) -> Block:
        if txn.seq != len(self._blocks):
            raise SeqGapError(f"expected seq {len(self._blocks)}, got {txn.seq}")
        if self._blocks and txn.timestamp < self._blocks[-1].txn.timestamp:
            raise TimeRegressionError(
                f"timestamp {txn.timestamp} precedes log tail {self._blocks[-1].txn.timestamp}"
            )
        block = make_block(self.tip_hash(), txn)
        self._blocks.append(block)
        return block


def verify_chain(blocks: Sequence[Block]) -> IntegrityReport:
    """Check hash and link integrity of a block sequence.

    Returns a failing report naming the first bad block; never raises on bad
    input.
    """
    prev = GENESIS_HASH
    for i, block in enumerate(blocks):
        if block.txn.seq != i:
            return IntegrityReport(False, i, FAIL_SEQ, f"block {i} carries seq {block.txn.seq}")
        if block.prev_hash != prev:
            return IntegrityReport(False, i, FAIL_LINK, f"block {i} does not link to block {i - 1}")
        try:
            expected = block_hash(block.prev_hash, block.txn)
        except BadIdentifierError as exc:
            return IntegrityReport(False, i, FAIL_MALFORMED, f"block {i} not encodable: {exc}")
        if expected != block.this_hash:
            return IntegrityReport(False, i, FAIL_HASH, f"block {i} hash does not recompute")
        prev = block.this_hash
    return IntegrityReport(True, detail=f"{len(blocks)} blocks verified")


# --- JSON Lines persistence ---------------------------------------------


def block_to_line(block: Block) -> str:
    obj = {
        "seq": block.txn.seq,
        "kind": block.txn.kind,
        "epoch_id": block.txn.epoch_id,
        "timestamp": block.txn.timestamp,
        "payload": dict(block.txn.payload),
        "prev_hash": block.prev_hash,
        "this_hash": block.this_hash,
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _is_hash(value: object) -> bool:
    return (
        isinstance(value, str)
        and len(value) == 64
        and all(c in "0123456789abcdef" for c in value)
    )


def parse_block_line(line: str | bytes) -> Block:
    """Parse one ledger line, strictly. Raises ValueError on any deviation."""
    if isinstance(line, bytes):
        line = line.decode("utf-8")
    obj = json.loads(line)
    if not isinstance(obj, dict) or set(obj) != _BLOCK_KEYS:
        raise ValueError("unexpected block structure")
    seq, timestamp = obj["seq"], obj["timestamp"]
    for v in (seq, timestamp):
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise ValueError("seq and timestamp must be non-negative integers")
    if not isinstance(obj["kind"], str) or not isinstance(obj["epoch_id"], str):
        raise ValueError("kind and epoch_id must be strings")
    if not _is_hash(obj["prev_hash"]) or not _is_hash(obj["this_hash"]):
        raise ValueError("hashes must be 64 lowercase hex characters")
    payload = obj["payload"]
    if not isinstance(payload, dict):
        raise ValueError("payload must be an object")
    for k, v in payload.items():
        if not isinstance(k, str):
            raise ValueError("payload field names must be strings")
        if isinstance(v, bool) or not isinstance(v, (int, str)):
            raise ValueError(f"payload field {k!r} must be int or str")
    txn = Transaction(
        seq=seq,
        kind=obj["kind"],
        epoch_id=obj["epoch_id"],
        timestamp=timestamp,
        payload=payload,
    )
    return Block(txn=txn, prev_hash=obj["prev_hash"], this_hash=obj["this_hash"])


def iter_ledger_lines(data: bytes) -> list[bytes]:
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    return lines


def load_ledger_lines(lines: Iterable[bytes | str]) -> list[Block]:
    """Parse ledger lines; raises CorruptLedgerError naming the 1-based line."""
    blocks = []
    for line_no, raw in enumerate(lines, start=1):
        try:
            blocks.append(parse_block_line(raw))
        except (ValueError, UnicodeDecodeError) as exc:
            raise CorruptLedgerError(
                f"line {line_no}: {exc}", index=line_no - 1, kind=FAIL_MALFORMED
            ) from exc
    return blocks


def load_ledger(path: str | Path) -> list[Block]:
    data = Path(path).read_bytes()
    return load_ledger_lines(iter_ledger_lines(data))


def verify_ledger_lines(lines: Iterable[bytes | str]) -> IntegrityReport:
    try:
        blocks = load_ledger_lines(lines)
    except CorruptLedgerError as exc:
        return IntegrityReport(False, exc.index, FAIL_MALFORMED, str(exc))
    return verify_chain(blocks)


def verify_ledger_file(path: str | Path) -> IntegrityReport:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        return IntegrityReport(False, None, FAIL_MALFORMED, str(exc))
    return verify_ledger_lines(iter_ledger_lines(data))


def write_ledger(path: str | Path, blocks: Sequence[Block]) -> None:
    text = "".join(block_to_line(b) + "\n" for b in blocks)
    Path(path).write_bytes(text.encode("utf-8"))
