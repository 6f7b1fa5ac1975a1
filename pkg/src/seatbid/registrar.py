"""Epoch lifecycle data: configuration, course catalog, declarations, token
accounts.

Tokens are minted exactly as declared_credits * tokens_per_credit and are
scoped to a single epoch; nothing here carries over between epochs.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from typing import Mapping

from .errors import BadConfigError, BadIdentifierError

DAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
_DAY_INDEX = {d: i for i, d in enumerate(DAYS)}
PERIOD_MIN, PERIOD_MAX = 1, 12

# Identifiers travel through the canonical block encoding, the flat
# settlement record, scenario files and CSV exports, so keep them to a
# conservative token alphabet.
_IDENT_RE = re.compile(r"^[A-Za-z0-9_.-]+$")

CATALOG_HEADER = ["course_id", "title", "credits", "capacity", "slots"]


def check_identifier(value: str, what: str = "identifier") -> str:
    if not isinstance(value, str) or not _IDENT_RE.match(value):
        raise BadIdentifierError(
            f"{what} must be non-empty and limited to letters, digits, '_', '.', '-': {value!r}"
        )
    return value


def check_title(value: str) -> str:
    if not isinstance(value, str) or not value:
        raise BadIdentifierError("title must be a non-empty string")
    if any(c in value for c in "|;,\n\r\t"):
        raise BadIdentifierError(f"title contains reserved characters: {value!r}")
    return value


@dataclass(frozen=True)
class MeetingSlot:
    """One weekly meeting; two slots conflict iff they are equal."""

    day: str
    period: int


def parse_slot(token: str) -> MeetingSlot:
    day, rest = token[:3], token[3:]
    if day not in _DAY_INDEX or not rest.isdigit():
        raise BadIdentifierError(f"bad slot token {token!r} (expected e.g. Mon1)")
    period = int(rest)
    if not PERIOD_MIN <= period <= PERIOD_MAX:
        raise BadIdentifierError(f"slot period out of range 1..12: {token!r}")
    return MeetingSlot(day=day, period=period)


def parse_slots(text: str) -> frozenset[MeetingSlot]:
    """Parse a plus-joined slot list such as ``Mon1+Wed3``."""
    if not text:
        raise BadIdentifierError("slots must not be empty")
    return frozenset(parse_slot(tok) for tok in text.split("+"))


def slots_to_str(slots: frozenset[MeetingSlot]) -> str:
    ordered = sorted(slots, key=lambda s: (_DAY_INDEX[s.day], s.period))
    return "+".join(f"{s.day}{s.period}" for s in ordered)


@dataclass(frozen=True)
class CourseOffering:
    course_id: str
    title: str
    credits: int
    capacity: int
    slots: frozenset[MeetingSlot]


def validate_course(course: CourseOffering) -> CourseOffering:
    check_identifier(course.course_id, "course_id")
    check_title(course.title)
    if course.credits < 1:
        raise BadConfigError(f"course {course.course_id}: credits must be >= 1")
    if course.capacity < 1:
        raise BadConfigError(f"course {course.course_id}: capacity must be >= 1")
    if not course.slots:
        raise BadConfigError(f"course {course.course_id}: at least one meeting slot required")
    return course


def course_to_payload(course: CourseOffering) -> dict[str, int | str]:
    return {
        "course_id": course.course_id,
        "title": course.title,
        "credits": course.credits,
        "capacity": course.capacity,
        "slots": slots_to_str(course.slots),
    }


def course_from_payload(payload: Mapping[str, int | str]) -> CourseOffering:
    return CourseOffering(
        course_id=str(payload["course_id"]),
        title=str(payload["title"]),
        credits=int(payload["credits"]),
        capacity=int(payload["capacity"]),
        slots=parse_slots(str(payload["slots"])),
    )


@dataclass(frozen=True)
class EpochConfig:
    """One semester's selection round: token rate, windows, credit bounds."""

    epoch_id: str
    tokens_per_credit: int
    declaration_open: int
    declaration_close: int
    voting_open: int
    voting_close: int
    min_declared_credits: int = 1
    max_declared_credits: int = 50


def validate_epoch_config(cfg: EpochConfig) -> EpochConfig:
    check_identifier(cfg.epoch_id, "epoch_id")
    for name in (
        "tokens_per_credit",
        "declaration_open",
        "declaration_close",
        "voting_open",
        "voting_close",
        "min_declared_credits",
        "max_declared_credits",
    ):
        value = getattr(cfg, name)
        if isinstance(value, bool) or not isinstance(value, int):
            raise BadConfigError(f"{name} must be an integer")
        if value < 0:
            raise BadConfigError(f"{name} must be non-negative")
    if not (cfg.declaration_open < cfg.declaration_close <= cfg.voting_open < cfg.voting_close):
        raise BadConfigError(
            "windows must satisfy declaration_open < declaration_close "
            "<= voting_open < voting_close"
        )
    if not (0 < cfg.min_declared_credits <= cfg.max_declared_credits):
        raise BadConfigError("credit bounds must satisfy 0 < min <= max")
    if cfg.tokens_per_credit < 1:
        raise BadConfigError("tokens_per_credit must be >= 1")
    return cfg


def config_to_payload(cfg: EpochConfig) -> dict[str, int | str]:
    return {
        "tokens_per_credit": cfg.tokens_per_credit,
        "declaration_open": cfg.declaration_open,
        "declaration_close": cfg.declaration_close,
        "voting_open": cfg.voting_open,
        "voting_close": cfg.voting_close,
        "min_declared_credits": cfg.min_declared_credits,
        "max_declared_credits": cfg.max_declared_credits,
    }


def config_from_payload(epoch_id: str, payload: Mapping[str, int | str]) -> EpochConfig:
    return EpochConfig(
        epoch_id=epoch_id,
        tokens_per_credit=int(payload["tokens_per_credit"]),
        declaration_open=int(payload["declaration_open"]),
        declaration_close=int(payload["declaration_close"]),
        voting_open=int(payload["voting_open"]),
        voting_close=int(payload["voting_close"]),
        min_declared_credits=int(payload["min_declared_credits"]),
        max_declared_credits=int(payload["max_declared_credits"]),
    )


@dataclass(frozen=True)
class Declaration:
    student_id: str
    epoch_id: str
    declared_credits: int
    minted_tokens: int


def mint_for(credits: int, tokens_per_credit: int) -> int:
    # Exact by construction: both factors are integers, no rounding exists.
    return credits * tokens_per_credit


@dataclass
class TokenAccount:
    student_id: str
    epoch_id: str
    minted: int = 0
    spent: int = 0

    @property
    def remaining(self) -> int:
        return self.minted - self.spent


def parse_catalog_csv(text: str) -> list[CourseOffering]:
    """Parse a catalog import: header ``course_id,title,credits,capacity,slots``,
    slots plus-joined like ``Mon1+Wed3``."""
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows or rows[0] != CATALOG_HEADER:
        raise BadConfigError(f"catalog CSV must start with header {','.join(CATALOG_HEADER)}")
    courses = []
    seen: set[str] = set()
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != 5:
            raise BadConfigError(f"catalog CSV row {line_no}: expected 5 columns")
        course_id, title, credits, capacity, slots = row
        if not credits.isdigit() or not capacity.isdigit():
            raise BadConfigError(f"catalog CSV row {line_no}: credits/capacity must be integers")
        course = validate_course(
            CourseOffering(
                course_id=course_id,
                title=title,
                credits=int(credits),
                capacity=int(capacity),
                slots=parse_slots(slots),
            )
        )
        if course.course_id in seen:
            raise BadConfigError(f"catalog CSV row {line_no}: duplicate course {course.course_id}")
        seen.add(course.course_id)
        courses.append(course)
    return courses
