"""Request/response models for the HTTP surface."""

from __future__ import annotations

from pydantic import BaseModel


class EpochIn(BaseModel):
    epoch_id: str
    tokens_per_credit: int
    declaration_open: int
    declaration_close: int
    voting_open: int
    voting_close: int
    min_declared_credits: int = 1
    max_declared_credits: int = 50


class CourseIn(BaseModel):
    course_id: str
    title: str
    credits: int
    capacity: int
    slots: str  # plus-joined, e.g. "Mon1+Wed3"


class DeclareIn(BaseModel):
    student_id: str
    credits: int


class BidIn(BaseModel):
    student_id: str
    course_id: str
    amount: int


class ClockIn(BaseModel):
    now: int


class AckOut(BaseModel):
    ok: bool = True
    epoch_id: str | None = None
    detail: str | None = None


class DeclareOut(BaseModel):
    student_id: str
    epoch_id: str
    declared_credits: int
    minted_tokens: int
    balance: int


class BidOut(BaseModel):
    accepted: bool
    reason: str
    balance: int


class PhaseOut(BaseModel):
    phase: str
    now: int
    epoch_id: str | None
    voting_open: int | None
    voting_close: int | None


class CourseRow(BaseModel):
    course_id: str
    title: str
    credits: int
    capacity: int
    slots: str
    total_tokens: int


class BalanceOut(BaseModel):
    student_id: str
    epoch_id: str | None
    minted: int
    spent: int
    remaining: int


class AwardOut(BaseModel):
    student_id: str
    course_id: str
    round: str


class ResultsOut(BaseModel):
    epoch_id: str
    awards: list[AwardOut]
    per_student_credits: dict[str, int]
    declared_credits: dict[str, int]
    unfilled: dict[str, int]
