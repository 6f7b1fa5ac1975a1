"""Scripted end-to-end runs with a deterministic clock.

Scenario files are line-oriented and hand-writable: one event per line,
``<at> <action> key=value ...``, blank lines and ``#`` comments ignored.
Runs are bit-deterministic; the same script always yields the same ledger
bytes and the same CSVs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from . import settlement
from .engine import VotingEngine
from .errors import ScenarioError, SeatbidError
from .ledger import Block, block_to_line
from .registrar import CourseOffering, EpochConfig, parse_slots

ACTIONS = ("open_epoch", "register_course", "declare", "bid", "settle")

_REQUIRED_ARGS = {
    "open_epoch": {
        "epoch_id",
        "tokens_per_credit",
        "declaration_open",
        "declaration_close",
        "voting_open",
        "voting_close",
        "min_declared_credits",
        "max_declared_credits",
    },
    "register_course": {"course_id", "title", "credits", "capacity", "slots"},
    "declare": {"student_id", "credits"},
    "bid": {"student_id", "course_id", "amount"},
    "settle": set(),
}

_INT_ARGS = {
    "tokens_per_credit",
    "declaration_open",
    "declaration_close",
    "voting_open",
    "voting_close",
    "min_declared_credits",
    "max_declared_credits",
    "credits",
    "capacity",
    "amount",
}


@dataclass(frozen=True)
class ScenarioEvent:
    at: int
    action: str
    args: dict[str, int | str]
    line_no: int


@dataclass
class ScenarioOutcome:
    engine: VotingEngine
    blocks: list[Block]
    result: settlement.AllocationResult | None
    instance: settlement.SettlementInstance | None

    def ledger_text(self) -> str:
        return "".join(block_to_line(b) + "\n" for b in self.blocks)


def parse_scenario(text: str) -> list[ScenarioEvent]:
    events: list[ScenarioEvent] = []
    open_seen = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise ScenarioError(line_no, "expected '<at> <action> [key=value ...]'")
        at_text, action, *arg_tokens = parts
        try:
            at = int(at_text)
        except ValueError:
            raise ScenarioError(line_no, f"event time must be an integer, got {at_text!r}") from None
        if at < 0:
            raise ScenarioError(line_no, "event time must be non-negative")
        if action not in ACTIONS:
            raise ScenarioError(line_no, f"unknown action {action!r}")

        args: dict[str, int | str] = {}
        for token in arg_tokens:
            if "=" not in token:
                raise ScenarioError(line_no, f"expected key=value, got {token!r}")
            key, value = token.split("=", 1)
            if key in args:
                raise ScenarioError(line_no, f"duplicate argument {key!r}")
            if key in _INT_ARGS:
                try:
                    args[key] = int(value)
                except ValueError:
                    raise ScenarioError(line_no, f"{key} must be an integer, got {value!r}") from None
            else:
                args[key] = value
        missing = _REQUIRED_ARGS[action] - set(args)
        extra = set(args) - _REQUIRED_ARGS[action]
        if missing:
            raise ScenarioError(line_no, f"{action} missing arguments: {', '.join(sorted(missing))}")
        if extra:
            raise ScenarioError(line_no, f"{action} got unexpected arguments: {', '.join(sorted(extra))}")

        if events and at < events[-1].at:
            raise ScenarioError(line_no, "events must be sorted by time")
        if events and events[-1].action == "settle":
            raise ScenarioError(line_no, "settle must be the last event")
        if action == "open_epoch":
            if open_seen:
                raise ScenarioError(line_no, "at most one open_epoch per scenario")
            open_seen = True
        events.append(ScenarioEvent(at=at, action=action, args=args, line_no=line_no))
    return events


def parse_scenario_file(path: str | Path) -> list[ScenarioEvent]:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def run_scenario(events: list[ScenarioEvent]) -> ScenarioOutcome:
    """Drive a fresh engine through the script.

    Bid rejections are part of the record and do not abort the run; any other
    engine rule violation does, tagged with the script line.
    """
    blocks: list[Block] = []
    engine = VotingEngine(sink=blocks.append)
    result = None
    instance = None
    for event in events:
        try:
            if event.action == "open_epoch":
                cfg = EpochConfig(
                    epoch_id=str(event.args["epoch_id"]),
                    tokens_per_credit=int(event.args["tokens_per_credit"]),
                    declaration_open=int(event.args["declaration_open"]),
                    declaration_close=int(event.args["declaration_close"]),
                    voting_open=int(event.args["voting_open"]),
                    voting_close=int(event.args["voting_close"]),
                    min_declared_credits=int(event.args["min_declared_credits"]),
                    max_declared_credits=int(event.args["max_declared_credits"]),
                )
                engine.open_epoch(cfg, at=event.at)
            elif event.action == "register_course":
                course = CourseOffering(
                    course_id=str(event.args["course_id"]),
                    title=str(event.args["title"]),
                    credits=int(event.args["credits"]),
                    capacity=int(event.args["capacity"]),
                    slots=parse_slots(str(event.args["slots"])),
                )
                engine.register_course(course, at=event.at)
            elif event.action == "declare":
                engine.declare(str(event.args["student_id"]), int(event.args["credits"]), at=event.at)
            elif event.action == "bid":
                engine.place_bid(
                    str(event.args["student_id"]),
                    str(event.args["course_id"]),
                    int(event.args["amount"]),
                    at=event.at,
                )
            elif event.action == "settle":
                instance = settlement.instance_from_state(engine.state)
                result = engine.run_settlement(at=event.at)
        except ScenarioError:
            raise
        except SeatbidError as exc:
            raise ScenarioError(event.line_no, f"{event.action}: {exc}") from exc
    return ScenarioOutcome(engine=engine, blocks=blocks, result=result, instance=instance)


def write_bundle(outcome: ScenarioOutcome, out_dir: str | Path) -> dict[str, Path]:
    """Write ledger + result CSVs; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    ledger_path = out / "ledger.jsonl"
    ledger_path.write_bytes(outcome.ledger_text().encode("utf-8"))
    paths["ledger"] = ledger_path

    if outcome.result is not None and outcome.instance is not None:
        results_path = out / "results.csv"
        results_path.write_text(
            settlement.results_csv(outcome.instance, outcome.result), encoding="utf-8"
        )
        paths["results"] = results_path

        summary_path = out / "summary.csv"
        summary_path.write_text(
            settlement.summary_csv(outcome.instance, outcome.result), encoding="utf-8"
        )
        paths["summary"] = summary_path
    return paths
