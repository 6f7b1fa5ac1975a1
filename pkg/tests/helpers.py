"""Shared fixtures helpers: Scenario S1 builders, random instance generation,
and adapters between the package's settlement instances and the oracle's
plain-dict shape."""

import random

from seatbid.engine import VotingEngine
from seatbid.registrar import CourseOffering, EpochConfig, MeetingSlot, parse_slots
from seatbid.settlement import SettlementInstance

S1_EPOCH = "Spring2023"

S1_CONFIG = EpochConfig(
    epoch_id=S1_EPOCH,
    tokens_per_credit=10,
    declaration_open=0,
    declaration_close=1000,
    voting_open=1000,
    voting_close=2000,
    min_declared_credits=1,
    max_declared_credits=10,
)

S1_COURSES = [
    CourseOffering("CS101", "Intro_Programming", 2, 1, parse_slots("Mon1")),
    CourseOffering("MA201", "Linear_Algebra", 2, 2, parse_slots("Tue1")),
    CourseOffering("PH101", "Mechanics", 2, 2, parse_slots("Wed1")),
]

S1_DECLARATIONS = [("A", 4), ("B", 4), ("C", 2)]

# Arrival order matters for the FCFS contrast: A's CS101 bid comes first.
S1_BIDS = [
    ("A", "CS101", 25),
    ("A", "MA201", 15),
    ("B", "CS101", 30),
    ("B", "MA201", 10),
    ("C", "MA201", 20),
]

# Frozen from the independent oracle before the engine was built.
S1_EXPECTED_AWARDS = {
    ("B", "CS101", "primary"),
    ("A", "MA201", "primary"),
    ("C", "MA201", "primary"),
    ("A", "PH101", "fallback"),
    ("B", "PH101", "fallback"),
}

S1_SCRIPT = """\
# Scenario S1: three courses, three students, one contested seat
0 open_epoch epoch_id=Spring2023 tokens_per_credit=10 declaration_open=0 declaration_close=1000 voting_open=1000 voting_close=2000 min_declared_credits=1 max_declared_credits=10
10 register_course course_id=CS101 title=Intro_Programming credits=2 capacity=1 slots=Mon1
20 register_course course_id=MA201 title=Linear_Algebra credits=2 capacity=2 slots=Tue1
30 register_course course_id=PH101 title=Mechanics credits=2 capacity=2 slots=Wed1
100 declare student_id=A credits=4
110 declare student_id=B credits=4
120 declare student_id=C credits=2
1100 bid student_id=A course_id=CS101 amount=25
1110 bid student_id=A course_id=MA201 amount=15
1120 bid student_id=B course_id=CS101 amount=30
1130 bid student_id=B course_id=MA201 amount=10
1140 bid student_id=C course_id=MA201 amount=20
2000 settle
"""


def build_s1_engine(pad_to_blocks=None, sink=None, settle=True):
    """Drive a fresh engine through Scenario S1.

    pad_to_blocks inserts rejected bids (no state change) before settlement
    until the final ledger reaches exactly that many blocks.
    """
    engine = VotingEngine(sink=sink)
    engine.open_epoch(S1_CONFIG, at=0)
    for i, course in enumerate(S1_COURSES):
        engine.register_course(course, at=10 + 10 * i)
    for i, (student, credits) in enumerate(S1_DECLARATIONS):
        engine.declare(student, credits, at=100 + 10 * i)
    at = 1100
    for student, course_id, amount in S1_BIDS:
        engine.place_bid(student, course_id, amount, at=at)
        at += 10
    if pad_to_blocks is not None:
        # base blocks so far + 1 settlement block at the end
        missing = pad_to_blocks - len(engine.chain) - (1 if settle else 0)
        assert missing >= 0, "pad_to_blocks smaller than the base scenario"
        for _ in range(missing):
            outcome = engine.place_bid("A", "CS101", 999, at=at)
            assert not outcome.accepted  # A's tokens are exhausted
            at += 1
    if settle:
        engine.run_settlement(at=2000)
    return engine


def random_instance(seed):
    """Small random allocation instance within the acceptance envelope:
    <= 8 students, <= 6 courses, capacity <= 3, <= 5 accepted bids/student."""
    rng = random.Random(seed)
    epoch_id = f"E{seed}"
    n_students = rng.randint(1, 8)
    n_courses = rng.randint(1, 6)
    students = [f"s{i}" for i in range(n_students)]
    rate = rng.choice([1, 5, 10])

    # A cramped slot pool makes conflicts common.
    slot_pool = [("Mon", 1), ("Mon", 2), ("Tue", 1), ("Tue", 2), ("Wed", 1)]
    courses = []
    for i in range(n_courses):
        n_slots = rng.randint(1, 2)
        slots = frozenset(
            MeetingSlot(day, period) for day, period in rng.sample(slot_pool, n_slots)
        )
        courses.append(
            CourseOffering(
                course_id=f"c{i}",
                title=f"Course_{i}",
                credits=rng.randint(1, 4),
                capacity=rng.randint(1, 3),
                slots=slots,
            )
        )

    declared = {s: rng.randint(1, 9) for s in students}
    minted = {s: declared[s] * rate for s in students}

    bids = []
    for s in students:
        budget = minted[s]
        for _ in range(rng.randint(0, 5)):
            if budget < 1:
                break
            amount = rng.randint(1, budget)
            budget -= amount
            bids.append((s, rng.choice(courses).course_id, amount))
    rng.shuffle(bids)

    return SettlementInstance(
        epoch_id=epoch_id,
        courses=tuple(courses),
        declared=declared,
        bids=_effective(bids),
        arrivals=tuple(bids),
    )


def _effective(bids):
    eff = {}
    for s, c, a in bids:
        eff[(s, c)] = eff.get((s, c), 0) + a
    return eff


def instance_to_oracle(inst):
    """Convert a SettlementInstance into the oracle's plain-dict shape."""
    courses = [
        {
            "course_id": c.course_id,
            "credits": c.credits,
            "capacity": c.capacity,
            "slots": {(slot.day, slot.period) for slot in c.slots},
        }
        for c in inst.courses
    ]
    bids = [(s, c, a) for (s, c), a in inst.bids.items()]
    return courses, dict(inst.declared), bids


def result_to_sets(result):
    """Normalize an AllocationResult for comparison against the oracle."""
    return {
        "primary": result.awards_by_round("primary"),
        "fallback": result.awards_by_round("fallback"),
        "credits": dict(result.per_student_credits),
        "unfilled": dict(result.unfilled),
    }
