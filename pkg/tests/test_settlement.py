import pytest

from helpers import (
    S1_BIDS,
    S1_COURSES,
    S1_EPOCH,
    S1_EXPECTED_AWARDS,
    build_s1_engine,
    instance_to_oracle,
    result_to_sets,
)
from oracle import reference_allocate, reference_fcfs
from seatbid.errors import BadIdentifierError, NotClosedError
from seatbid.registrar import CourseOffering, parse_slots
from seatbid.settlement import (
    AllocationResult,
    SettlementInstance,
    allocate,
    allocate_primary,
    complete_with_fallback,
    course_standings,
    fcfs_allocate,
    instance_from_state,
    results_csv,
    settle,
    summary_csv,
    tie_key,
)


def s1_instance():
    eff = {}
    for s, c, a in S1_BIDS:
        eff[(s, c)] = eff.get((s, c), 0) + a
    return SettlementInstance(
        epoch_id=S1_EPOCH,
        courses=tuple(S1_COURSES),
        declared={"A": 4, "B": 4, "C": 2},
        bids=eff,
        arrivals=tuple(S1_BIDS),
    )


class TestTieKey:
    def test_deterministic(self):
        assert tie_key("E", "C", "S") == tie_key("E", "C", "S")

    def test_distinct_students_distinct_digests(self):
        a = tie_key("Spring2023", "CS101", "A")
        b = tie_key("Spring2023", "CS101", "B")
        assert a != b
        assert len(a) == 64 and set(a) <= set("0123456789abcdef")

    def test_pipe_rejected(self):
        with pytest.raises(BadIdentifierError):
            tie_key("E|1", "C", "S")

    def test_empty_rejected(self):
        with pytest.raises(BadIdentifierError):
            tie_key("E", "", "S")


class TestOracleAgreesOnS1:
    """Freeze the S1 expectations by recomputing them with the oracle."""

    def test_oracle_confirms_frozen_expectations(self):
        inst = s1_instance()
        courses, declared, bids = instance_to_oracle(inst)
        expected = reference_allocate(S1_EPOCH, courses, declared, bids)
        assert expected["primary"] == {("B", "CS101"), ("A", "MA201"), ("C", "MA201")}
        assert expected["fallback"] == {("A", "PH101"), ("B", "PH101")}
        frozen = {(s, c, "primary") for s, c in expected["primary"]}
        frozen |= {(s, c, "fallback") for s, c in expected["fallback"]}
        assert frozen == S1_EXPECTED_AWARDS


class TestPrimaryRound:
    def test_s1_course_order_and_awards(self):
        inst = s1_instance()
        standings = course_standings(inst)
        assert [(st.course_id, st.total_tokens) for st in standings] == [
            ("CS101", 55),
            ("MA201", 45),
            ("PH101", 0),
        ]
        assert standings[0].ranked_bidders == (("B", 30), ("A", 25))
        primary = allocate_primary(inst)
        assert primary.awards_by_round("primary") == {
            ("B", "CS101"),
            ("A", "MA201"),
            ("C", "MA201"),
        }
        assert primary.unfilled == {"CS101": 0, "MA201": 0, "PH101": 2}

    def test_equal_bids_break_by_tie_key(self):
        course = CourseOffering("C1", "T", 2, 1, parse_slots("Mon1"))
        inst = SettlementInstance(
            epoch_id="E",
            courses=(course,),
            declared={"A": 2, "B": 2},
            bids={("A", "C1"): 20, ("B", "C1"): 20},
        )
        winner_expected = min(["A", "B"], key=lambda s: tie_key("E", "C1", s))
        result = allocate_primary(inst)
        assert result.awards_by_round("primary") == {(winner_expected, "C1")}
        # Swapping insertion order changes nothing.
        swapped = SettlementInstance(
            epoch_id="E",
            courses=(course,),
            declared={"B": 2, "A": 2},
            bids={("B", "C1"): 20, ("A", "C1"): 20},
        )
        assert allocate_primary(swapped) == result

    def test_no_bids_leaves_full_capacity(self):
        inst = SettlementInstance(
            epoch_id="E", courses=tuple(S1_COURSES), declared={"A": 4}, bids={}
        )
        result = allocate_primary(inst)
        assert result.awards == ()
        assert result.unfilled == {"CS101": 1, "MA201": 2, "PH101": 2}


class TestFallback:
    def test_s1_fallback_fills_both(self):
        inst = s1_instance()
        result = complete_with_fallback(inst, allocate_primary(inst))
        assert result.awards_by_round("fallback") == {("A", "PH101"), ("B", "PH101")}
        assert result.per_student_credits == {"A": 4, "B": 4, "C": 2}
        assert result.unfilled == {"CS101": 0, "MA201": 0, "PH101": 0}

    def test_conflicting_only_option_reports_shortfall(self):
        c1 = CourseOffering("C1", "T", 2, 1, parse_slots("Mon1"))
        c2 = CourseOffering("C2", "T", 2, 1, parse_slots("Mon1"))  # same slot
        inst = SettlementInstance(
            epoch_id="E",
            courses=(c1, c2),
            declared={"A": 4},
            bids={("A", "C1"): 10},
        )
        result = allocate(inst)
        assert result.awards_by_round("primary") == {("A", "C1")}
        assert result.awards_by_round("fallback") == set()
        assert result.per_student_credits["A"] == 2  # shortfall of 2

    def test_everyone_satisfied_is_identity(self):
        course = CourseOffering("C1", "T", 2, 2, parse_slots("Mon1"))
        inst = SettlementInstance(
            epoch_id="E",
            courses=(course,),
            declared={"A": 2},
            bids={("A", "C1"): 5},
        )
        primary = allocate_primary(inst)
        assert complete_with_fallback(inst, primary).awards == primary.awards

    def test_fallback_never_duplicates_lost_course_without_seats(self):
        # Student lost C1 on capacity; fallback must not hand C1 back.
        c1 = CourseOffering("C1", "T", 2, 1, parse_slots("Mon1"))
        inst = SettlementInstance(
            epoch_id="E",
            courses=(c1,),
            declared={"A": 2, "B": 2},
            bids={("A", "C1"): 30, ("B", "C1"): 10},
        )
        result = allocate(inst)
        assert result.awards_by_round("primary") == {("A", "C1")}
        assert result.per_student_credits["B"] == 0


class TestFcfs:
    def test_arrival_order_wins_regardless_of_amount(self):
        inst = s1_instance()  # A's CS101 bid (25) arrives before B's (30)
        result = fcfs_allocate(inst)
        assert ("A", "CS101") in result.awards_by_round("primary")
        assert ("B", "CS101") not in result.awards_by_round("primary")

    def test_matches_reference(self):
        inst = s1_instance()
        courses, declared, _ = instance_to_oracle(inst)
        ref = reference_fcfs(courses, declared, list(inst.arrivals))
        assert result_to_sets(fcfs_allocate(inst))["primary"] == ref["awards"]

    def test_differs_from_token_settlement_on_s1(self):
        inst = s1_instance()
        token = allocate(inst)
        fcfs = fcfs_allocate(inst)
        assert ("B", "CS101") in token.awards_by_round("primary")
        assert ("A", "CS101") in fcfs.awards_by_round("primary")


class TestStateLevelOps:
    def test_settle_requires_closed_window(self):
        engine = build_s1_engine(settle=False)
        with pytest.raises(NotClosedError):
            settle(engine.state, now=1500)
        result = settle(engine.state, now=2000)
        assert result.awards_by_round("primary") == {
            ("B", "CS101"),
            ("A", "MA201"),
            ("C", "MA201"),
        }

    def test_instance_from_state_carries_arrivals(self):
        engine = build_s1_engine(settle=False)
        inst = instance_from_state(engine.state)
        assert inst.arrivals == tuple(S1_BIDS)


class TestResultEncoding:
    def test_payload_round_trip(self):
        result = allocate(s1_instance())
        payload = result.to_payload()
        back = AllocationResult.from_payload(S1_EPOCH, payload)
        assert back == result

    def test_results_csv(self):
        inst = s1_instance()
        text = results_csv(inst, allocate(inst))
        lines = text.strip().split("\n")
        assert lines[0] == "student_id,course_id,round,credits"
        rows = {tuple(line.split(",")) for line in lines[1:]}
        assert rows == {
            ("B", "CS101", "primary", "2"),
            ("A", "MA201", "primary", "2"),
            ("C", "MA201", "primary", "2"),
            ("A", "PH101", "fallback", "2"),
            ("B", "PH101", "fallback", "2"),
        }

    def test_summary_csv(self):
        inst = s1_instance()
        text = summary_csv(inst, allocate(inst))
        assert text.strip().split("\n") == [
            "course_id,total_tokens,seats_filled,capacity",
            "CS101,55,1,1",
            "MA201,45,2,2",
            "PH101,0,2,2",
        ]
