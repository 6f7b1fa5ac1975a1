import pytest

from seatbid.errors import BadConfigError, BadIdentifierError
from seatbid.registrar import (
    CourseOffering,
    EpochConfig,
    MeetingSlot,
    mint_for,
    parse_catalog_csv,
    parse_slots,
    slots_to_str,
    validate_course,
    validate_epoch_config,
)


class TestSlots:
    def test_parse_plus_joined(self):
        assert parse_slots("Mon1+Wed3") == frozenset(
            {MeetingSlot("Mon", 1), MeetingSlot("Wed", 3)}
        )

    def test_round_trip_canonical_order(self):
        assert slots_to_str(parse_slots("Wed3+Mon1")) == "Mon1+Wed3"

    @pytest.mark.parametrize("bad", ["", "Mon0", "Mon13", "Xyz1", "Mon", "1Mon"])
    def test_bad_tokens_rejected(self, bad):
        with pytest.raises(BadIdentifierError):
            parse_slots(bad)

    def test_conflict_is_equality(self):
        assert MeetingSlot("Mon", 1) == MeetingSlot("Mon", 1)
        assert MeetingSlot("Mon", 1) != MeetingSlot("Mon", 2)


class TestEpochConfig:
    def good(self, **kw):
        base = dict(
            epoch_id="Spring2023",
            tokens_per_credit=10,
            declaration_open=0,
            declaration_close=1000,
            voting_open=1000,
            voting_close=2000,
            min_declared_credits=1,
            max_declared_credits=10,
        )
        base.update(kw)
        return EpochConfig(**base)

    def test_valid(self):
        validate_epoch_config(self.good())

    def test_window_order_enforced(self):
        with pytest.raises(BadConfigError):
            validate_epoch_config(self.good(voting_open=2500))

    def test_declaration_must_precede_voting(self):
        with pytest.raises(BadConfigError):
            validate_epoch_config(self.good(declaration_close=1500, voting_open=1400))

    def test_credit_bounds(self):
        with pytest.raises(BadConfigError):
            validate_epoch_config(self.good(min_declared_credits=5, max_declared_credits=4))

    def test_rate_positive(self):
        with pytest.raises(BadConfigError):
            validate_epoch_config(self.good(tokens_per_credit=0))

    def test_epoch_id_charset(self):
        with pytest.raises(BadIdentifierError):
            validate_epoch_config(self.good(epoch_id="Spring|2023"))


class TestMinting:
    def test_exact_multiplication(self):
        assert mint_for(18, 10) == 180
        assert mint_for(4, 10) == 40

    def test_no_rounding_exists(self):
        # Integers in, integer out; 7 credits at rate 3 is exactly 21.
        assert mint_for(7, 3) == 21


class TestCatalogCsv:
    HEADER = "course_id,title,credits,capacity,slots\n"

    def test_import(self):
        text = self.HEADER + "CS101,Intro to CS,2,30,Mon1+Wed3\nMA201,Algebra,3,25,Tue2\n"
        courses = parse_catalog_csv(text)
        assert [c.course_id for c in courses] == ["CS101", "MA201"]
        assert courses[0].slots == parse_slots("Mon1+Wed3")
        assert courses[0].title == "Intro to CS"

    def test_header_required(self):
        with pytest.raises(BadConfigError):
            parse_catalog_csv("id,name\nCS101,Intro\n")

    def test_duplicate_course_rejected(self):
        text = self.HEADER + "CS101,A,2,30,Mon1\nCS101,B,2,30,Tue1\n"
        with pytest.raises(BadConfigError):
            parse_catalog_csv(text)

    def test_non_integer_capacity_rejected(self):
        with pytest.raises(BadConfigError):
            parse_catalog_csv(self.HEADER + "CS101,A,2,lots,Mon1\n")


class TestCourseValidation:
    def test_capacity_and_credits_positive(self):
        with pytest.raises(BadConfigError):
            validate_course(CourseOffering("C1", "T", 0, 1, parse_slots("Mon1")))
        with pytest.raises(BadConfigError):
            validate_course(CourseOffering("C1", "T", 1, 0, parse_slots("Mon1")))

    def test_slots_required(self):
        with pytest.raises(BadConfigError):
            validate_course(CourseOffering("C1", "T", 1, 1, frozenset()))
