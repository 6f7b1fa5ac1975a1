"""Independent reference allocator used as the test oracle.

Deliberately imports nothing from the package under test. Works on plain
dicts and recomputes everything naively, so a settlement bug cannot hide in
shared code. Instance shape:

    courses:  list of {"course_id", "credits", "capacity", "slots": set[(day, period)]}
    declared: {student_id: declared_credits}
    bids:     list of accepted (student_id, course_id, amount) triples
"""

import hashlib


def _hex(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def reference_allocate(epoch_id, courses, declared, bids):
    """Both rounds. Returns {"primary": set, "fallback": set, "credits": dict,
    "unfilled": dict} with (student, course) pairs in the award sets."""
    info = {}
    for c in courses:
        info[c["course_id"]] = c

    effective = {}
    for student, course, amount in bids:
        effective[(student, course)] = effective.get((student, course), 0) + amount

    def course_total(cid):
        total = 0
        for (s, c), amt in effective.items():
            if c == cid:
                total += amt
        return total

    processing_order = sorted(info.keys(), key=lambda cid: (-course_total(cid), cid))

    taken_slots = {s: set() for s in declared}
    taken_courses = {s: set() for s in declared}
    credits = {s: 0 for s in declared}
    open_seats = {cid: info[cid]["capacity"] for cid in info}

    def can_take(student, cid):
        if student not in declared:
            return False
        if cid in taken_courses[student]:
            return False
        if info[cid]["slots"] & taken_slots[student]:
            return False
        if credits[student] + info[cid]["credits"] > declared[student]:
            return False
        return True

    def take(student, cid):
        taken_courses[student].add(cid)
        taken_slots[student] |= info[cid]["slots"]
        credits[student] += info[cid]["credits"]
        open_seats[cid] -= 1

    primary = set()
    for cid in processing_order:
        bidders = [(s, amt) for (s, c), amt in effective.items() if c == cid]
        bidders.sort(key=lambda e: (-e[1], _hex(epoch_id + "|" + cid + "|" + e[0])))
        for student, _amt in bidders:
            if open_seats[cid] <= 0:
                break
            if can_take(student, cid):
                take(student, cid)
                primary.add((student, cid))

    wasted = {s: 0 for s in declared}
    for (student, cid), amt in effective.items():
        if cid not in taken_courses.get(student, set()):
            wasted[student] = wasted.get(student, 0) + amt

    short = [s for s in declared if credits[s] < declared[s]]
    short.sort(key=lambda s: (-wasted[s], _hex(epoch_id + "|fallback|" + s)))

    fallback = set()
    for student in short:
        for cid in processing_order:
            if credits[student] >= declared[student]:
                break
            if open_seats[cid] <= 0:
                continue
            if can_take(student, cid):
                take(student, cid)
                fallback.add((student, cid))

    return {
        "primary": primary,
        "fallback": fallback,
        "credits": credits,
        "unfilled": open_seats,
    }


def reference_fcfs(courses, declared, arrivals):
    """First-come-first-served over the same constraints; amounts ignored."""
    info = {c["course_id"]: c for c in courses}
    taken_slots = {s: set() for s in declared}
    taken_courses = {s: set() for s in declared}
    credits = {s: 0 for s in declared}
    open_seats = {cid: info[cid]["capacity"] for cid in info}

    awards = set()
    for student, cid, _amount in arrivals:
        if student not in declared or open_seats.get(cid, 0) <= 0:
            continue
        if cid in taken_courses[student]:
            continue
        if info[cid]["slots"] & taken_slots[student]:
            continue
        if credits[student] + info[cid]["credits"] > declared[student]:
            continue
        taken_courses[student].add(cid)
        taken_slots[student] |= info[cid]["slots"]
        credits[student] += info[cid]["credits"]
        open_seats[cid] -= 1
        awards.add((student, cid))
    return {"awards": awards, "credits": credits, "unfilled": open_seats}
