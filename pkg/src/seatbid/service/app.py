"""HTTP facade over the engine.

Every mutating request maps onto exactly one engine command and therefore
exactly one ledger append; responses carry the engine's outcome verbatim.
A rejected bid is a recorded result, not a transport failure, so it comes
back as HTTP 200 with accepted=false.
"""

from __future__ import annotations

import json

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse

from ..errors import (
    AlreadyDeclaredError,
    BadConfigError,
    BadIdentifierError,
    CreditBoundsError,
    DuplicateCourseError,
    EpochActiveError,
    NoEpochError,
    PhaseError,
    SeatbidError,
)
from ..registrar import CourseOffering, EpochConfig, parse_catalog_csv, parse_slots
from .runtime import ServiceRuntime
from .schemas import (
    AckOut,
    BalanceOut,
    BidIn,
    BidOut,
    ClockIn,
    CourseIn,
    CourseRow,
    DeclareIn,
    DeclareOut,
    EpochIn,
    PhaseOut,
    ResultsOut,
)

_CONFLICT_ERRORS = (
    PhaseError,
    EpochActiveError,
    DuplicateCourseError,
    AlreadyDeclaredError,
    CreditBoundsError,
    NoEpochError,
)


def create_app(runtime: ServiceRuntime) -> FastAPI:
    app = FastAPI(title="seatbid", docs_url=None, redoc_url=None)
    app.state.runtime = runtime

    def require_admin(x_admin_token: str | None = Header(default=None)) -> None:
        expected = runtime.config.admin_token
        if not expected or x_admin_token != expected:
            raise _HttpError(401, "missing or invalid admin token")

    class _HttpError(Exception):
        def __init__(self, status: int, detail: str):
            self.status = status
            self.detail = detail

    @app.exception_handler(_HttpError)
    async def _http_error(_req: Request, exc: _HttpError):
        return JSONResponse(status_code=exc.status, content={"error": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed body", "detail": exc.errors()})

    @app.exception_handler(SeatbidError)
    async def _domain_error(_req: Request, exc: SeatbidError):
        if isinstance(exc, BadIdentifierError) or isinstance(exc, BadConfigError):
            return JSONResponse(status_code=400, content={"error": str(exc)})
        if isinstance(exc, _CONFLICT_ERRORS):
            return JSONResponse(status_code=409, content={"error": str(exc)})
        return JSONResponse(status_code=500, content={"error": str(exc)})

    # -- admin

    @app.post("/admin/epoch", response_model=AckOut, dependencies=[Depends(require_admin)])
    def open_epoch(body: EpochIn):
        cfg = EpochConfig(**body.model_dump())
        runtime.engine.open_epoch(cfg, at=runtime.now())
        return AckOut(epoch_id=cfg.epoch_id, detail="epoch open")

    @app.post("/admin/courses", response_model=AckOut, dependencies=[Depends(require_admin)])
    async def register_courses(request: Request):
        content_type = request.headers.get("content-type", "")
        raw = await request.body()
        if content_type.startswith("text/csv"):
            courses = parse_catalog_csv(raw.decode("utf-8"))
        else:
            try:
                body = CourseIn.model_validate_json(raw)
            except ValueError as exc:
                raise _HttpError(400, f"malformed body: {exc}") from exc
            courses = [
                CourseOffering(
                    course_id=body.course_id,
                    title=body.title,
                    credits=body.credits,
                    capacity=body.capacity,
                    slots=parse_slots(body.slots),
                )
            ]
        at = runtime.now()
        existing = {row["course_id"] for row in runtime.engine.course_rows()}
        for course in courses:
            if course.course_id in existing:
                raise DuplicateCourseError(f"course {course.course_id} already registered")
        runtime.engine.register_catalog(courses, at=at)
        return AckOut(detail=f"registered {len(courses)} course(s)")

    @app.post("/admin/settle", response_model=ResultsOut, dependencies=[Depends(require_admin)])
    def settle():
        runtime.engine.run_settlement(at=runtime.now())
        return runtime.results_view()

    @app.post("/admin/clock", response_model=AckOut, dependencies=[Depends(require_admin)])
    def set_clock(body: ClockIn):
        now = runtime.set_clock(body.now)
        return AckOut(detail=f"clock at {now}")

    # -- student-facing

    @app.post("/declare", response_model=DeclareOut)
    def declare(body: DeclareIn):
        declaration = runtime.engine.declare(body.student_id, body.credits, at=runtime.now())
        return DeclareOut(
            student_id=declaration.student_id,
            epoch_id=declaration.epoch_id,
            declared_credits=declaration.declared_credits,
            minted_tokens=declaration.minted_tokens,
            balance=runtime.engine.balance(body.student_id),
        )

    @app.post("/bids", response_model=BidOut)
    def place_bid(body: BidIn):
        outcome = runtime.engine.place_bid(
            body.student_id, body.course_id, body.amount, at=runtime.now()
        )
        return BidOut(accepted=outcome.accepted, reason=outcome.reason, balance=outcome.balance)

    @app.get("/phase", response_model=PhaseOut)
    def phase():
        return runtime.phase_info()

    @app.get("/courses", response_model=list[CourseRow])
    def courses():
        return runtime.engine.course_rows()

    @app.get("/balance/{student_id}", response_model=BalanceOut)
    def balance(student_id: str):
        minted, spent, remaining = runtime.engine.account_view(student_id)
        cfg = runtime.engine.epoch_config()
        return BalanceOut(
            student_id=student_id,
            epoch_id=cfg.epoch_id if cfg else None,
            minted=minted,
            spent=spent,
            remaining=remaining,
        )

    @app.get("/results", response_model=ResultsOut)
    def results():
        view = runtime.results_view()
        if view is None:
            raise _HttpError(404, "awaiting settlement")
        return view

    @app.get("/ledger")
    def ledger():
        return PlainTextResponse(
            runtime.ledger_bytes(), media_type="application/x-ndjson"
        )

    @app.get("/events")
    def events(resume: int = Query(default=0, ge=0)):
        # Async polling over the bus backlog: cancellation on client
        # disconnect lands at the sleep, so no worker thread is ever pinned.
        async def stream():
            import anyio

            cursor = resume
            idle = 0.0
            while True:
                chunk = runtime.bus.backlog(cursor)
                if chunk:
                    for event in chunk:
                        yield event.sse()
                    cursor = chunk[-1].seq + 1
                    idle = 0.0
                else:
                    await anyio.sleep(0.05)
                    idle += 0.05
                    if idle >= 15.0:
                        yield ": keepalive\n\n"
                        idle = 0.0

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
