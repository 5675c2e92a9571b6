from fastapi import APIRouter

from ..schemas.transseries import TransseriesRequestBody, TransseriesResponse
from ...core.chars import parse_character
from ...core.config import get_settings
from ...core.errors import ParseError
from ...core.numerics import PrecisionContext
from ...core.qseries import QPoint, SeriesParams
from ...core.resurgence import transseries_eval


router = APIRouter(tags=["transseries"])


@router.post("/", response_model=TransseriesResponse, summary="Lateral transseries of Xi")
def transseries(payload: TransseriesRequestBody) -> TransseriesResponse:
    settings = get_settings()
    digits = payload.digits or settings.digits
    ctx = PrecisionContext.from_digits(digits, guard_digits=settings.guard_digits)
    if payload.q:
        point = QPoint.parse(f"q={payload.q}", ctx)
    elif payload.y:
        point = QPoint.parse(f"y={payload.y}", ctx)
    elif payload.tau:
        point = QPoint.parse(payload.tau, ctx)
    else:
        raise ParseError("give the evaluation point as tau, y or q")
    params = SeriesParams(
        s1=payload.s1,
        s2=payload.s2,
        chi1=parse_character(payload.chi1),
        chi2=parse_character(payload.chi2),
    )
    report = transseries_eval(params, point, payload.side, ctx)
    return TransseriesResponse(passed=report.passed, report=report.to_record(digits))
