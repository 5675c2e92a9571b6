from fractions import Fraction

from fastapi import APIRouter

from ..schemas.lvalue import LValueRequestBody, LValueResponse
from ...core.chars import parse_character
from ...core.config import get_settings
from ...core.lfunc import LValueRequest, evaluate
from ...core.numerics import PrecisionContext, format_value, parse_number


router = APIRouter(tags=["lvalue"])


@router.post("/", response_model=LValueResponse, summary="Dirichlet L-value or its derivative")
def l_value(payload: LValueRequestBody) -> LValueResponse:
    settings = get_settings()
    digits = payload.digits or settings.digits
    ctx = PrecisionContext.from_digits(digits, guard_digits=settings.guard_digits)
    chi = parse_character(payload.chi)
    request = LValueRequest(chi=chi, s=parse_number(payload.s), want_derivative=payload.derivative)
    value = evaluate(request, ctx)
    return LValueResponse(
        chi=chi.label,
        s=payload.s,
        derivative=payload.derivative,
        value=format_value(value, digits),
        exact=str(value) if isinstance(value, Fraction) else None,
    )
