from argparse import Namespace

from fastapi import APIRouter

from ..schemas.evaluate import EvaluateRequest, EvaluateResponse
from ...cli import RunConfig, cmd_eval
from ...core.config import get_settings


router = APIRouter(tags=["evaluate"])


@router.post("/", response_model=EvaluateResponse, summary="Evaluate a q-series at a point")
def evaluate_series(payload: EvaluateRequest) -> EvaluateResponse:
    settings = get_settings()
    params = payload.model_dump(exclude={"digits"})
    config = RunConfig(
        command="eval",
        precision_digits=payload.digits or settings.digits,
        guard_digits=settings.guard_digits,
        params={k: v for k, v in params.items() if v is not None},
    )
    report, _ = cmd_eval(Namespace(**params), config)
    return EvaluateResponse(**report, config=config.model_dump())
