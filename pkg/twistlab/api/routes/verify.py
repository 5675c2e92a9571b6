from fastapi import APIRouter

from ..schemas.verify import VerifyRequestBody, VerifyResponse
from ...cli import RunConfig
from ...core.config import get_settings
from ...core.corpus import verify_corpus


router = APIRouter(tags=["verify"])


@router.post("/", response_model=VerifyResponse, summary="Run an identity corpus")
def verify(payload: VerifyRequestBody) -> VerifyResponse:
    settings = get_settings()
    config = RunConfig(
        command="verify",
        precision_digits=payload.digits or settings.digits,
        guard_digits=settings.guard_digits,
        seed=payload.seed,
        jobs=payload.jobs or settings.jobs,
        params={"corpus": payload.corpus, "coeffs": payload.coeffs},
    )
    summary = verify_corpus(
        payload.corpus,
        config.context(),
        n_max=payload.coeffs,
        seed=config.seed,
        jobs=config.jobs,
        lattice_cutoff=payload.lattice_cutoff,
    )
    return VerifyResponse(
        passed=summary.passed,
        counts=summary.counts,
        results=[r.model_dump() for r in summary.results],
        config=config.model_dump(),
    )
