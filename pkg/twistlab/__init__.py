from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .api.routes.evaluate import router as evaluate_router
from .api.routes.lvalue import router as lvalue_router
from .api.routes.transseries import router as transseries_router
from .api.routes.verify import router as verify_router
from .core.config import initialize_env
from .core.errors import ConvergenceError, TwistLabError


def _error_status(exc: TwistLabError) -> int:
    return 503 if isinstance(exc, ConvergenceError) else 422


async def _twistlab_error(request: Request, exc: TwistLabError) -> JSONResponse:
    return JSONResponse(status_code=_error_status(exc), content={"detail": str(exc)})


def create_app() -> FastAPI:
    initialize_env()
    application = FastAPI(title="TwistLab API", version="0.1.0")

    # Routers
    application.include_router(evaluate_router, prefix="/api/evaluate")
    application.include_router(lvalue_router, prefix="/api/lvalue")
    application.include_router(transseries_router, prefix="/api/transseries")
    application.include_router(verify_router, prefix="/api/verify")

    application.add_exception_handler(TwistLabError, _twistlab_error)
    return application
