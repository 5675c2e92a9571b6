from typing import Any, Literal

from pydantic import BaseModel, Field


class EvaluateRequest(BaseModel):
    series: Literal["xi", "lambert", "lambert-tilde", "phi", "eisenstein"]
    s: str | None = None
    s1: str | None = None
    s2: str | None = None
    chi: str | None = None
    chi1: str | None = None
    chi2: str | None = None
    m: int = Field(default=2, ge=1)
    d1: int = 1
    d2: int = 1
    coeffs: int = Field(default=10, ge=1)
    tau: str | None = None
    y: str | None = None
    q: str | None = None
    digits: int | None = Field(default=None, gt=0)


class EvaluateResponse(BaseModel):
    series: str
    value: dict[str, str] | None = None
    coefficients: list[Any] | None = None
    config: dict[str, Any]
