from typing import Any, Literal

from pydantic import BaseModel, Field


class TransseriesRequestBody(BaseModel):
    s1: str = "0"
    s2: str = "0"
    chi1: str = "1:1"
    chi2: str = "1:1"
    tau: str | None = None
    y: str | None = None
    q: str | None = None
    side: Literal["plus", "minus", "median"] = "minus"
    digits: int | None = Field(default=None, gt=0)


class TransseriesResponse(BaseModel):
    passed: bool
    report: dict[str, Any]
