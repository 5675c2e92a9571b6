from typing import Any, Literal

from pydantic import BaseModel, Field


class VerifyRequestBody(BaseModel):
    corpus: Literal["eta-tables", "fricke", "spectral", "all"]
    coeffs: int = Field(default=64, ge=1)
    digits: int | None = Field(default=None, gt=0)
    seed: int = 0
    jobs: int | None = Field(default=None, ge=1)
    lattice_cutoff: int = Field(default=2000, ge=10)


class VerifyResponse(BaseModel):
    passed: bool
    counts: dict[str, int]
    results: list[dict[str, Any]]
    config: dict[str, Any]
