from pydantic import BaseModel, Field


class LValueRequestBody(BaseModel):
    chi: str
    s: str
    derivative: bool = False
    digits: int | None = Field(default=None, gt=0)


class LValueResponse(BaseModel):
    chi: str
    s: str
    derivative: bool
    value: dict[str, str]
    exact: str | None = None
