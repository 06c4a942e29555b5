"""Pydantic schemas for the service: request bodies mirror the experiment
config dicts, responses all share the report envelope."""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, Field, field_validator


class FieldModel(BaseModel):
    characteristic: int = 2
    degree: int = 1
    modulus: list[int] = []


class InlineCodeModel(BaseModel):
    type: Literal["inline"] = "inline"
    field: FieldModel
    n: int
    k: int
    memory: int
    coefficients: list[list[list[int]]]


class SearchCodeModel(BaseModel):
    type: Literal["search"] = "search"
    field: FieldModel
    n: int
    k: int
    memory: int
    seed: int | None = None
    max_attempts: int = 2000


class AlphaPowerCodeModel(BaseModel):
    type: Literal["alpha-power"] = "alpha-power"
    n: int
    k: int
    memory: int
    degree: int


CodeSource = Annotated[Union[InlineCodeModel, SearchCodeModel, AlphaPowerCodeModel],
                       Field(discriminator="type")]


class SchemeModel(BaseModel):
    num_files: int = 2
    stream_len: int = 20
    wanted: int = 1
    J: list[int] | None = None
    delta: int | None = None


class IidChannelModel(BaseModel):
    type: Literal["iid"] = "iid"
    epsilon: float


class BurstChannelModel(BaseModel):
    type: Literal["burst"] = "burst"
    start_window: int
    length: int


class UnresponsiveChannelModel(BaseModel):
    type: Literal["unresponsive"] = "unresponsive"
    servers: list[int]
    t_from: int = 1
    t_to: int | None = None


class ExplicitChannelModel(BaseModel):
    type: Literal["explicit"] = "explicit"
    pairs: list[tuple[int, int]] | None = None
    path: str | None = None


ChannelConfig = Annotated[
    Union[IidChannelModel, BurstChannelModel, UnresponsiveChannelModel,
          ExplicitChannelModel],
    Field(discriminator="type")]


class BudgetModel(BaseModel):
    messages: int = 1 << 24
    minors: int = 10 ** 7
    randomness: int = 1 << 20
    patterns: int = 1 << 24


class CodeSearchRequest(BaseModel):
    code: CodeSource
    seed: int = 0
    budget: BudgetModel = BudgetModel()


class CodeVerifyRequest(BaseModel):
    code: InlineCodeModel
    budget: BudgetModel = BudgetModel()


class SimulateRequest(BaseModel):
    code: CodeSource
    scheme: SchemeModel = SchemeModel()
    channel: ChannelConfig = IidChannelModel(epsilon=0.0)
    trials: int = 100
    seed: int = 0
    filter_correctable: bool = False
    workers: int = 1
    budget: BudgetModel = BudgetModel()


class EnumerateRequest(BaseModel):
    code: CodeSource
    scheme: SchemeModel | None = None
    horizon: int = 3
    j_size: int | None = None
    decoder_confirm: int | Literal["all", "none"] = "all"
    full_pipeline_sample: int = 0
    workers: int = 1
    seed: int = 0
    budget: BudgetModel = BudgetModel()

    @field_validator("decoder_confirm")
    @classmethod
    def _confirm_nonneg(cls, v):
        if isinstance(v, int) and v < 0:
            raise ValueError("decoder_confirm sample size must be >= 0")
        return v


class PrivacyAuditRequest(BaseModel):
    field: FieldModel = FieldModel()
    n: int = 3
    num_files: int = 2
    memory: int = 1
    J: list[int] | None = None
    collusion_pair: tuple[int, int] | None = None
    budget: BudgetModel = BudgetModel()


class Report(BaseModel):
    """The envelope every endpoint returns."""

    config: dict
    code: dict | None = None
    results: dict = {}
    counts: dict = {}
    findings: list = []
