"""Request/response models for the HTTP service."""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

ModelLabel = Literal["ideal", "classical", "noisy_eq5", "noisy_eq9",
                     "partial", "truncated", "click"]

# A complex matrix travels as rows of [re, im] pairs.
Matrix = List[List[List[float]]]


class HealthResponse(BaseModel):
    status: str
    version: str


class DistributionRequest(BaseModel):
    n: int
    m: int
    model: ModelLabel = "ideal"
    epsilon: float = 0.0
    r: Optional[int] = None
    seed: Optional[int] = None
    matrix: Optional[Matrix] = None


class DistributionResponse(BaseModel):
    model: str
    n: int
    m: int
    total_probability: float
    min_entry: float
    configurations: List[List[int]]
    probabilities: List[float]


class CountRow(BaseModel):
    m: List[int]
    count: int


class RecordRow(BaseModel):
    m: List[int]
    n_quantum: int
    stream: str


class RealizationSummary(BaseModel):
    realizations: int
    no_collision_mass: float
    collision_mass: float
    mass_stderr: float
    configurations: List[List[int]]
    mean: List[float]
    stderr: List[float]


class SampleRequest(BaseModel):
    n: int
    m: int
    seed: int
    epsilon: float = 0.0
    sampler: Literal["table", "compositional", "realizations"] = "table"
    model: ModelLabel = "noisy_eq9"
    r: Optional[int] = None
    draws: int = 10000
    realizations: int = 1000
    return_records: bool = False
    matrix: Optional[Matrix] = None


class SampleResponse(BaseModel):
    sampler: str
    total_draws: int
    counts: List[CountRow] = []
    records: Optional[List[RecordRow]] = None
    realization: Optional[RealizationSummary] = None


class VerifyRequest(BaseModel):
    n: int
    m: int
    seed: int
    epsilon: float = 0.0
    corrupt_j: bool = False


class CheckRow(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    check: str
    max_deviation: float
    tolerance: float
    passed: bool = Field(alias="pass")


class VerifyResponse(BaseModel):
    checks: List[CheckRow]
    all_passed: bool


class BoundsRequest(BaseModel):
    n: int
    epsilon: float
    r: Optional[int] = None
    eps_err: float = 0.05


class BoundRow(BaseModel):
    bound_name: str
    value: Optional[float]
    inputs: Dict[str, float]
    satisfied: str


class BoundsResponse(BaseModel):
    reports: List[BoundRow]


class SweepRequest(BaseModel):
    param: Literal["epsilon", "n", "r"]
    values: List[float]
    n: int = 4
    epsilon: float = 0.1
    r: Optional[int] = None
    eps_err: float = 0.05
    eps_over_n: Optional[float] = None


class SweepRow(BaseModel):
    n: int
    epsilon: float
    r: Optional[int]
    bounds: Dict[str, Optional[float]]


class SweepResponse(BaseModel):
    param: str
    rows: List[SweepRow]
