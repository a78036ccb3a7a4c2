"""Pydantic request/response models for the bpcl service."""

from __future__ import annotations

from typing import Optional, Union

from pydantic import BaseModel, Field


class DomainModel(BaseModel):
    extent: Union[float, list[float]] = 32.0
    depth: Union[int, list[int]] = 7
    origin: Union[float, list[float]] = 0.0


class KernelModel(BaseModel):
    name: str = "tensor_hilbert"
    params: dict = Field(default_factory=dict)


class SymbolModel(BaseModel):
    kind: str = "coord:x1+x2"
    params: dict = Field(default_factory=dict)


class ExponentsModel(BaseModel):
    p1: float = 2.0
    p2: float = 2.0
    q1: float = 2.0
    q2: float = 2.0


class AwfRectModel(BaseModel):
    level1: int = 5
    index1: int = 0
    level2: int = 5
    index2: int = 0


class AwfModel(BaseModel):
    A: float = 8.0
    rect: Optional[AwfRectModel] = None


class BudgetsModel(BaseModel):
    rect_depth: Optional[int] = None
    trials: int = 3
    max_rectangles: int = 24


class ConfigModel(BaseModel):
    """Mirror of the JSON config schema accepted by the CLI."""

    domain: DomainModel = Field(default_factory=DomainModel)
    kernel: KernelModel = Field(default_factory=KernelModel)
    symbol: SymbolModel = Field(default_factory=SymbolModel)
    exponents: ExponentsModel = Field(default_factory=ExponentsModel)
    awf: AwfModel = Field(default_factory=AwfModel)
    budgets: BudgetsModel = Field(default_factory=BudgetsModel)
    seed: int = 0

    def as_config_dict(self) -> dict:
        d = self.model_dump(exclude_none=True)
        return d


class AwfRequest(BaseModel):
    config: ConfigModel


class AwfResponse(BaseModel):
    R: dict
    A: float
    residual: float
    rho: float
    lhs: float
    rhs: float
    ratio: float


class NormsRequest(BaseModel):
    mesh_csv: str
    which: str
    weight_csv: Optional[str] = None


class NormsResponse(BaseModel):
    results: dict


class SparseRequest(BaseModel):
    mesh_csv: str
    recenter: bool = False


class SparseResponse(BaseModel):
    tree: list[dict]
    node_count: int


class ModelSpecModel(BaseModel):
    kind: str = "shift"
    symmetry: str = ""
    complexity: list[int] = Field(default_factory=lambda: [0, 0, 0, 0])
    seed: int = 0
    normalization: float = 1.0


class ModelApplyRequest(BaseModel):
    spec: ModelSpecModel
    mesh_csv: str


class ModelApplyResponse(BaseModel):
    mesh_csv: str


class CheckModel(BaseModel):
    name: str
    measured: float
    lo: Optional[float] = None
    hi: Optional[float] = None
    ok: bool


class ReportRequest(BaseModel):
    config: ConfigModel
    check_bands: bool = True


class ReportResponse(BaseModel):
    report: dict
    checks: list[CheckModel] = Field(default_factory=list)
    passed: bool = True


class BandsResponse(BaseModel):
    bands: dict


class BandsCheckRequest(BaseModel):
    groups: Optional[list[str]] = None


class BandsCheckResponse(BaseModel):
    checks: list[CheckModel]
    passed: bool


class BandsRegenerateRequest(BaseModel):
    groups: Optional[list[str]] = None
    margin: float = 1.5
