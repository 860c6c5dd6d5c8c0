"""Pydantic request/response models for the HTTP service.

Networks travel as ``net_text`` strings in the same documented text format
used for network files, so the service and the files share one canonical
serialization; vectors and matrices are plain JSON arrays.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

from ..baseline import ForwardOperator, GdConfig
from ..invert import InversionReport, LayerInversionOutcome, LpInvertConfig
from ..linalg import Matrix


class LpConfigModel(BaseModel):
    epsilon_init: float = 0.1
    alpha: float = 1.2
    epsilon_rule: str = "adaptive"
    assumed_c: float = 1.0
    max_epsilon_rounds: int = 50

    def to_config(self) -> LpInvertConfig:
        return LpInvertConfig(
            epsilon_init=self.epsilon_init, alpha=self.alpha,
            epsilon_rule=self.epsilon_rule, assumed_c=self.assumed_c,
            max_epsilon_rounds=self.max_epsilon_rounds)


class GdConfigModel(BaseModel):
    learning_rate: float = 1.0
    max_iters: int = 1000
    grad_norm_stop: float = 1e-9
    init: str = "gaussian"
    init_seed: int = 0
    restarts: int = 1

    def to_config(self) -> GdConfig:
        return GdConfig(
            learning_rate=self.learning_rate, max_iters=self.max_iters,
            grad_norm_stop=self.grad_norm_stop, init=self.init,
            init_seed=self.init_seed, restarts=self.restarts)


class OperatorModel(BaseModel):
    kind: str = "identity"  # "identity", "mask" or "dense"
    indices: Optional[list[int]] = None
    matrix: Optional[list[list[float]]] = None

    def to_operator(self) -> ForwardOperator:
        if self.kind == "identity":
            return ForwardOperator.identity()
        if self.kind == "mask":
            if self.indices is None:
                raise ValueError("mask operator needs indices")
            return ForwardOperator.mask(self.indices)
        if self.kind == "dense":
            if self.matrix is None:
                raise ValueError("dense operator needs a matrix")
            return ForwardOperator.dense(Matrix.from_rows(self.matrix))
        raise ValueError(f"unknown operator kind {self.kind!r}")


class HealthResponse(BaseModel):
    status: str
    version: str


class ForwardRequest(BaseModel):
    net_text: str
    latent: list[float]
    trace: bool = False


class ForwardResponse(BaseModel):
    output: list[float]
    trace: Optional[list[list[float]]] = None


class LayerOutcomeModel(BaseModel):
    recovered_dim: int
    epsilon_used: float
    delta_or_l1: float
    active_set_size: int
    status_trail: list[tuple[float, str]]
    budget_exhausted: bool
    bias_adjusted: bool

    @classmethod
    def from_outcome(cls, o: LayerInversionOutcome) -> "LayerOutcomeModel":
        return cls(recovered_dim=o.recovered.dim, epsilon_used=o.epsilon_used,
                   delta_or_l1=o.delta_or_l1, active_set_size=o.active_set_size,
                   status_trail=list(o.status_trail),
                   budget_exhausted=o.budget_exhausted,
                   bias_adjusted=o.bias_adjusted)


class InvertReportModel(BaseModel):
    latent: list[float]
    method: str
    success: bool
    residual_linf: float
    residual_l1: float
    residual_l2: float
    lp_solves: int
    iterations: int
    layers: list[LayerOutcomeModel]
    notes: list[str]

    @classmethod
    def from_report(cls, r: InversionReport) -> "InvertReportModel":
        return cls(latent=r.latent.tolist(), method=r.method, success=r.success,
                   residual_linf=r.residual_linf, residual_l1=r.residual_l1,
                   residual_l2=r.residual_l2, lp_solves=r.lp_solves,
                   iterations=r.iterations,
                   layers=[LayerOutcomeModel.from_outcome(o) for o in r.layer_outcomes],
                   notes=list(r.notes))


class InvertRequest(BaseModel):
    net_text: str
    observation: list[float]
    method: str = "linf"  # exact | linf | l1 | relaxed | gd
    lp: LpConfigModel = Field(default_factory=LpConfigModel)
    gd: GdConfigModel = Field(default_factory=GdConfigModel)


class RandomNetRequest(BaseModel):
    dims: list[int]
    weight_std_rule: str = "unit"
    seed: int = 0
    activation: str = "relu"
    leaky_slope: float = 0.1


class NetResponse(BaseModel):
    net_text: str
    input_dim: int
    output_dim: int
    depth: int


class AbsorbBiasRequest(BaseModel):
    net_text: str


class ReduceRequest(BaseModel):
    dimacs: str
    gadget: str = "binary"  # "binary" or "real"


class ReduceResponse(BaseModel):
    net_text: str
    target: list[float]
    num_vars: int
    num_clauses: int


class BruteForceRequest(BaseModel):
    dimacs: str


class BruteForceResponse(BaseModel):
    satisfiable: bool
    assignment: Optional[list[bool]] = None


class SenseRequest(BaseModel):
    net_text: str
    observation: list[float]
    operator: OperatorModel = Field(default_factory=OperatorModel)
    inner_method: str = "linf"
    outer_iters: int = 30
    step: float = 0.5
    lp: LpConfigModel = Field(default_factory=LpConfigModel)


class BoundRequest(BaseModel):
    depth: int
    epsilon: float
    assumed_c: float
    norm: str = "linf"


class BoundResponse(BaseModel):
    depth: int
    epsilon: float
    assumed_c: float
    norm: str
    value: float


class ConstantEstimateRequest(BaseModel):
    matrix: list[list[float]]
    subset_size: int
    norm: str = "linf"
    samples: int = 1000
    seed: int = 0


class ConstantEstimateResponse(BaseModel):
    c_hat: float


class TrialRecordModel(BaseModel):
    method: str
    trial: int
    noise_kind: str
    noise_level: float
    rel_noise: float
    rel_error: float
    residual_linf: float
    residual_l1: float
    residual_l2: float
    success: bool
    solver_count: int
    error: str


class NoiseSweepRequest(BaseModel):
    dims: list[int]
    methods: list[str] = ["linf"]
    noise_kind: str = "none"
    noise_levels: list[float] = [0.0]
    trials: int = 20
    success_threshold: float = 1e-3
    base_seed: int = 0
    weight_std_rule: str = "unit"
    lp: LpConfigModel = Field(default_factory=LpConfigModel)
    gd: GdConfigModel = Field(default_factory=GdConfigModel)


class NoiseSweepResponse(BaseModel):
    csv: str
    metadata: str
    records: list[TrialRecordModel]


class SuccessVsKRequest(BaseModel):
    k_values: list[int]
    hidden: int = 250
    output: int = 600
    methods: list[str] = ["linf", "l1", "gd"]
    noise_kind: str = "none"
    noise_level: float = 0.0
    trials: int = 20
    success_threshold: float = 1e-3
    base_seed: int = 0
    weight_std_rule: str = "inv_sqrt_fanout"
    lp: LpConfigModel = Field(default_factory=LpConfigModel)
    gd: GdConfigModel = Field(default_factory=GdConfigModel)


class SuccessRowModel(BaseModel):
    k: int
    method: str
    success_rate: float
    trials: int


class SuccessVsKResponse(BaseModel):
    rows: list[SuccessRowModel]
    csv: str
    metadata: str


class TimingRequest(BaseModel):
    dims: list[int]
    methods: list[str] = ["linf", "l1", "gd"]
    noise_kind: str = "none"
    noise_level: float = 0.0
    trials: int = 20
    success_threshold: float = 1e-3
    base_seed: int = 0
    weight_std_rule: str = "inv_sqrt_fanout"
    lp: LpConfigModel = Field(default_factory=LpConfigModel)
    gd: GdConfigModel = Field(default_factory=GdConfigModel)


class TimingRowModel(BaseModel):
    method: str
    k: int
    mean_wall_s: float
    trials: int


class TimingResponse(BaseModel):
    rows: list[TimingRowModel]
    csv: str


class CheckModel(BaseModel):
    name: str
    passed: bool
    detail: str


class VerifyResponse(BaseModel):
    passed: bool
    checks: list[CheckModel]
