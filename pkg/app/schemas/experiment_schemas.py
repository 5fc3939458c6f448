from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.run_models import DealiasMode, EvolveConfig, FunctionalSpec
from app.models.spectral_models import DispersionMode, ModelParams
from config.config import BOUNDARY_MASS_THRESHOLD, DEFAULT_SEED


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ============= MODEL AND GRID =============

class ModelSchema(StrictModel):
    N: int = Field(..., ge=1)
    M: int = Field(..., ge=1)
    gamma: float = 0.0
    a: List[float] = Field(default_factory=list)
    b: List[float]
    dispersion_mode: Literal["hilbert", "fractional"] = "hilbert"
    beta: Optional[float] = Field(default=None, gt=0.0, lt=2.0)

    @model_validator(mode="after")
    def validate_lengths(self):
        if len(self.a) != self.N - 1:
            raise ValueError(f"a must have N-1 = {self.N - 1} entries, got {len(self.a)}")
        if len(self.b) != self.M:
            raise ValueError(f"b must have M = {self.M} entries, got {len(self.b)}")
        if self.dispersion_mode == "fractional" and self.beta is None:
            raise ValueError("fractional dispersion needs beta")
        if self.dispersion_mode == "hilbert" and self.beta is not None:
            raise ValueError("beta is only allowed with fractional dispersion")
        return self

    def to_params(self) -> ModelParams:
        return ModelParams(
            N=self.N, M=self.M, gamma=self.gamma, a=tuple(self.a), b=tuple(self.b),
            dispersion_mode=DispersionMode(self.dispersion_mode), beta=self.beta,
        )


class GridSchema(StrictModel):
    length: float = Field(..., gt=0.0)
    n: int = Field(..., ge=8)

    @field_validator("n")
    def validate_power_of_two(cls, v):
        if v & (v - 1):
            raise ValueError(f"n must be a power of two, got {v}")
        return v


# ============= TIME STEPPING =============

class TwoThirdsSchema(StrictModel):
    kind: Literal["two_thirds"] = "two_thirds"


class PadSchema(StrictModel):
    kind: Literal["pad"]
    factor: float = Field(..., ge=1.0)


DealiasSchema = Annotated[Union[TwoThirdsSchema, PadSchema], Field(discriminator="kind")]


class IFRK4Schema(StrictModel):
    kind: Literal["ifrk4"] = "ifrk4"


class PicardSchema(StrictModel):
    kind: Literal["picard"]
    tol: float = Field(default=1e-8, gt=0.0)
    max_iter: int = Field(default=50, ge=1)
    quad_nodes: int = Field(default=101, ge=2)


IntegratorSchema = Annotated[Union[IFRK4Schema, PicardSchema], Field(discriminator="kind")]


class EvolveSchema(StrictModel):
    t_end: float = Field(..., gt=0.0)
    dt: Optional[float] = Field(default=None, gt=0.0, description="Omit to use suggest_dt(u0) * dt_safety.")
    dt_safety: float = Field(default=0.5, gt=0.0, le=1.0)
    dealias: DealiasSchema = Field(default_factory=TwoThirdsSchema)
    output_every: int = Field(default=1, ge=1)
    boundary_mass_threshold: float = Field(default=BOUNDARY_MASS_THRESHOLD, gt=0.0)
    boundary_action: Literal["error", "record"] = Field(
        default="error", description="'record' keeps running past the threshold and reports the shares in the manifest."
    )
    integrator: IntegratorSchema = Field(default_factory=IFRK4Schema)

    @model_validator(mode="after")
    def validate_dt(self):
        if self.dt is not None and self.dt > self.t_end:
            raise ValueError(f"dt={self.dt} exceeds t_end={self.t_end}")
        return self

    def dealias_mode(self) -> DealiasMode:
        if isinstance(self.dealias, PadSchema):
            return DealiasMode.pad(self.dealias.factor)
        return DealiasMode.two_thirds()

    def to_config(self, dt: float) -> EvolveConfig:
        return EvolveConfig(
            dt=dt, t_end=self.t_end, dealias=self.dealias_mode(),
            output_every=self.output_every, boundary_mass_threshold=self.boundary_mass_threshold,
            boundary_action=self.boundary_action,
        )


# ============= INITIAL DATA =============

class SolitonSchema(StrictModel):
    type: Literal["soliton"]
    speed: float = Field(..., gt=0.0)
    b: Optional[float] = Field(default=None, description="Defaults to the model's b_1.")
    center: float = 0.0


class GaussianSchema(StrictModel):
    type: Literal["gaussian"] = "gaussian"
    amplitude: float
    width: float = Field(..., gt=0.0)
    center: float = 0.0


class RandomHsSchema(StrictModel):
    type: Literal["random_hs"] = "random_hs"
    s: float
    delta: float = Field(default=0.05, gt=0.0)
    amplitude: float = 1.0
    seed: Optional[int] = Field(default=None, description="Defaults to the experiment seed.")
    localize: Optional[float] = Field(
        default=None, gt=0.0, description="Half-width of a smooth cutoff that confines the data to |x| <= localize + 1."
    )


class SplitSchema(StrictModel):
    type: Literal["split"]
    rough: RandomHsSchema
    smooth_right: GaussianSchema
    x0: float = 0.0
    transition: float = Field(default=1.0, gt=0.0)


InitialDataSchema = Annotated[
    Union[SolitonSchema, GaussianSchema, RandomHsSchema, SplitSchema], Field(discriminator="type")
]


# ============= DIAGNOSTICS =============

class _Functional(StrictModel):
    def to_functional(self) -> FunctionalSpec:
        params = self.model_dump(exclude={"kind"})
        return FunctionalSpec(self.kind, params)


class MassSpec(_Functional):
    kind: Literal["mass"]


class EnergySpec(_Functional):
    kind: Literal["energy"]


class IntegralISpec(_Functional):
    kind: Literal["integral_I"]


class SobolevSpec(_Functional):
    kind: Literal["sobolev_norm"]
    s: float


class KatoSpec(_Functional):
    kind: Literal["kato"]
    r: float = Field(..., ge=0.0)
    R: float = Field(..., gt=0.0)
    operator: Literal["J", "absD", "mixed"] = "J"

    def to_functional(self) -> FunctionalSpec:
        return FunctionalSpec("kato", {"r": self.r, "R": self.R, "kind": self.operator})


class PropagationSpec(_Functional):
    kind: Literal["propagation"]
    r: float
    x0: float = 0.0
    eps: float = Field(..., gt=0.0)
    v: float = Field(..., gt=0.0)
    side: Literal["right", "left"] = "right"


class WindowSmoothingSpec(_Functional):
    kind: Literal["window_smoothing"]
    m: float
    x0: float = 0.0
    eps: float = Field(..., gt=0.0)
    R: float = Field(..., gt=0.0)
    v: float = Field(..., gt=0.0)

    @model_validator(mode="after")
    def validate_window(self):
        if self.R <= self.eps:
            raise ValueError(f"R must exceed eps, got R={self.R}, eps={self.eps}")
        return self


class DecayWeightedSpec(_Functional):
    kind: Literal["decay_weighted"]
    r: float
    s: float
    delta: float = Field(..., gt=0.0)

    @model_validator(mode="after")
    def validate_orders(self):
        if self.r <= self.s:
            raise ValueError(f"r must exceed s, got r={self.r}, s={self.s}")
        return self


FunctionalSchema = Annotated[
    Union[
        MassSpec, EnergySpec, IntegralISpec, SobolevSpec, KatoSpec,
        PropagationSpec, WindowSmoothingSpec, DecayWeightedSpec,
    ],
    Field(discriminator="kind"),
]


# ============= EXPERIMENT =============

class ExperimentConfig(StrictModel):
    name: str = Field(default="experiment", min_length=1, max_length=100, pattern=r"^[A-Za-z0-9._-]+$")
    model: ModelSchema
    grid: GridSchema
    evolve: EvolveSchema
    initial_data: InitialDataSchema
    diagnostics: List[FunctionalSchema] = Field(default_factory=list)
    snapshot_times: Optional[List[float]] = Field(
        default=None, description="Times whose nearest stored snapshot is written; default first and last."
    )
    opcheck: bool = False
    seed: int = DEFAULT_SEED
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def validate_soliton_model(self):
        data = self.initial_data
        if isinstance(data, SolitonSchema):
            model = self.model
            if model.N != 1 or model.M != 1 or model.gamma != 0.0 or model.dispersion_mode != "hilbert":
                raise ValueError("soliton initial data needs the KdV model N=1, M=1, gamma=0")
        return self

    def functionals(self) -> List[FunctionalSpec]:
        return [item.to_functional() for item in self.diagnostics]
