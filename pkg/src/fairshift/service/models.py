"""Request/response models for the analysis service.

Datasets travel inline (columnar payloads) so the service stays stateless;
synthetic sources are specs resolved server-side. Field names here define
the wire format documented in docs/schemas.md.
"""

from pydantic import BaseModel, Field, model_validator

from ..builtin_specs import BUILTIN_SPECS
from ..core import CellSpec, Dataset, SyntheticSpec, generate_synthetic, normalize_all
from ..errors import InvalidSpec
from ..linear_lab import LogisticLink, MonotoneIndexSpec, generate_monotone_index
from ..metrics import Metric

CELL_KEYS = {"g0y0": (0, 0), "g0y1": (0, 1), "g1y0": (1, 0), "g1y1": (1, 1)}


class DatasetPayload(BaseModel):
    feature_names: list[str]
    groups: list[int]
    labels: list[int]
    features: list[list[float]]

    @classmethod
    def from_dataset(cls, ds: Dataset) -> "DatasetPayload":
        return cls(
            feature_names=list(ds.feature_names),
            groups=[int(g) for g in ds.groups],
            labels=[int(y) for y in ds.labels],
            features=[[float(v) for v in row] for row in ds.features],
        )

    def to_dataset(self) -> Dataset:
        return Dataset(self.groups, self.labels, self.features, self.feature_names)


class CellModel(BaseModel):
    weight: float
    locations: list[float]
    scales: list[float]


class MixtureSpecModel(BaseModel):
    cells: dict[str, CellModel]
    sample_size: int = Field(gt=0)
    seed: int = Field(ge=0)

    def to_spec(self) -> SyntheticSpec:
        if set(self.cells) != set(CELL_KEYS):
            raise InvalidSpec(f"mixture cells must be exactly {sorted(CELL_KEYS)}")
        cells = {
            CELL_KEYS[k]: CellSpec(c.weight, tuple(c.locations), tuple(c.scales))
            for k, c in self.cells.items()
        }
        return SyntheticSpec(cells=cells, sample_size=self.sample_size, seed=self.seed)


class LinkModel(BaseModel):
    slope: float
    intercept: float


class IndexSpecModel(BaseModel):
    v_y: list[float]
    v_g: list[float]
    link_y: LinkModel
    link_g: LinkModel
    sample_size: int = Field(gt=0)
    seed: int = Field(ge=0)
    advantaged_aligned: bool = False

    def to_spec(self) -> MonotoneIndexSpec:
        return MonotoneIndexSpec(
            v_y=tuple(self.v_y),
            v_g=tuple(self.v_g),
            link_y=LogisticLink(self.link_y.slope, self.link_y.intercept),
            link_g=LogisticLink(self.link_g.slope, self.link_g.intercept),
            sample_size=self.sample_size,
            seed=self.seed,
            advantaged_aligned=self.advantaged_aligned,
        )


class DatasetSource(BaseModel):
    """Exactly one of: an inline dataset, a builtin spec name, a mixture
    spec, or a monotone-index spec."""

    dataset: DatasetPayload | None = None
    builtin: str | None = None
    mixture: MixtureSpecModel | None = None
    index: IndexSpecModel | None = None
    sample_size: int | None = Field(default=None, gt=0)
    seed: int | None = Field(default=None, ge=0)
    normalize: bool = True

    @model_validator(mode="after")
    def _one_source(self):
        given = [x is not None for x in (self.dataset, self.builtin, self.mixture, self.index)]
        if sum(given) != 1:
            raise ValueError("provide exactly one of dataset/builtin/mixture/index")
        if self.builtin is not None and self.builtin not in BUILTIN_SPECS:
            raise ValueError(
                f"unknown builtin {self.builtin!r}; choose from {sorted(BUILTIN_SPECS)}"
            )
        return self

    def resolve(self) -> Dataset:
        if self.dataset is not None:
            ds = self.dataset.to_dataset()
        elif self.builtin is not None:
            kwargs = {}
            if self.sample_size is not None:
                kwargs["sample_size"] = self.sample_size
            if self.seed is not None:
                kwargs["seed"] = self.seed
            spec = BUILTIN_SPECS[self.builtin](**kwargs)
            ds = (
                generate_monotone_index(spec)
                if isinstance(spec, MonotoneIndexSpec)
                else generate_synthetic(spec)
            )
        elif self.mixture is not None:
            ds = generate_synthetic(self.mixture.to_spec())
        else:
            ds = generate_monotone_index(self.index.to_spec())
        return normalize_all(ds) if self.normalize else ds


class SynthRequest(BaseModel):
    source: DatasetSource


class SynthResponse(BaseModel):
    dataset: DatasetPayload


class ThresholdSweepRequest(BaseModel):
    source: DatasetSource
    feature: int = Field(default=0, ge=0)
    metric: Metric = Metric.PR
    alpha: float = Field(default=0.5, ge=0.0, le=1.0)
    grid_size: int = 0
    bins: int = Field(default=20, ge=2)


class SweepRow(BaseModel):
    theta: float
    error: float
    unfairness: float | None


class ThresholdSweepResponse(BaseModel):
    rows: list[SweepRow]
    theta_c: float
    theta_f: float | None
    theta_u: float | None
    theta_u_degenerate: bool | None
    alpha: float
    metric: Metric
    sufficient_condition: dict | None
    sufficient_condition_error: str | None


class BudgetGrid(BaseModel):
    min: float = Field(ge=0.0)
    max: float
    count: int = Field(ge=2)
    log: bool = False

    @model_validator(mode="after")
    def _ordered(self):
        if self.max <= self.min:
            raise ValueError("budget max must exceed min")
        if self.log and self.min <= 0.0:
            raise ValueError("log spacing needs min > 0")
        return self


class TrainingParams(BaseModel):
    epochs: int = Field(default=200, gt=0)
    step: float = Field(default=0.5, gt=0.0)
    seed: int = Field(default=0, ge=0)


class BudgetSweepRequest(BaseModel):
    source: DatasetSource
    mode: str = Field(default="threshold", pattern="^(threshold|linear)$")
    feature: int = Field(default=0, ge=0)
    metric: Metric = Metric.PR
    alpha: float = Field(default=0.5, ge=0.0, lt=1.0)
    grid_size: int = 0
    cost_kind: str = Field(default="abs_power", pattern="^(abs_power|l2)$")
    cost_exponent: float = Field(default=1.0, ge=1.0)
    budgets: BudgetGrid
    training: TrainingParams = TrainingParams()


class BudgetRow(BaseModel):
    budget: float
    error_C: float
    error_F: float
    unfair_C: float | None
    unfair_F: float | None


class BudgetSweepResponse(BaseModel):
    rows: list[BudgetRow]
    mode: str
    metric: Metric
    theta_c: float
    theta_f: float
    classifier_c: dict | None
    classifier_f: dict | None
    reversal: dict
    error_unfairness_tradeoff_corr: float | None


class ConditionsRequest(BaseModel):
    source: DatasetSource
    metric: Metric = Metric.PR
    bins: int = Field(default=20, ge=2)
    grid_size: int = 101
    feature: int | None = Field(default=None, ge=0)


class FeatureConditions(BaseModel):
    feature: int
    label_crossing: dict | None
    group_crossing: dict | None
    x_y: float | None
    x_g: float | None
    error_unimodality: dict | None
    unfairness_unimodality: dict | None
    conditional_independence_gap: list[float | None]
    undefined_reason: str | None


class ConditionsResponse(BaseModel):
    metric: Metric
    features: list[FeatureConditions]


class RunPayload(BaseModel):
    """One completed run directory, as parsed by the client."""

    name: str
    config: dict = {}
    summary: dict | None = None
    reversal: dict | None = None


class ReportRequest(BaseModel):
    runs: list[RunPayload] = Field(min_length=1)


class ReportRow(BaseModel):
    run: str
    mode: str
    feature: int | None
    metric: str | None
    theta_c: float | None
    theta_f: float | None
    selective: bool | None
    reversal_detected: bool | None
    reversal_magnitude: float | None


class ReportResponse(BaseModel):
    rows: list[ReportRow]
    selective_count: int
    total_with_thetas: int
    selective_fraction: str
