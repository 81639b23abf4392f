"""Data model, CSV ingestion, feature normalization, synthetic generators.

A Dataset is a finite sample standing in for a population: group bit, binary
label, and a float feature matrix. All downstream expectations are plain
means over the records, so Dataset is deliberately a thin, immutable wrapper
around numpy arrays.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyFile,
    InvalidSpec,
    MissingColumn,
    NonBinaryGroupOrLabel,
    UnparseableNumber,
    ZeroRange,
)
from .rng import generator

# Rejection sampling for truncated Gaussians gives up after this many tries
# per draw and clamps to the interval instead.
TRUNC_REJECTION_CAP = 10_000


@dataclass(frozen=True)
class AgentRecord:
    """One individual: group bit, feature vector, true label."""

    group: int
    features: tuple[float, ...]
    label: int

    def __post_init__(self):
        if self.group not in (0, 1):
            raise InvalidSpec(f"group must be 0 or 1, got {self.group}")
        if self.label not in (0, 1):
            raise InvalidSpec(f"label must be 0 or 1, got {self.label}")
        if len(self.features) < 1:
            raise InvalidSpec("feature vector must have length >= 1")
        if not all(np.isfinite(v) for v in self.features):
            raise InvalidSpec("features must be finite")


class Dataset:
    """Ordered sample of agent records with named feature columns.

    Immutable after construction; the backing arrays are locked so a Dataset
    can be shared freely across concurrent readers.
    """

    def __init__(self, groups, labels, features, feature_names=None):
        groups = np.asarray(groups, dtype=np.int8)
        labels = np.asarray(labels, dtype=np.int8)
        features = np.asarray(features, dtype=np.float64)
        if features.ndim == 1:
            features = features[:, None]
        n = len(groups)
        if n == 0:
            raise InvalidSpec("dataset must be nonempty")
        if len(labels) != n or features.shape[0] != n:
            raise InvalidSpec("groups, labels and features must align")
        if not np.isin(groups, (0, 1)).all():
            raise InvalidSpec("groups must be 0/1")
        if not np.isin(labels, (0, 1)).all():
            raise InvalidSpec("labels must be 0/1")
        if not np.isfinite(features).all():
            raise InvalidSpec("features must be finite")
        if feature_names is None:
            feature_names = [f"x{j}" for j in range(features.shape[1])]
        if len(feature_names) != features.shape[1]:
            raise InvalidSpec("feature_names must match feature dimension")
        for a in (groups, labels, features):
            a.setflags(write=False)
        self.groups = groups
        self.labels = labels
        self.features = features
        self.feature_names = list(feature_names)

    @classmethod
    def from_records(cls, records: list[AgentRecord], feature_names=None) -> "Dataset":
        if not records:
            raise InvalidSpec("dataset must be nonempty")
        d = len(records[0].features)
        if any(len(r.features) != d for r in records):
            raise InvalidSpec("all records must share one feature dimension")
        return cls(
            [r.group for r in records],
            [r.label for r in records],
            [r.features for r in records],
            feature_names,
        )

    def __len__(self) -> int:
        return len(self.groups)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def has_both_labels(self) -> bool:
        """False marks the dataset degenerate: metrics conditioned on the
        missing label are undefined."""
        return bool(self.labels.min() == 0 and self.labels.max() == 1)

    @property
    def has_both_groups(self) -> bool:
        return bool(self.groups.min() == 0 and self.groups.max() == 1)

    def record(self, i: int) -> AgentRecord:
        return AgentRecord(
            int(self.groups[i]), tuple(float(v) for v in self.features[i]), int(self.labels[i])
        )

    def records(self) -> list[AgentRecord]:
        return [self.record(i) for i in range(len(self))]

    def with_features(self, features) -> "Dataset":
        """Same agents, new feature matrix (used by the strategic simulator)."""
        return Dataset(self.groups.copy(), self.labels.copy(), features, self.feature_names)

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size == 0:
            raise InvalidSpec("subset must be nonempty")
        return Dataset(
            self.groups[indices],
            self.labels[indices],
            self.features[indices],
            self.feature_names,
        )


@dataclass(frozen=True)
class ColumnSchema:
    """Maps CSV header names onto the group / label / feature roles."""

    group_col: str
    label_col: str
    feature_cols: tuple[str, ...]

    def __post_init__(self):
        if len(self.feature_cols) < 1:
            raise InvalidSpec("schema needs at least one feature column")


def load_dataset(path, schema: ColumnSchema) -> Dataset:
    """Parse a UTF-8, comma-separated, headered CSV into a Dataset.

    Rows keep file order. Group/label cells must be exactly "0" or "1";
    feature cells must parse as floats. Row numbers in errors are 1-based
    data rows (the header is row 0).
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return _read_csv(fh, schema)


def loads_dataset(text: str, schema: ColumnSchema) -> Dataset:
    return _read_csv(io.StringIO(text), schema)


def _read_csv(fh, schema: ColumnSchema) -> Dataset:
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise EmptyFile("no header row") from None
    index = {name: i for i, name in enumerate(header)}
    for col in (schema.group_col, schema.label_col, *schema.feature_cols):
        if col not in index:
            raise MissingColumn(col)
    gi = index[schema.group_col]
    li = index[schema.label_col]
    fi = [index[c] for c in schema.feature_cols]

    groups, labels, rows = [], [], []
    for rownum, row in enumerate(reader, start=1):
        if not row:
            continue
        groups.append(_parse_bit(row, rownum, gi, schema.group_col))
        labels.append(_parse_bit(row, rownum, li, schema.label_col))
        feats = []
        for j, col in zip(fi, schema.feature_cols):
            cell = row[j].strip()
            try:
                v = float(cell)
            except ValueError:
                raise UnparseableNumber(rownum, col, cell) from None
            if not np.isfinite(v):
                raise UnparseableNumber(rownum, col, cell)
            feats.append(v)
        rows.append(feats)
    if not rows:
        raise EmptyFile("no data rows")
    return Dataset(groups, labels, rows, list(schema.feature_cols))


def _parse_bit(row, rownum, col_idx, col_name) -> int:
    cell = row[col_idx].strip()
    if cell == "0":
        return 0
    if cell == "1":
        return 1
    raise NonBinaryGroupOrLabel(rownum, col_name, cell)


def write_dataset(path, ds: Dataset, moved=None) -> None:
    """Write group, label, then feature columns; floats use repr so a
    round-trip through load_dataset reproduces values exactly.

    `moved` (optional 0/1 array) appends a `moved` column; this is how
    strategically induced datasets are serialized.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = ["group", "label", *ds.feature_names]
        if moved is not None:
            header.append("moved")
        writer.writerow(header)
        for i in range(len(ds)):
            row = [int(ds.groups[i]), int(ds.labels[i])]
            row += [repr(float(v)) for v in ds.features[i]]
            if moved is not None:
                row.append(int(moved[i]))
            writer.writerow(row)


def pearson(x, y) -> float:
    """Pearson correlation; 0.0 when either side has zero variance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xd = x - x.mean()
    yd = y - y.mean()
    denom = np.sqrt((xd * xd).sum() * (yd * yd).sum())
    if denom == 0.0:
        return 0.0
    return float((xd * yd).sum() / denom)


def normalize_feature(ds: Dataset, j: int) -> Dataset:
    """Min-max scale feature j to [0,1]; flip x := 1-x if Cor(x, y) < 0.

    After the call the feature is positively (or zero) correlated with the
    label. Applying it twice equals applying it once.
    """
    if not 0 <= j < ds.dim:
        raise InvalidSpec(f"feature index {j} out of range")
    col = ds.features[:, j]
    lo, hi = float(col.min()), float(col.max())
    if hi == lo:
        raise ZeroRange(j)
    scaled = (col - lo) / (hi - lo)
    if pearson(scaled, ds.labels) < 0.0:
        scaled = 1.0 - scaled
    features = ds.features.copy()
    features[:, j] = scaled
    return ds.with_features(features)


def normalize_all(ds: Dataset) -> Dataset:
    for j in range(ds.dim):
        ds = normalize_feature(ds, j)
    return ds


@dataclass(frozen=True)
class CellSpec:
    """Feature distribution for one (group, label) cell: a per-dimension
    truncated-to-[0,1] Gaussian."""

    weight: float
    locations: tuple[float, ...]
    scales: tuple[float, ...]


@dataclass(frozen=True)
class SyntheticSpec:
    """Four-cell mixture over (group, label), cells keyed (g, y)."""

    cells: dict = field(default_factory=dict)
    sample_size: int = 1000
    seed: int = 0

    def validate(self) -> None:
        keys = {(0, 0), (0, 1), (1, 0), (1, 1)}
        if set(self.cells.keys()) != keys:
            raise InvalidSpec("spec must define exactly the four (group,label) cells")
        total = 0.0
        dims = set()
        for key, cell in self.cells.items():
            if cell.weight < 0:
                raise InvalidSpec(f"cell {key} has negative weight")
            total += cell.weight
            if len(cell.locations) != len(cell.scales):
                raise InvalidSpec(f"cell {key}: locations and scales must align")
            if any(s <= 0 for s in cell.scales):
                raise InvalidSpec(f"cell {key}: scales must be positive")
            dims.add(len(cell.locations))
        if len(dims) != 1:
            raise InvalidSpec("all cells must share one feature dimension")
        if abs(total - 1.0) > 1e-12:
            raise InvalidSpec(f"cell weights sum to {total}, expected 1")
        if self.sample_size <= 0:
            raise InvalidSpec("sample_size must be positive")

    @property
    def dim(self) -> int:
        return len(next(iter(self.cells.values())).locations)


def _sample_truncated_gaussian(rng, loc, scale, size):
    """Rejection-sample N(loc, scale) truncated to [0,1]; clamp after
    TRUNC_REJECTION_CAP failed attempts per draw."""
    out = np.empty(size, dtype=np.float64)
    pending = np.arange(size)
    for _ in range(TRUNC_REJECTION_CAP):
        draws = rng.normal(loc, scale, size=len(pending))
        ok = (draws >= 0.0) & (draws <= 1.0)
        out[pending[ok]] = draws[ok]
        pending = pending[~ok]
        if len(pending) == 0:
            return out
    out[pending] = np.clip(rng.normal(loc, scale, size=len(pending)), 0.0, 1.0)
    return out


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Materialize the mixture: exactly sample_size records, deterministic
    for a fixed seed."""
    spec.validate()
    rng = generator(spec.seed)
    keys = [(0, 0), (0, 1), (1, 0), (1, 1)]
    weights = np.array([spec.cells[k].weight for k in keys])
    cell_idx = rng.choice(4, size=spec.sample_size, p=weights / weights.sum())
    groups = np.array([keys[c][0] for c in cell_idx], dtype=np.int8)
    labels = np.array([keys[c][1] for c in cell_idx], dtype=np.int8)
    features = np.empty((spec.sample_size, spec.dim), dtype=np.float64)
    for c, key in enumerate(keys):
        mask = cell_idx == c
        count = int(mask.sum())
        if count == 0:
            continue
        cell = spec.cells[key]
        for d in range(spec.dim):
            features[mask, d] = _sample_truncated_gaussian(
                rng, cell.locations[d], cell.scales[d], count
            )
    names = [f"x{j}" for j in range(spec.dim)]
    return Dataset(groups, labels, features, names)


def shuffle_split(ds: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded shuffle split; `fraction` of records go to the first part."""
    if not 0.0 < fraction < 1.0:
        raise InvalidSpec("fraction must be in (0, 1)")
    rng = generator(seed)
    order = rng.permutation(len(ds))
    cut = int(round(fraction * len(ds)))
    cut = min(max(cut, 1), len(ds) - 1)
    return ds.subset(order[:cut]), ds.subset(order[cut:])
