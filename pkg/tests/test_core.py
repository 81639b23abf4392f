import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairshift.core import (
    AgentRecord,
    CellSpec,
    ColumnSchema,
    Dataset,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    loads_dataset,
    normalize_feature,
    pearson,
    shuffle_split,
    write_dataset,
)
from fairshift.errors import (
    EmptyFile,
    InvalidSpec,
    MissingColumn,
    NonBinaryGroupOrLabel,
    UnparseableNumber,
    ZeroRange,
)

SCHEMA = ColumnSchema("g", "y", ("x",))


def test_load_three_row_csv():
    ds = loads_dataset("g,y,x\n0,0,0.1\n1,1,0.9\n0,1,0.5\n", SCHEMA)
    assert len(ds) == 3 and ds.dim == 1
    assert list(ds.groups) == [0, 1, 0]
    assert list(ds.labels) == [0, 1, 1]
    assert list(ds.features[:, 0]) == [0.1, 0.9, 0.5]


def test_load_missing_column():
    with pytest.raises(MissingColumn):
        loads_dataset("g,y,x\n0,0,0.1\n", ColumnSchema("g", "y", ("z",)))


def test_load_nonbinary_group_reports_row():
    text = "g,y,x\n" + "0,0,0.1\n" * 4 + "2,0,0.1\n"
    with pytest.raises(NonBinaryGroupOrLabel) as exc:
        loads_dataset(text, SCHEMA)
    assert exc.value.row == 5


def test_load_unparseable_number():
    with pytest.raises(UnparseableNumber) as exc:
        loads_dataset("g,y,x\n0,0,oops\n", SCHEMA)
    assert exc.value.row == 1 and exc.value.column == "x"


def test_load_empty_file():
    with pytest.raises(EmptyFile):
        loads_dataset("", SCHEMA)
    with pytest.raises(EmptyFile):
        loads_dataset("g,y,x\n", SCHEMA)


def test_agent_record_validation():
    with pytest.raises(InvalidSpec):
        AgentRecord(2, (0.1,), 0)
    with pytest.raises(InvalidSpec):
        AgentRecord(0, (math.nan,), 0)
    with pytest.raises(InvalidSpec):
        AgentRecord(0, (), 1)


def test_dataset_degenerate_label_flag():
    ds = Dataset([0, 1], [1, 1], [[0.1], [0.2]])
    assert not ds.has_both_labels
    assert Dataset([0, 1], [0, 1], [[0.1], [0.2]]).has_both_labels


def test_normalize_scales_and_flips():
    # negative correlation with the label forces the flip
    ds = Dataset([0, 1, 0], [1, 0, 0], [[2.0], [4.0], [6.0]])
    out = normalize_feature(ds, 0)
    assert list(out.features[:, 0]) == [1.0, 0.5, 0.0]
    assert pearson(out.features[:, 0], out.labels) >= 0


def test_normalize_leaves_positive_correlation():
    ds = Dataset([0, 1, 0], [0, 0, 1], [[0.0], [0.5], [1.0]])
    out = normalize_feature(ds, 0)
    assert list(out.features[:, 0]) == [0.0, 0.5, 1.0]


def test_normalize_zero_range():
    ds = Dataset([0, 1, 0], [0, 0, 1], [[3.0], [3.0], [3.0]])
    with pytest.raises(ZeroRange):
        normalize_feature(ds, 0)


def test_normalize_zero_label_variance_no_flip():
    ds = Dataset([0, 1], [1, 1], [[5.0], [1.0]])
    out = normalize_feature(ds, 0)
    assert list(out.features[:, 0]) == [1.0, 0.0]


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-50, 50), min_size=3, max_size=30).filter(lambda v: max(v) > min(v)),
    st.data(),
)
def test_normalize_idempotent(values, data):
    labels = data.draw(
        st.lists(st.integers(0, 1), min_size=len(values), max_size=len(values))
    )
    ds = Dataset([0] * len(values), labels, [[v] for v in values])
    once = normalize_feature(ds, 0)
    twice = normalize_feature(once, 0)
    np.testing.assert_allclose(twice.features, once.features, atol=1e-12)
    assert once.features[:, 0].min() == 0.0 and once.features[:, 0].max() == 1.0


def _equal_weight_spec(n, seed):
    cell = lambda loc: CellSpec(0.25, (loc,), (0.2,))
    return SyntheticSpec(
        cells={(0, 0): cell(0.2), (0, 1): cell(0.4), (1, 0): cell(0.6), (1, 1): cell(0.8)},
        sample_size=n,
        seed=seed,
    )


def test_generate_degenerate_cell():
    spec = SyntheticSpec(
        cells={
            (0, 0): CellSpec(0.0, (0.5,), (1e-12,)),
            (0, 1): CellSpec(0.0, (0.5,), (1e-12,)),
            (1, 0): CellSpec(0.0, (0.5,), (1e-12,)),
            (1, 1): CellSpec(1.0, (0.5,), (1e-12,)),
        },
        sample_size=10,
        seed=1,
    )
    ds = generate_synthetic(spec)
    assert list(ds.groups) == [1] * 10 and list(ds.labels) == [1] * 10
    np.testing.assert_allclose(ds.features[:, 0], 0.5, atol=1e-6)


def test_generate_cell_frequencies_within_multinomial_bound():
    # oracle: multinomial concentration, |count - n p| <= 5 sqrt(n)
    n = 4000
    ds = generate_synthetic(_equal_weight_spec(n, seed=7))
    bound = 5.0 * math.sqrt(n)
    for g in (0, 1):
        for y in (0, 1):
            count = int(np.sum((ds.groups == g) & (ds.labels == y)))
            assert abs(count - n * 0.25) <= bound


def test_generate_deterministic(tmp_path):
    a = generate_synthetic(_equal_weight_spec(500, seed=9))
    b = generate_synthetic(_equal_weight_spec(500, seed=9))
    write_dataset(tmp_path / "a.csv", a)
    write_dataset(tmp_path / "b.csv", b)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    c = generate_synthetic(_equal_weight_spec(500, seed=10))
    assert not np.array_equal(a.features, c.features)


def test_generate_invalid_specs():
    cells = {k: CellSpec(0.25, (0.5,), (0.2,)) for k in [(0, 0), (0, 1), (1, 0), (1, 1)]}
    with pytest.raises(InvalidSpec):
        generate_synthetic(SyntheticSpec(cells=cells, sample_size=0, seed=0))
    bad = dict(cells)
    bad[(1, 1)] = CellSpec(0.5, (0.5,), (0.2,))  # weights sum to 1.25
    with pytest.raises(InvalidSpec):
        generate_synthetic(SyntheticSpec(cells=bad, sample_size=10, seed=0))
    bad[(1, 1)] = CellSpec(0.25, (0.5,), (0.0,))  # nonpositive scale
    with pytest.raises(InvalidSpec):
        generate_synthetic(SyntheticSpec(cells=bad, sample_size=10, seed=0))


def test_write_load_round_trip(tmp_path):
    ds = generate_synthetic(_equal_weight_spec(200, seed=3))
    path = tmp_path / "ds.csv"
    write_dataset(path, ds)
    back = load_dataset(path, ColumnSchema("group", "label", ("x0",)))
    assert np.array_equal(back.groups, ds.groups)
    assert np.array_equal(back.labels, ds.labels)
    np.testing.assert_allclose(back.features, ds.features, atol=1e-12)


def test_write_moved_column(tmp_path):
    ds = Dataset([0, 1], [0, 1], [[0.1], [0.9]])
    path = tmp_path / "m.csv"
    write_dataset(path, ds, moved=[1, 0])
    lines = path.read_text().splitlines()
    assert lines[0] == "group,label,x0,moved"
    assert lines[1].endswith(",1") and lines[2].endswith(",0")


def test_shuffle_split_partitions():
    ds = generate_synthetic(_equal_weight_spec(100, seed=4))
    a, b = shuffle_split(ds, 0.3, seed=5)
    assert len(a) == 30 and len(b) == 70
    a2, b2 = shuffle_split(ds, 0.3, seed=5)
    assert np.array_equal(a.features, a2.features)
    merged = sorted(map(tuple, np.vstack([a.features, b.features])))
    assert merged == sorted(map(tuple, ds.features))
