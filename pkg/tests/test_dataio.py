import numpy as np
import pytest

from vppdispatch.dataio import DatasetError, load_dataset, write_dataset
from vppdispatch.domain import validate_instance
from vppdispatch.synthetic import SyntheticSpec, generate_synthetic


@pytest.fixture
def dataset_dir(tmp_path):
    inst = generate_synthetic(SyntheticSpec(days=2, n_buildings=1, seed=0))
    root = tmp_path / "ds"
    write_dataset(inst, root)
    return root, inst


def test_round_trip_matches_original(dataset_dir):
    root, inst = dataset_dir
    back = load_dataset(root)
    assert back.n_steps == 48
    assert len(back.buildings) == 1
    assert np.array_equal(back.buildings[0].load, inst.buildings[0].load)
    assert np.array_equal(back.market.price, inst.market.price)
    assert back.storages == inst.storages
    assert validate_instance(back) == []


def test_minimal_valid_dataset(dataset_dir):
    root, _ = dataset_dir
    inst = load_dataset(root)
    assert inst.grid.horizon_T == 48
    assert inst.generators[0].p_max_capacity == pytest.approx(
        float(inst.buildings[0].solar_capacity.max())
    )


def test_timestamp_gap_names_row(dataset_dir):
    root, _ = dataset_dir
    path = root / "building_b0.csv"
    lines = path.read_text().splitlines()
    parts = lines[30].split(",")
    parts[0] = str(int(parts[0]) + 5)  # open a gap at data row 30 (file line 31)
    lines[30] = ",".join(parts)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match="contiguous"):
        load_dataset(root)


def test_negative_load_rejected(dataset_dir):
    root, _ = dataset_dir
    path = root / "building_b0.csv"
    lines = path.read_text().splitlines()
    parts = lines[10].split(",")
    parts[2] = "-3.0"
    lines[10] = ",".join(parts)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match="negative load"):
        load_dataset(root)


def test_missing_column_rejected(dataset_dir):
    root, _ = dataset_dir
    path = root / "district.csv"
    lines = path.read_text().splitlines()
    lines[0] = "timestamp,price"
    path.write_text("\n".join(l.rsplit(",", 1)[0] for l in lines) + "\n")
    with pytest.raises(DatasetError, match="missing columns"):
        load_dataset(root)


def test_non_numeric_cell_rejected(dataset_dir):
    root, _ = dataset_dir
    path = root / "district.csv"
    lines = path.read_text().splitlines()
    parts = lines[5].split(",")
    parts[1] = "abc"
    lines[5] = ",".join(parts)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match="not a number"):
        load_dataset(root)


def test_hour_column_must_match_timestamp(dataset_dir):
    root, _ = dataset_dir
    path = root / "building_b0.csv"
    lines = path.read_text().splitlines()
    parts = lines[7].split(",")
    parts[1] = str((int(parts[1]) + 1) % 24)
    lines[7] = ",".join(parts)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match="hour"):
        load_dataset(root)


def test_missing_directory():
    with pytest.raises(DatasetError, match="not a directory"):
        load_dataset("/nonexistent/nowhere")


def test_write_is_byte_stable(tmp_path):
    inst = generate_synthetic(SyntheticSpec(days=2, n_buildings=2, seed=5))
    a, b = tmp_path / "a", tmp_path / "b"
    write_dataset(inst, a)
    write_dataset(inst, b)
    for f in sorted(a.iterdir()):
        assert f.read_bytes() == (b / f.name).read_bytes()
