"""Dataset ingestion and CSV writers.

A dataset directory holds:

* ``building_<id>.csv`` with columns (timestamp, hour, load_kw, solar_kw),
  one file per building;
* ``district.csv`` with columns (timestamp, price, carbon_intensity);
* ``batteries.csv`` with columns (id, e_max, e_min, p_charge_max,
  p_discharge_max, e_initial, eta_charge, eta_discharge).

Timestamps are absolute hour indices, hourly and contiguous; the ``hour``
column is the hour of day and must equal timestamp mod 24.  One PV
generation device is derived per building, with the nameplate set to the
observed solar maximum.  All writers emit byte-stable output for identical
inputs (floats via repr, fixed ordering, no wall-clock content).
"""

from __future__ import annotations

import csv
import io
import os
from pathlib import Path

import numpy as np

from .domain import (
    BuildingSeries,
    GenerationDevice,
    MarketSeries,
    ProblemInstance,
    StorageDevice,
    TimeGrid,
)


class DatasetError(ValueError):
    """A dataset file violates the documented schema."""


def _fmt(x: float) -> str:
    return repr(float(x))


def _read_rows(path: Path, columns: tuple[str, ...]) -> list[dict]:
    if not path.exists():
        raise DatasetError(f"{path}: file missing")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in columns if c not in (reader.fieldnames or [])]
        if missing:
            raise DatasetError(f"{path}: missing columns {missing}")
        return list(reader)


def _float_cell(path: Path, row_no: int, name: str, raw: str) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise DatasetError(f"{path} row {row_no}: column {name!r} is not a number: {raw!r}") from None


def _check_timestamps(path: Path, stamps: list[int], expect_start: int | None) -> int:
    for i in range(1, len(stamps)):
        if stamps[i] != stamps[i - 1] + 1:
            raise DatasetError(f"{path} row {i + 1}: timestamps not hourly-contiguous at {stamps[i]}")
    if expect_start is not None and stamps and stamps[0] != expect_start:
        raise DatasetError(f"{path}: starts at {stamps[0]}, expected {expect_start}")
    return stamps[0] if stamps else 0


def load_dataset(path: str | os.PathLike) -> ProblemInstance:
    """Read a dataset directory into a ProblemInstance."""
    root = Path(path)
    if not root.is_dir():
        raise DatasetError(f"{root}: not a directory")

    building_files = sorted(root.glob("building_*.csv"))
    if not building_files:
        raise DatasetError(f"{root}: no building_<id>.csv files")

    buildings: list[BuildingSeries] = []
    generators: list[GenerationDevice] = []
    start = None
    length = None
    for bf in building_files:
        rows = _read_rows(bf, ("timestamp", "hour", "load_kw", "solar_kw"))
        stamps = [int(_float_cell(bf, i + 2, "timestamp", r["timestamp"])) for i, r in enumerate(rows)]
        start = _check_timestamps(bf, stamps, start)
        load = np.empty(len(rows))
        solar = np.empty(len(rows))
        for i, r in enumerate(rows):
            hour = int(_float_cell(bf, i + 2, "hour", r["hour"]))
            if hour != stamps[i] % 24:
                raise DatasetError(f"{bf} row {i + 2}: hour {hour} != timestamp mod 24")
            load[i] = _float_cell(bf, i + 2, "load_kw", r["load_kw"])
            solar[i] = _float_cell(bf, i + 2, "solar_kw", r["solar_kw"])
            if load[i] < 0:
                raise DatasetError(f"{bf} row {i + 2}: negative load {load[i]}")
            if solar[i] < 0:
                raise DatasetError(f"{bf} row {i + 2}: negative solar {solar[i]}")
        if length is None:
            length = len(rows)
        elif len(rows) != length:
            raise DatasetError(f"{bf}: {len(rows)} rows, other files have {length}")
        bid = bf.stem.removeprefix("building_")
        buildings.append(BuildingSeries(bid, load, solar))
        generators.append(GenerationDevice(f"pv_{bid}", np.zeros(len(rows)), float(solar.max())))

    dpath = root / "district.csv"
    rows = _read_rows(dpath, ("timestamp", "price", "carbon_intensity"))
    stamps = [int(_float_cell(dpath, i + 2, "timestamp", r["timestamp"])) for i, r in enumerate(rows)]
    _check_timestamps(dpath, stamps, start)
    if len(rows) != length:
        raise DatasetError(f"{dpath}: {len(rows)} rows, building files have {length}")
    price = np.array([_float_cell(dpath, i + 2, "price", r["price"]) for i, r in enumerate(rows)])
    carbon = np.array(
        [_float_cell(dpath, i + 2, "carbon_intensity", r["carbon_intensity"]) for i, r in enumerate(rows)]
    )
    if np.any(price < 0) or np.any(carbon < 0):
        raise DatasetError(f"{dpath}: negative price or carbon intensity")

    bpath = root / "batteries.csv"
    storages: list[StorageDevice] = []
    if bpath.exists():
        cols = ("id", "e_max", "e_min", "p_charge_max", "p_discharge_max", "e_initial", "eta_charge", "eta_discharge")
        for i, r in enumerate(_read_rows(bpath, cols)):
            storages.append(
                StorageDevice(
                    id=str(r["id"]),
                    e_min=_float_cell(bpath, i + 2, "e_min", r["e_min"]),
                    e_max=_float_cell(bpath, i + 2, "e_max", r["e_max"]),
                    p_charge_max=_float_cell(bpath, i + 2, "p_charge_max", r["p_charge_max"]),
                    p_discharge_max=_float_cell(bpath, i + 2, "p_discharge_max", r["p_discharge_max"]),
                    e_initial=_float_cell(bpath, i + 2, "e_initial", r["e_initial"]),
                    eta_charge=_float_cell(bpath, i + 2, "eta_charge", r["eta_charge"]),
                    eta_discharge=_float_cell(bpath, i + 2, "eta_discharge", r["eta_discharge"]),
                )
            )

    return ProblemInstance(
        grid=TimeGrid(start_index=start or 0, horizon_T=length or 0),
        buildings=tuple(buildings),
        generators=tuple(generators),
        storages=tuple(storages),
        market=MarketSeries(price, carbon),
    )


def write_dataset(instance: ProblemInstance, path: str | os.PathLike) -> None:
    """Write an instance as a dataset directory (inverse of load_dataset)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    stamps = instance.grid.indices
    hours = instance.grid.hour_of_day
    for b in instance.buildings:
        with open(root / f"building_{b.id}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["timestamp", "hour", "load_kw", "solar_kw"])
            for i in range(instance.n_steps):
                w.writerow([stamps[i], hours[i], _fmt(b.load[i]), _fmt(b.solar_capacity[i])])
    with open(root / "district.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "price", "carbon_intensity"])
        for i in range(instance.n_steps):
            w.writerow([stamps[i], _fmt(instance.market.price[i]), _fmt(instance.market.carbon_intensity[i])])
    with open(root / "batteries.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "e_max", "e_min", "p_charge_max", "p_discharge_max", "e_initial", "eta_charge", "eta_discharge"])
        for s in instance.storages:
            w.writerow([
                s.id, _fmt(s.e_max), _fmt(s.e_min), _fmt(s.p_charge_max), _fmt(s.p_discharge_max),
                _fmt(s.e_initial), _fmt(s.eta_charge), _fmt(s.eta_discharge),
            ])


def write_csv(path: str | os.PathLike, header: list[str], rows: list) -> None:
    """Byte-stable CSV writer: floats via repr, newline-normalized."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    Path(path).write_text(buf.getvalue())
