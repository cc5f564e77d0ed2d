"""Dataset ingestion, synthetic trace generation, and the sparsity metric.

CSV formats (UTF-8, LF line endings, '.' decimal separator):

* appliance trace: header ``t,<name_1>,...,<name_N>``, one row per slot,
  per-appliance power in watts;
* states: header ``t,app_1,...,app_N``, entries in {0,1};
* meter: header ``t,power``;
* powers: header ``name,power``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, EstimationError
from .model import AppliancePowerVector, MeterSeries, StateMatrix, as_fleet
from .rng import stream

__all__ = [
    "ApplianceTrace",
    "SynthConfig",
    "binarize",
    "default_thresholds",
    "estimate_powers",
    "aggregate",
    "synthesize",
    "sparsity",
    "estimate_u_max",
    "read_trace_csv",
    "write_trace_csv",
    "read_states_csv",
    "write_states_csv",
    "read_meter_csv",
    "write_meter_csv",
    "read_powers_csv",
    "write_powers_csv",
]


@dataclass(frozen=True, eq=False)
class ApplianceTrace:
    """Per-appliance power samples over consecutive slots, in watts."""

    samples: np.ndarray  # (slots, appliances), nonnegative
    names: tuple[str, ...] = ()
    timestamps: np.ndarray | None = None

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-d sample array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("samples must be finite and nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        names = tuple(self.names) if self.names else tuple(f"app_{i + 1}" for i in range(arr.shape[1]))
        if len(names) != arr.shape[1]:
            raise ValueError(f"{len(names)} names for {arr.shape[1]} appliances")
        object.__setattr__(self, "names", names)
        ts = self.timestamps
        ts = np.arange(arr.shape[0], dtype=np.int64) if ts is None else np.array(ts, dtype=np.int64)
        if ts.shape != (arr.shape[0],):
            raise ValueError("one timestamp per slot required")
        ts.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)

    @property
    def slots(self) -> int:
        return int(self.samples.shape[0])

    @property
    def n(self) -> int:
        return int(self.samples.shape[1])


@dataclass(frozen=True)
class SynthConfig:
    """Synthetic scenario: fleet, horizon, switch sparsity, consumption jitter.

    ``target_sparsity`` is the probability that an appliance-slot does NOT
    flip between consecutive slots. ``consumption_jitter`` is the relative
    standard deviation of the on-consumption around its mean (0 keeps the
    draw exactly at the mean). ``initial_states`` defaults to a fair coin
    per appliance.
    """

    n_appliances: int
    horizon: int
    powers: tuple[float, ...]
    target_sparsity: float = 0.99
    consumption_jitter: float = 0.0
    initial_states: tuple[int, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if len(self.powers) != self.n_appliances:
            raise ValueError(f"{len(self.powers)} powers for {self.n_appliances} appliances")
        if not 0.0 <= self.target_sparsity <= 1.0:
            raise ValueError("target sparsity must lie in [0, 1]")
        if self.consumption_jitter < 0:
            raise ValueError("jitter must be nonnegative")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if self.initial_states is not None and len(self.initial_states) != self.n_appliances:
            raise ValueError("one initial state per appliance required")


def default_thresholds(trace: ApplianceTrace, fraction: float = 0.05) -> np.ndarray:
    """Per-appliance on/off threshold at a fraction of the observed maximum."""
    return fraction * trace.samples.max(axis=0)


def binarize(trace: ApplianceTrace, thresholds, ground_truth: bool = True) -> StateMatrix:
    """States from a trace: on iff the sample strictly exceeds its threshold."""
    th = np.broadcast_to(np.asarray(thresholds, dtype=np.float64), (trace.n,))
    if np.any(th < 0):
        raise ValueError("thresholds must be nonnegative")
    return StateMatrix.from_array((trace.samples > th).astype(np.float64), ground_truth=ground_truth)


def estimate_powers(trace: ApplianceTrace, states: StateMatrix) -> AppliancePowerVector:
    """Mean on-consumption per appliance over the slots where it is on."""
    arr = states.to_array()
    if arr.shape != trace.samples.shape:
        raise ValueError(f"shape mismatch: states {arr.shape} vs trace {trace.samples.shape}")
    means = []
    for i in range(trace.n):
        on = arr[:, i] == 1.0
        if not on.any():
            raise EstimationError(f"appliance {trace.names[i]!r} is never on; cannot estimate its power")
        means.append(float(trace.samples[on, i].mean()))
    return AppliancePowerVector(np.array(means), trace.names)


def aggregate(trace: ApplianceTrace, states: StateMatrix) -> MeterSeries:
    """Meter series: per-slot total of the on appliances' samples."""
    arr = states.to_array()
    if arr.shape != trace.samples.shape:
        raise ValueError(f"shape mismatch: states {arr.shape} vs trace {trace.samples.shape}")
    return MeterSeries((arr * trace.samples).sum(axis=1))


def synthesize(cfg: SynthConfig, rng: np.random.Generator | None = None):
    """Generate (ground-truth states, trace, meter series) for a scenario.

    The state matrix covers slots 0..horizon (the first column is the
    initial state). Each appliance-slot flips independently with probability
    ``1 - target_sparsity``. On-consumption is ``P_i * (1 + jitter * z)``
    with a standard normal z, floored at 0.
    """
    if rng is None:
        rng = stream(cfg.seed)
    n, horizon = cfg.n_appliances, cfg.horizon
    powers = np.asarray(cfg.powers, dtype=np.float64)
    if cfg.initial_states is None:
        x0 = (rng.random(n) < 0.5).astype(np.float64)
    else:
        x0 = np.asarray(cfg.initial_states, dtype=np.float64)
    states = np.empty((horizon + 1, n))
    states[0] = x0
    flips = rng.random((horizon, n)) < (1.0 - cfg.target_sparsity)
    for t in range(horizon):
        states[t + 1] = np.where(flips[t], 1.0 - states[t], states[t])
    if cfg.consumption_jitter > 0:
        factors = 1.0 + cfg.consumption_jitter * rng.standard_normal((horizon + 1, n))
        consumption = np.maximum(powers * factors, 0.0)
    else:
        consumption = np.broadcast_to(powers, (horizon + 1, n)).copy()
    trace = ApplianceTrace(states * consumption, tuple(f"app_{i + 1}" for i in range(n)))
    matrix = StateMatrix.from_array(states, ground_truth=True)
    return matrix, trace, aggregate(trace, matrix)


def sparsity(states: StateMatrix) -> float:
    """Fraction of appliance-slots that do not flip between consecutive slots."""
    arr = states.to_array() if isinstance(states, StateMatrix) else np.asarray(states, dtype=np.float64)
    slots = arr.shape[0]
    if slots < 2:
        raise ValueError("need at least two slots to measure sparsity")
    flips = np.count_nonzero(arr[1:] != arr[:-1])
    return 1.0 - flips / (arr.shape[1] * (slots - 1))


def estimate_u_max(states: StateMatrix) -> int:
    """Largest per-step switch count observed in a ground-truth matrix.

    Used as the sparsity budget when no explicit value is configured; at
    least 1 even for a switch-free trace.
    """
    arr = states.to_array() if isinstance(states, StateMatrix) else np.asarray(states, dtype=np.float64)
    if arr.shape[0] < 2:
        return 1
    per_step = np.count_nonzero(arr[1:] != arr[:-1], axis=1)
    return max(1, int(per_step.max()))


# ---------------------------------------------------------------------------
# CSV input/output


def _open_read(path):
    try:
        return Path(path).open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def _read_table(path, expected_first: str):
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if not header or header[0] != expected_first:
            raise DataError(f"{path}: expected header starting with {expected_first!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(x) for x in row])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: no data rows")
    return header, np.asarray(rows, dtype=np.float64)


def _write_table(path, header: list[str], rows) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, (int, float, np.floating)) else x for x in row])


def read_trace_csv(path) -> ApplianceTrace:
    header, data = _read_table(path, "t")
    return ApplianceTrace(data[:, 1:], tuple(header[1:]), data[:, 0].astype(np.int64))


def write_trace_csv(path, trace: ApplianceTrace) -> None:
    rows = ([int(t)] + list(row) for t, row in zip(trace.timestamps, trace.samples))
    _write_table(path, ["t", *trace.names], rows)


def read_states_csv(path) -> StateMatrix:
    _, data = _read_table(path, "t")
    values = data[:, 1:]
    if not np.all((values == 0.0) | (values == 1.0)):
        raise DataError(f"{path}: state entries must be 0 or 1")
    return StateMatrix.from_array(values, ground_truth=True)


def write_states_csv(path, states: StateMatrix, start_slot: int = 0) -> None:
    arr = states.to_array() if isinstance(states, StateMatrix) else np.asarray(states)
    header = ["t", *(f"app_{i + 1}" for i in range(arr.shape[1]))]
    rows = ([start_slot + t] + [int(v) for v in row] for t, row in enumerate(arr))
    _write_table(path, header, rows)


def read_meter_csv(path) -> MeterSeries:
    header, data = _read_table(path, "t")
    if len(header) != 2 or header[1] != "power":
        raise DataError(f"{path}: expected header t,power")
    return MeterSeries(data[:, 1])


def write_meter_csv(path, series: MeterSeries) -> None:
    readings = series.readings if isinstance(series, MeterSeries) else np.asarray(series)
    rows = ([t, float(y)] for t, y in enumerate(readings))
    _write_table(path, ["t", "power"], rows)


def read_powers_csv(path) -> AppliancePowerVector:
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["name", "power"]:
            raise DataError(f"{path}: expected header name,power")
        names, powers = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"{path}:{lineno}: expected 2 fields")
            names.append(row[0])
            try:
                powers.append(float(row[1]))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    if not powers:
        raise DataError(f"{path}: no data rows")
    try:
        return AppliancePowerVector(np.asarray(powers), tuple(names))
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_powers_csv(path, fleet) -> None:
    fleet = as_fleet(fleet)
    rows = ([name, float(p)] for name, p in zip(fleet.names, fleet.powers))
    _write_table(path, ["name", "power"], rows)
