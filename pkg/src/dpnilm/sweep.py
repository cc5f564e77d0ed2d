"""Monte Carlo privacy sweeps: accuracy vs epsilon with bound overlays.

A sweep runs ``trials`` independent pipelines per epsilon (scenario ->
noise injection -> decoding -> accuracy), aggregates mean and standard
deviation, and attaches the matching closed-form bounds. Randomness is
derived per (epsilon index, trial) from the master seed, so parallel and
serial executions produce byte-identical CSVs; the scenario stream depends
only on the trial index, so sweeps that differ solely in mechanism see
identical data. ``NILM_DP_THREADS`` caps the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bounds import c_of_p, hierarchical_bounds, multi_shot_bounds, one_shot_bounds
from .dataio import SynthConfig, read_meter_csv, read_powers_csv, read_states_csv, synthesize
from .errors import DataError
from .hierarchy import decompose, hierarchical_infer
from .inference import accuracy_multi_shot, multi_shot_infer
from .mechanisms import inject_noise
from .model import (
    AppliancePowerVector,
    DpConfig,
    Mechanism,
    MeterSeries,
    SensitivityParams,
    StateMatrix,
    as_fleet,
)
from .rng import stream

__all__ = ["SweepConfig", "SweepRow", "run_sweep", "write_rows_csv", "render_svg", "CSV_HEADER"]

MODES = ("one-shot", "multi-shot", "hierarchical")
CSV_HEADER = "epsilon,ln_inv_epsilon,mean_accuracy,std_accuracy,lower_bound,upper_bound,trials"

# stream labels
_SCENE, _NOISE, _ROUND = 1, 2, 3


@dataclass(frozen=True)
class SweepConfig:
    """Everything a sweep needs; see the README for the config-file keys."""

    epsilon_grid: tuple[float, ...]
    trials: int
    mode: str
    mechanism: Mechanism
    sens: SensitivityParams
    master_seed: int = 0
    synth: SynthConfig | None = None
    meter_csv: str | None = None
    states_csv: str | None = None
    powers_csv: str | None = None
    c_override: float | None = None
    bound_variant: str = "as-stated"
    correction_tolerance: float | None = None

    def __post_init__(self):
        grid = tuple(float(e) for e in self.epsilon_grid)
        if not grid or any(not e > 0 for e in grid):
            raise ValueError("epsilon grid must be nonempty and strictly positive")
        object.__setattr__(self, "epsilon_grid", grid)
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not isinstance(self.mechanism, Mechanism):
            object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        csv_given = (self.meter_csv, self.states_csv, self.powers_csv)
        if self.synth is None and any(p is None for p in csv_given):
            raise ValueError("provide either a synthetic config or meter/states/powers CSV paths")


@dataclass(frozen=True)
class SweepRow:
    """One grid point: empirical accuracy moments plus clamped bounds."""

    epsilon: float
    ln_inv_epsilon: float
    mean_accuracy: float
    std_accuracy: float
    clamped_lower: float
    clamped_upper: float
    trials: int


def default_epsilon_grid(points: int = 16, lo: float = 1e-2, hi: float = 1e2) -> tuple[float, ...]:
    """Log-spaced grid spanning both the clamped-zero and near-one regimes."""
    return tuple(float(e) for e in np.geomspace(lo, hi, points))


class _Scenario:
    """Ground truth and clean meter data for one trial."""

    __slots__ = ("truth", "meter")

    def __init__(self, truth: StateMatrix, meter: MeterSeries):
        self.truth = truth
        self.meter = meter


def _csv_scenario(cfg: SweepConfig) -> tuple[AppliancePowerVector, _Scenario]:
    fleet = read_powers_csv(cfg.powers_csv)
    truth = read_states_csv(cfg.states_csv)
    meter = read_meter_csv(cfg.meter_csv)
    if truth.n != fleet.n:
        raise DataError(f"states cover {truth.n} appliances, powers {fleet.n}")
    if meter.readings.size != truth.slots:
        raise DataError(
            f"meter has {meter.readings.size} readings but states cover {truth.slots} slots"
        )
    if truth.slots < 2:
        raise DataError("need at least two slots (initial state plus one step)")
    return fleet, _Scenario(truth, meter)


def _one_shot_accuracy(fleet: AppliancePowerVector, truth_arr: np.ndarray,
                       noisy: MeterSeries, delta: float,
                       rng: np.random.Generator) -> float:
    truth_deltas = np.ascontiguousarray(np.abs(np.diff(truth_arr, axis=0)))
    horizon = truth_deltas.shape[0]
    uniforms = rng.random((horizon, fleet.n))
    work = np.empty(fleet.n)
    return float(kernels.one_shot_trial(
        fleet.powers, fleet.order_desc, noisy.readings, truth_deltas,
        float(delta), uniforms, work,
    ))


def run_sweep(cfg: SweepConfig) -> list[SweepRow]:
    """Run the full sweep; rows come back sorted by ascending ln(1/epsilon)."""
    if cfg.synth is not None:
        fleet = as_fleet(cfg.synth.powers)
        scenario_cache: dict[int, _Scenario] = {}

        def scenario(trial: int) -> _Scenario:
            found = scenario_cache.get(trial)
            if found is None:
                truth, _, meter = synthesize(cfg.synth, stream(cfg.master_seed, _SCENE, trial))
                found = scenario_cache[trial] = _Scenario(truth, meter)
            return found
    else:
        fleet, fixed = _csv_scenario(cfg)

        def scenario(trial: int) -> _Scenario:
            return fixed

    grid = sorted(set(cfg.epsilon_grid), reverse=True)  # ascending ln(1/eps)
    delta = cfg.sens.delta

    def run_trial(eps_idx: int, epsilon: float, trial: int) -> float:
        try:
            scene = scenario(trial)
            dp = DpConfig(epsilon, delta / 2.0, cfg.mechanism, seed=0)
            noisy = inject_noise(scene.meter, dp, stream(cfg.master_seed, _NOISE, eps_idx, trial))
            round_rng = stream(cfg.master_seed, _ROUND, eps_idx, trial)
            truth_arr = scene.truth.to_array()
            if cfg.mode == "one-shot":
                return _one_shot_accuracy(fleet, truth_arr, noisy, delta, round_rng)
            infer = multi_shot_infer if cfg.mode == "multi-shot" else hierarchical_infer
            result = infer(truth_arr[0], noisy, fleet, cfg.sens, round_rng,
                           cfg.correction_tolerance)
            return accuracy_multi_shot(result.states, truth_arr[1:])
        except DataError as exc:
            raise DataError(f"epsilon {epsilon:g}, trial {trial}: {exc}") from exc

    tasks = [(ei, eps, trial) for ei, eps in enumerate(grid) for trial in range(cfg.trials)]
    accs = np.empty(len(tasks))
    threads = int(os.environ.get("NILM_DP_THREADS", "1") or "1")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for i, acc in enumerate(pool.map(lambda t: run_trial(*t), tasks)):
                accs[i] = acc
    else:
        for i, task in enumerate(tasks):
            accs[i] = run_trial(*task)

    c_val = c_of_p(fleet, cfg.sens.u_max) if cfg.c_override is None else float(cfg.c_override)
    horizon = scenario(0).truth.slots - 1
    hierarchies = decompose(fleet, delta, cfg.sens.u_max) if cfg.mode == "hierarchical" else None

    rows = []
    for ei, eps in enumerate(grid):
        chunk = accs[ei * cfg.trials:(ei + 1) * cfg.trials]
        if cfg.mode == "one-shot":
            rep = one_shot_bounds(delta, eps, fleet.n, c_val, fleet.l2_norm)
        elif cfg.mode == "multi-shot":
            rep = multi_shot_bounds(delta, eps, fleet.n, horizon, c_val,
                                    fleet.l2_norm, cfg.bound_variant)
        else:
            rep = hierarchical_bounds(hierarchies, delta, eps, horizon,
                                      cfg.sens.u_max, c_val, cfg.bound_variant)
        rows.append(SweepRow(
            epsilon=eps,
            ln_inv_epsilon=-math.log(eps),
            mean_accuracy=float(chunk.mean()),
            std_accuracy=float(chunk.std(ddof=1)) if cfg.trials > 1 else 0.0,
            clamped_lower=rep.clamped_lower,
            clamped_upper=rep.clamped_upper,
            trials=cfg.trials,
        ))
    return rows


def write_rows_csv(rows, path) -> None:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            repr(r.epsilon), repr(r.ln_inv_epsilon), repr(r.mean_accuracy),
            repr(r.std_accuracy), repr(r.clamped_lower), repr(r.clamped_upper),
            str(r.trials),
        ]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def render_svg(rows, path, width: int = 640, height: int = 400) -> None:
    """Minimal line chart: mean accuracy and clamped bounds vs ln(1/epsilon)."""
    pad = 50
    xs = [r.ln_inv_epsilon for r in rows]
    x_lo, x_hi = min(xs), max(xs)
    span = (x_hi - x_lo) or 1.0

    def px(x: float) -> float:
        return pad + (x - x_lo) / span * (width - 2 * pad)

    def py(y: float) -> float:
        y = min(1.0, max(0.0, y))
        return height - pad - y * (height - 2 * pad)

    def polyline(values, color):
        pts = " ".join(
            f"{px(x):.1f},{py(v):.1f}" for x, v in zip(xs, values) if not math.isnan(v)
        )
        return f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        polyline([r.clamped_lower for r in rows], "#888888"),
        polyline([r.clamped_upper for r in rows], "#888888"),
        polyline([r.mean_accuracy for r in rows], "#1f6fb2"),
        f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" font-size="12">ln(1/epsilon)</text>',
        f'<text x="14" y="{height / 2:.0f}" font-size="12" transform="rotate(-90 14 {height / 2:.0f})" text-anchor="middle">accuracy</text>',
        "</svg>",
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
