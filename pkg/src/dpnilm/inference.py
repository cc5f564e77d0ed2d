"""One-shot and chained (multi-shot) state inference from meter readings.

The multi-shot pipeline runs in two passes over the horizon: first the
per-step solves and forward propagation of the fractional state, then
per-slot probabilistic rounding followed by error correction that toggles
appliances in global power-rank order until the implied load matches the
given reading within a tolerance. Correction compares against the readings
the algorithm was given; under privacy noise those are the noisy ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import (
    MeterSeries,
    SensitivityParams,
    StateMatrix,
    SwitchVector,
    as_fleet,
    values_of,
)
from .solver import round_probabilistic, solve_l1_boxed

__all__ = [
    "InferenceResult",
    "k_delta",
    "one_shot_infer",
    "accuracy_one_shot",
    "multi_shot_infer",
    "accuracy_multi_shot",
]


@dataclass(frozen=True)
class InferenceResult:
    """Binary decoded states, per-step switch fractions, correction counts."""

    states: StateMatrix
    switch_probs: tuple[SwitchVector, ...]
    corrections_applied: tuple[int, ...]

    def __post_init__(self):
        if not all(c.is_binary for c in self.states.columns):
            raise ValueError("decoded states must be binary")
        if len(self.switch_probs) != self.states.slots or len(self.corrections_applied) != self.states.slots:
            raise ValueError("result fields must cover the same horizon")


def k_delta(y_curr: float, y_prev: float) -> float:
    """Magnitude of the reading change between consecutive slots."""
    return abs(float(y_curr) - float(y_prev))


def one_shot_infer(P, y_prev: float, y_curr: float, sens: SensitivityParams,
                   rng: np.random.Generator) -> tuple[SwitchVector, SwitchVector]:
    """Recover one step's switch vector from two consecutive readings.

    Returns the fractional solution and its probabilistic rounding. The
    readings may already carry injected noise; the solve is noise-agnostic.
    Propagates :class:`~dpnilm.errors.InfeasibleError` when the jump exceeds
    the fleet total.
    """
    solution = solve_l1_boxed(P, k_delta(y_curr, y_prev), sens.delta)
    rounded = round_probabilistic(solution.delta_star, rng)
    return solution.delta_star, rounded


def accuracy_one_shot(delta_hat, delta_true) -> float:
    """1 - |a - b|_1 / N for two equal-length switch vectors."""
    a, b = values_of(delta_hat), values_of(delta_true)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return 1.0 - float(np.abs(a - b).sum()) / a.size


def multi_shot_infer(x0, Y: MeterSeries, P, sens: SensitivityParams,
                     rng: np.random.Generator,
                     correction_tolerance: float | None = None) -> InferenceResult:
    """Decode a full horizon of states from a meter series.

    ``correction_tolerance`` defaults to the fluctuation budget ``sens.delta``
    (pass 0 for the literal always-correct behavior: with zero tolerance any
    benign fluctuation triggers a toggle). Per-step solves whose target
    exceeds the fleet total saturate at all-ones instead of aborting, so
    extreme-noise sweeps survive.
    """
    fleet = as_fleet(P)
    readings = values_of(Y)
    horizon = readings.size - 1
    x0v = values_of(x0)
    if x0v.size != fleet.n:
        raise ValueError(f"initial state has {x0v.size} entries for {fleet.n} appliances")
    if not np.all((x0v == 0.0) | (x0v == 1.0)):
        raise ValueError("initial state must be binary")
    tol = sens.delta if correction_tolerance is None else float(correction_tolerance)
    if tol < 0:
        raise ValueError("correction tolerance must be nonnegative")
    if horizon <= 0:
        return InferenceResult(StateMatrix(()), (), ())
    uniforms = rng.random((horizon, fleet.n))
    probs = np.empty((horizon, fleet.n))
    states = np.empty((horizon, fleet.n))
    corrections = np.zeros(horizon, dtype=np.int64)
    kernels.multi_shot_run(
        fleet.powers, fleet.order_desc, fleet.order_asc, x0v, readings,
        float(sens.delta), tol, uniforms, probs, states, corrections,
    )
    return InferenceResult(
        states=StateMatrix.from_array(states),
        switch_probs=tuple(SwitchVector(row) for row in probs),
        corrections_applied=tuple(int(c) for c in corrections),
    )


def accuracy_multi_shot(result, truth) -> float:
    """1 - |A - B|_1 / (N*T) for two state matrices of the same shape."""
    a = result.to_array() if isinstance(result, StateMatrix) else np.asarray(result, dtype=np.float64)
    b = truth.to_array() if isinstance(truth, StateMatrix) else np.asarray(truth, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return 1.0 - float(np.abs(a - b).sum()) / a.size
