"""Shared domain types: appliance fleets, states, switch vectors, meter series.

All types are immutable after construction (arrays are made read-only), so
instances can be shared freely across threads. Operations accept either the
typed wrappers or plain array-likes; use :func:`values_of` to coerce.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AppliancePowerVector",
    "StateVector",
    "SwitchVector",
    "StateMatrix",
    "MeterSeries",
    "Mechanism",
    "DpConfig",
    "SensitivityParams",
    "values_of",
    "hadamard",
    "apply_switch",
]


def values_of(x) -> np.ndarray:
    """Return the underlying float array of a wrapper or array-like."""
    inner = getattr(x, "values", None)
    if inner is None:
        inner = getattr(x, "readings", x)
    return np.asarray(inner, dtype=np.float64)


def _frozen_array(x, dtype=np.float64, ndim=1) -> np.ndarray:
    arr = np.array(x, dtype=dtype)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AppliancePowerVector:
    """Mean per-appliance power draw, in watts, in user-supplied order.

    The Euclidean norm and the power-sorted index permutations are computed
    once at construction; the stored order is never mutated. Ties in power
    rank break toward the lower original index.
    """

    powers: np.ndarray
    names: tuple[str, ...] = ()
    l2_norm: float = field(init=False)
    order_desc: np.ndarray = field(init=False, repr=False)
    order_asc: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        arr = _frozen_array(self.powers)
        if arr.size < 1:
            raise ValueError("a fleet needs at least one appliance")
        if not np.all(np.isfinite(arr)) or not np.all(arr > 0):
            raise ValueError("appliance powers must be finite and strictly positive")
        names = tuple(self.names) if self.names else tuple(f"app_{i + 1}" for i in range(arr.size))
        if len(names) != arr.size:
            raise ValueError(f"{len(names)} names for {arr.size} appliances")
        object.__setattr__(self, "powers", arr)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "l2_norm", float(np.linalg.norm(arr)))
        object.__setattr__(self, "order_desc", _frozen_array(np.argsort(-arr, kind="stable"), dtype=np.int64))
        object.__setattr__(self, "order_asc", _frozen_array(np.argsort(arr, kind="stable"), dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.powers.size)

    @property
    def total(self) -> float:
        return float(self.powers.sum())


def as_fleet(p) -> AppliancePowerVector:
    """Coerce an array-like (or pass through a fleet) to AppliancePowerVector."""
    if isinstance(p, AppliancePowerVector):
        return p
    return AppliancePowerVector(np.asarray(p, dtype=np.float64))


def _check_unit_interval(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} entries must be finite")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{what} entries must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Per-appliance on probabilities; binary vectors are exact 0/1."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values)
        _check_unit_interval(arr, "state")
        object.__setattr__(self, "values", arr)

    @property
    def is_binary(self) -> bool:
        return bool(np.all((self.values == 0.0) | (self.values == 1.0)))


@dataclass(frozen=True, eq=False)
class SwitchVector:
    """Per-appliance switch indicators (or switch probabilities) for one step."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values)
        _check_unit_interval(arr, "switch")
        object.__setattr__(self, "values", arr)

    @property
    def is_binary(self) -> bool:
        return bool(np.all((self.values == 0.0) | (self.values == 1.0)))


@dataclass(frozen=True, eq=False)
class StateMatrix:
    """A time-ordered sequence of state vectors (one column per slot)."""

    columns: tuple[StateVector, ...]
    ground_truth: bool = False

    def __post_init__(self):
        cols = tuple(
            c if isinstance(c, StateVector) else StateVector(np.asarray(c, dtype=np.float64))
            for c in self.columns
        )
        if cols:
            n = cols[0].values.size
            for c in cols:
                if c.values.size != n:
                    raise ValueError("all state columns must have the same length")
        if self.ground_truth and not all(c.is_binary for c in cols):
            raise ValueError("a ground-truth state matrix must be binary")
        object.__setattr__(self, "columns", cols)

    @classmethod
    def from_array(cls, arr, ground_truth: bool = False) -> "StateMatrix":
        """Build from a (slots, appliances) array."""
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-d array, got shape {a.shape}")
        return cls(tuple(StateVector(row) for row in a), ground_truth=ground_truth)

    def to_array(self) -> np.ndarray:
        if not self.columns:
            return np.zeros((0, 0))
        return np.stack([c.values for c in self.columns])

    @property
    def n(self) -> int:
        return int(self.columns[0].values.size) if self.columns else 0

    @property
    def slots(self) -> int:
        return len(self.columns)

    def drop_first(self) -> "StateMatrix":
        """The matrix without its first column (peel off the initial state)."""
        return StateMatrix(self.columns[1:], ground_truth=self.ground_truth)


@dataclass(frozen=True, eq=False)
class MeterSeries:
    """Aggregate meter readings y_0..y_T, in watts.

    ``bounds`` optionally carries per-slot (lower, upper) envelopes for the
    clean signal. ``noise`` is the companion record of injected noise values
    when the series was produced by a privacy mechanism; clean series carry
    ``None``.
    """

    readings: np.ndarray
    bounds: np.ndarray | None = None
    noise: np.ndarray | None = None

    def __post_init__(self):
        arr = _frozen_array(self.readings)
        if not np.all(np.isfinite(arr)):
            raise ValueError("meter readings must be finite")
        object.__setattr__(self, "readings", arr)
        if self.bounds is not None:
            b = _frozen_array(self.bounds, ndim=2)
            if b.shape != (arr.size, 2):
                raise ValueError(f"bounds shape {b.shape} does not match {arr.size} readings")
            if np.any(b[:, 0] > b[:, 1]):
                raise ValueError("every lower bound must not exceed its upper bound")
            if np.any(arr < b[:, 0]) or np.any(arr > b[:, 1]):
                raise ValueError("readings must lie within their bounds")
            object.__setattr__(self, "bounds", b)
        if self.noise is not None:
            nz = _frozen_array(self.noise)
            if nz.size != arr.size:
                raise ValueError("noise record length must match readings")
            object.__setattr__(self, "noise", nz)

    @property
    def horizon(self) -> int:
        """Number of inference steps: readings minus one."""
        return int(self.readings.size) - 1


class Mechanism(enum.Enum):
    """Noise mechanism used to privatize meter readings."""

    LAPLACE = "laplace"
    STAIRCASE = "staircase"
    NONE = "none"


@dataclass(frozen=True)
class DpConfig:
    """Privacy-noise settings: budget, query sensitivity, mechanism, seed."""

    epsilon: float
    delta_f: float
    mechanism: Mechanism = Mechanism.LAPLACE
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.mechanism, Mechanism):
            object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        if self.delta_f < 0:
            raise ValueError("sensitivity must be nonnegative")
        if self.mechanism is not Mechanism.NONE and not self.epsilon > 0:
            raise ValueError("epsilon must be positive for an active mechanism")
        if not 0 <= int(self.seed) < (1 << 64):
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class SensitivityParams:
    """Per-step fluctuation budget (watts) and switch-sparsity budget."""

    delta: float
    u_max: int = 1

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if int(self.u_max) < 1:
            raise ValueError("u_max must be at least 1")
        object.__setattr__(self, "u_max", int(self.u_max))


def hadamard(a, b) -> np.ndarray:
    """Elementwise product of two equal-length vectors."""
    av, bv = values_of(a), values_of(b)
    if av.shape != bv.shape:
        raise ValueError(f"length mismatch: {av.shape} vs {bv.shape}")
    return av * bv


def apply_switch(x_prev, delta) -> StateVector:
    """Advance a state by one switch step: x*(1-d) + (1-x)*d.

    For binary inputs this is exactly XOR; for probabilities it is the
    law of the switched state under independent switching.
    """
    x, d = values_of(x_prev), values_of(delta)
    if x.shape != d.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {d.shape}")
    return StateVector(x * (1.0 - d) + (1.0 - x) * d)
