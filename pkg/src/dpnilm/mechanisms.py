"""ε-differential-privacy noise mechanisms and meter-series noise injection.

Both mechanisms are additive on the raw readings. The Laplace mechanism
draws from density (1/2λ)·exp(-|s|/λ) with λ = Δf/ε. The staircase
mechanism composes four primitive draws (sign, geometric plateau index,
in-plateau uniform, plateau side) into a piecewise-constant density that
also satisfies ε-DP with the same sensitivity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DpConfig, Mechanism, MeterSeries
from .rng import stream

__all__ = [
    "NoiseSample",
    "StaircaseDraw",
    "sensitivity",
    "laplace_pdf",
    "laplace_sample",
    "laplace_noise",
    "staircase_sample",
    "staircase_noise",
    "staircase_value",
    "inject_noise",
]


@dataclass(frozen=True)
class NoiseSample:
    """One noise draw: value in watts, producing mechanism, draw index."""

    value: float
    mechanism: Mechanism
    draw: int = 0

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("noise value must be finite")


@dataclass(frozen=True)
class StaircaseDraw:
    """The primitive draws behind one staircase sample.

    ``gamma`` is the plateau-split parameter 1/(1+e^{ε/2}); ``s_sign`` the
    output sign; ``g`` the plateau index; ``u`` the in-plateau position;
    ``b_bit`` selects the inner (0) or outer (1) part of the plateau.
    """

    gamma: float
    s_sign: int
    g: int
    u: float
    b_bit: int

    def __post_init__(self):
        if not 0.0 < self.gamma <= 0.5:
            raise ValueError("gamma must lie in (0, 1/2]")
        if self.s_sign not in (-1, 1):
            raise ValueError("sign must be -1 or +1")
        if self.g < 0:
            raise ValueError("plateau index must be nonnegative")
        if not 0.0 <= self.u <= 1.0:
            raise ValueError("u must lie in [0, 1]")
        if self.b_bit not in (0, 1):
            raise ValueError("b_bit must be 0 or 1")


def sensitivity(bounds) -> tuple[float, float]:
    """Per-reading sensitivity from (lower, upper) envelopes.

    Returns ``(delta_f, delta)`` where ``delta_f`` is the largest envelope
    width max_t(upper_t - lower_t) and ``delta = 2 * delta_f`` is the
    corresponding per-step fluctuation budget.
    """
    arr = np.asarray(bounds, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("empty bounds sequence")
    arr = arr.reshape(-1, 2)
    gaps = arr[:, 1] - arr[:, 0]
    if np.any(gaps < 0):
        raise ValueError("every upper bound must be at least its lower bound")
    delta_f = float(gaps.max())
    return delta_f, 2.0 * delta_f


def laplace_pdf(s: float, lam: float) -> float:
    """Laplace density (1/2λ)·exp(-|s|/λ)."""
    if not lam > 0:
        raise ValueError("scale must be positive")
    return math.exp(-abs(s) / lam) / (2.0 * lam)


def _require_active(dp: DpConfig, need_delta_f: bool = False) -> None:
    if not dp.epsilon > 0:
        raise ValueError("epsilon must be positive")
    if need_delta_f and not dp.delta_f > 0:
        raise ValueError("sensitivity must be positive")


def laplace_noise(dp: DpConfig, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vector of independent Laplace draws at scale Δf/ε."""
    _require_active(dp)
    return rng.laplace(0.0, dp.delta_f / dp.epsilon, size=size)


def laplace_sample(dp: DpConfig, rng: np.random.Generator | None = None, draw: int = 0) -> NoiseSample:
    """One Laplace draw; deterministic given (config seed, draw index).

    When ``rng`` is omitted a fresh stream is derived from ``dp.seed`` and
    ``draw``, so the sampler is a pure function of its arguments.
    """
    _require_active(dp)
    if rng is None:
        rng = stream(dp.seed, 0, draw)
    value = float(rng.laplace(0.0, dp.delta_f / dp.epsilon))
    return NoiseSample(value, Mechanism.LAPLACE, draw)


def staircase_gamma(epsilon: float) -> float:
    """Plateau split 1/(1+e^{ε/2}), floored at the smallest positive float."""
    try:
        value = 1.0 / (1.0 + math.exp(epsilon / 2.0))
    except OverflowError:
        value = 0.0
    return max(value, math.ulp(0.0))


def staircase_value(d: StaircaseDraw, delta_f: float) -> float:
    """Assemble the noise value from primitive staircase draws."""
    g, u, gam = float(d.g), d.u, d.gamma
    if d.b_bit == 0:
        magnitude = (g + gam * u) * delta_f
    else:
        magnitude = (g + gam + (1.0 - gam) * u) * delta_f
    return d.s_sign * magnitude


def _staircase_draws(dp: DpConfig, rng: np.random.Generator, size: int):
    gam = staircase_gamma(dp.epsilon)
    b = math.exp(-dp.epsilon)
    signs = np.where(rng.random(size) < 0.5, 1, -1)
    # geometric plateau index: Pr(G=i) = (1-b) b^i for i >= 0
    g = rng.geometric(1.0 - b, size=size) - 1
    u = rng.random(size)
    p_b0 = gam / (gam + (1.0 - gam) * b)  # gam > 0, so well defined
    b_bits = (rng.random(size) >= p_b0).astype(np.int64)
    return gam, signs, g, u, b_bits


def staircase_noise(dp: DpConfig, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vector of independent staircase draws."""
    _require_active(dp, need_delta_f=True)
    gam, signs, g, u, b_bits = _staircase_draws(dp, rng, size)
    inner = (g + gam * u) * dp.delta_f
    outer = (g + gam + (1.0 - gam) * u) * dp.delta_f
    return signs * np.where(b_bits == 0, inner, outer)


def staircase_sample(dp: DpConfig, rng: np.random.Generator | None = None, draw: int = 0) -> NoiseSample:
    """One staircase draw; deterministic given (config seed, draw index)."""
    _require_active(dp, need_delta_f=True)
    if rng is None:
        rng = stream(dp.seed, 0, draw)
    gam, signs, g, u, b_bits = _staircase_draws(dp, rng, 1)
    d = StaircaseDraw(gam, int(signs[0]), int(g[0]), float(u[0]), int(b_bits[0]))
    return NoiseSample(staircase_value(d, dp.delta_f), Mechanism.STAIRCASE, draw)


def inject_noise(series: MeterSeries, dp: DpConfig, rng: np.random.Generator | None = None,
                 clamp_nonnegative: bool = False) -> MeterSeries:
    """Privatize a meter series with one independent draw per reading.

    Noisy readings are not clamped by default (clamping would bias the
    reading differences the solver consumes); ``clamp_nonnegative`` exists
    for realism studies only. The injected noise values are recorded on the
    returned series; the clean series' bounds are dropped since they no
    longer contain the readings. ``Mechanism.NONE`` returns the input
    unchanged.
    """
    if dp.mechanism is Mechanism.NONE:
        return series
    if rng is None:
        rng = stream(dp.seed)
    size = series.readings.size
    if dp.mechanism is Mechanism.LAPLACE:
        noise = laplace_noise(dp, rng, size)
    else:
        noise = staircase_noise(dp, rng, size)
    readings = series.readings + noise
    if clamp_nonnegative:
        readings = np.maximum(readings, 0.0)
    return MeterSeries(readings, bounds=None, noise=noise)
