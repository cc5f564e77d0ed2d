"""Closed-form accuracy bounds for one-shot, multi-shot, and hierarchical decoding.

All evaluators report both the raw formula value and a [0,1]-clamped value;
raw values legitimately exit [0,1] in regimes the formulas were not tuned
for. Quantities that cannot be evaluated (an incomputable recovery constant
without an override) are flagged as NaN rather than raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .hierarchy import Hierarchy
from .model import as_fleet

__all__ = [
    "BoundEntry",
    "BoundReport",
    "rip_constant",
    "c_of_p",
    "lower_bound_one_shot",
    "upper_bound_one_shot",
    "one_shot_bounds",
    "multi_shot_bounds",
    "hierarchical_bounds",
]


def clamp01(x: float) -> float:
    if math.isnan(x):
        return x
    return min(1.0, max(0.0, x))


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class BoundEntry:
    """One-sided bound: raw formula value, clamped value, named constants."""

    raw: float
    clamped: float
    intermediates: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BoundReport:
    """Two-sided bound with the constants that produced it."""

    lower: float
    upper: float
    clamped_lower: float
    clamped_upper: float
    intermediates: dict = field(default_factory=dict)


def _subset_devs(squares: np.ndarray, size_cap: int, singular_value: bool):
    """Deviation of every considered subset's squared norm from 1."""
    n = squares.size
    if n <= 20:
        subsets = (
            c for s in range(1, size_cap + 1) for c in combinations(range(n), s)
        )
        for sub in subsets:
            norm_sq = float(squares[list(sub)].sum())
            if singular_value:
                sigma_min_sq = norm_sq if len(sub) == 1 else 0.0
                yield max(1.0 - sigma_min_sq, norm_sq - 1.0)
            else:
                yield abs(norm_sq - 1.0)
    else:
        # Subset squared norms are monotone in set inclusion, so the extreme
        # deviations are attained on prefixes of the sorted order from either
        # end; full enumeration is kept above for small fleets.
        asc = np.sort(squares)
        for s in range(1, size_cap + 1):
            for chunk in (asc[:s], asc[n - s:]):
                norm_sq = float(chunk.sum())
                if singular_value:
                    sigma_min_sq = norm_sq if s == 1 else 0.0
                    yield max(1.0 - sigma_min_sq, norm_sq - 1.0)
                else:
                    yield abs(norm_sq - 1.0)


def rip_constant(P, S: int, interpretation: str = "subset-norm") -> float:
    """Worst deviation of sub-fleet power norms from the unit-normalized fleet.

    Under ``subset-norm`` (default) the fleet is normalized to unit L2 norm
    and the constant is max over subsets U with |U| <= S of
    ``| ||P_U||_2^2 - 1 |``. Under ``singular-value`` the subsets are scored
    by the singular values of the 1 x |U| row operator, which is >= 1
    whenever S >= 2 (the row has a nontrivial null space).
    """
    fleet = as_fleet(P)
    if not 1 <= S <= fleet.n:
        raise ValueError(f"S must be in [1, {fleet.n}], got {S}")
    if interpretation not in ("subset-norm", "singular-value"):
        raise ValueError(f"unknown interpretation {interpretation!r}")
    unit = fleet.powers / fleet.l2_norm
    squares = unit * unit
    return max(_subset_devs(squares, S, interpretation == "singular-value"))


def c_of_p(P, u_max: int, interpretation: str = "subset-norm",
           override: float | None = None) -> float:
    """Recovery constant 4 / ((sqrt(3(1-d4)) - sqrt(1+d3)) * |P|_2).

    ``d3`` and ``d4`` are :func:`rip_constant` at subset caps 3*u_max and
    4*u_max (capped at the fleet size). Returns ``override`` verbatim when
    given; returns NaN when d4 >= 1 or the bracketed difference is
    nonpositive, in which case downstream bounds need an override.
    """
    if override is not None:
        return float(override)
    fleet = as_fleet(P)
    d3 = rip_constant(fleet, min(3 * u_max, fleet.n), interpretation)
    d4 = rip_constant(fleet, min(4 * u_max, fleet.n), interpretation)
    if d4 >= 1.0:
        return math.nan
    root = math.sqrt(3.0 * (1.0 - d4)) - math.sqrt(1.0 + d3)
    if root <= 0.0:
        return math.nan
    return 4.0 / (root * fleet.l2_norm)


def lower_bound_one_shot(delta: float, epsilon: float, n: int, c: float) -> BoundEntry:
    """Accuracy floor for single-step recovery under Laplace noise.

    raw = 1 - (4*c*d*e + 8*d*e + 3*d) / (4*e*n)
            + (A1*e + B1) / (4*e*n) * exp(-2*e*b/d)

    with b = 2*(n - (2+c)*d), A1 = 2*n - 4*d - 2*c*d, B1 = 3*d. In the d -> 0
    limit the floor is exactly 1.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if n < 1:
        raise ValueError("need at least one appliance")
    b = 2.0 * (n - (2.0 + c) * delta)
    a1 = 2.0 * n - 4.0 * delta - 2.0 * c * delta
    b1 = 3.0 * delta
    inter = {"C": c, "b": b, "A1": a1, "B1": b1}
    if delta == 0.0:
        raw = 1.0
    else:
        main = (4.0 * c * delta * epsilon + 8.0 * delta * epsilon + 3.0 * delta) / (4.0 * epsilon * n)
        tail = (a1 * epsilon + b1) / (4.0 * epsilon * n) * _exp(-2.0 * epsilon * b / delta)
        raw = 1.0 - main + tail
    return BoundEntry(raw, clamp01(raw), inter)


def upper_bound_one_shot(delta: float, epsilon: float, n: int, p_norm: float) -> BoundEntry:
    """Accuracy ceiling for single-step recovery under Laplace noise.

    raw = 1 + (A2*e^2 + B2*e + C2) / (8*d*e*n*|P|) * exp(-2*e*m/d)
            - (16*d*e^2 + 4*d*e + 3*d) / (16*e*n*|P|) * exp(-e)

    with m = n*|P| + 2*d, A2 = 4*m^2 - 8*d*m - 4*m*n*|P| (identically zero
    given m's definition), B2 = 6*d*m - 8*d^2 - 4*d*n*|P|, C2 = 3*d^2.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if n < 1:
        raise ValueError("need at least one appliance")
    if not p_norm > 0:
        raise ValueError("power norm must be positive")
    m = n * p_norm + 2.0 * delta
    a2 = 4.0 * m * m - 8.0 * delta * m - 4.0 * m * n * p_norm
    b2 = 6.0 * delta * m - 8.0 * delta * delta - 4.0 * delta * n * p_norm
    c2 = 3.0 * delta * delta
    inter = {"m": m, "A2": a2, "B2": b2, "C2": c2}
    if delta == 0.0:
        raw = 1.0
    else:
        t1 = (a2 * epsilon * epsilon + b2 * epsilon + c2) / (8.0 * delta * epsilon * n * p_norm) \
            * _exp(-2.0 * epsilon * m / delta)
        t2 = (16.0 * delta * epsilon * epsilon + 4.0 * delta * epsilon + 3.0 * delta) \
            / (16.0 * epsilon * n * p_norm) * _exp(-epsilon)
        raw = 1.0 + t1 - t2
    return BoundEntry(raw, clamp01(raw), inter)


def one_shot_bounds(delta: float, epsilon: float, n: int, c: float, p_norm: float) -> BoundReport:
    """Two-sided single-step bound report."""
    lo = lower_bound_one_shot(delta, epsilon, n, c)
    up = upper_bound_one_shot(delta, epsilon, n, p_norm)
    inter = dict(lo.intermediates)
    inter.update(up.intermediates)
    return BoundReport(lo.raw, up.raw, lo.clamped, up.clamped, inter)


def multi_shot_bounds(delta: float, epsilon: float, n: int, t: int, c: float,
                      p_norm: float, variant: str = "as-stated") -> BoundReport:
    """Horizon-T bounds built from the single-step bounds b and B.

        lower = 1 - (T-1) * G / 2          upper = 1 - (1 - B) / T

    ``as-stated`` uses G = 1 - b*n; ``corrected`` uses G = (1 - b)*n, which
    matches the per-step error bound the horizon argument actually telescopes
    (the as-stated G can push the lower bound above 1).
    """
    if t < 1:
        raise ValueError("horizon must be at least 1")
    if variant not in ("as-stated", "corrected"):
        raise ValueError(f"unknown variant {variant!r}")
    lo = lower_bound_one_shot(delta, epsilon, n, c)
    up = upper_bound_one_shot(delta, epsilon, n, p_norm)
    if variant == "as-stated":
        g = 1.0 - lo.raw * n
    else:
        g = (1.0 - lo.raw) * n
    lower = 1.0 - (t - 1) * g / 2.0
    upper = 1.0 - (1.0 - up.raw) / t
    inter = dict(lo.intermediates)
    inter.update(up.intermediates)
    # the single-step bound values themselves, distinct from the exponent
    # constant "b" reported by the lower entry
    inter.update({
        "b_delta_eps": lo.raw, "B_delta_eps": up.raw, "G": g,
        "b_m": lower, "B_M": upper, "variant": variant,
    })
    return BoundReport(lower, upper, clamp01(lower), clamp01(upper), inter)


def hierarchical_bounds(hierarchies, delta: float, epsilon: float, t: int,
                        u_max: int, c, variant: str = "as-stated") -> BoundReport:
    """Recursive bounds over hierarchies decoded largest-powers first.

    Hierarchy i sees, on top of the base budget, a disturbance

        delta_i' = p_u(i)/2 + sum_{k<i} n_k * T * (1 - m_k) * |P_k|_2

    from smaller invisible appliances and the preceding groups' decoding
    error (m_k enters clamped to [0,1]; a raw value would let the error term
    go negative). Its bounds are the horizon-T bounds at inflated budgets:

        m_i = lower at delta + 2*delta_i'/(2 + C_i)
        M_i = upper at delta + delta_i'

    and the fleet-level bound is the member-count-weighted mixture. ``c``
    may be a scalar or one value per hierarchy; NaN entries flag the result
    as requiring an override.
    """
    hs: list[Hierarchy] = list(hierarchies)
    if not hs:
        raise ValueError("need at least one hierarchy")
    cs = [float(x) for x in (c if np.ndim(c) else [float(c)] * len(hs))]
    if len(cs) != len(hs):
        raise ValueError(f"{len(cs)} recovery constants for {len(hs)} hierarchies")
    m_raw, m_clamped, big_m_raw, big_m_clamped, d_primes = [], [], [], [], []
    carried = 0.0  # accumulated decoding-error disturbance, never negative
    for h, ci in zip(hs, cs):
        d_prime = h.p_u / 2.0 + carried
        lo_rep = multi_shot_bounds(delta + 2.0 * d_prime / (2.0 + ci), epsilon,
                                   h.n_i, t, ci, h.power_subvector.l2_norm, variant)
        up_rep = multi_shot_bounds(delta + d_prime, epsilon, h.n_i, t, ci,
                                   h.power_subvector.l2_norm, variant)
        m_i, m_i_cl = lo_rep.lower, lo_rep.clamped_lower
        big_i, big_i_cl = up_rep.upper, up_rep.clamped_upper
        d_primes.append(d_prime)
        m_raw.append(m_i)
        m_clamped.append(m_i_cl)
        big_m_raw.append(big_i)
        big_m_clamped.append(big_i_cl)
        carried += h.n_i * t * (1.0 - m_i_cl) * h.power_subvector.l2_norm
    weights = np.array([h.n_i for h in hs], dtype=np.float64)
    total = weights.sum()
    lower = float(np.dot(weights, m_raw) / total)
    upper = float(np.dot(weights, big_m_raw) / total)
    clamped_lower = float(np.dot(weights, m_clamped) / total)
    clamped_upper = float(np.dot(weights, big_m_clamped) / total)
    inter = {
        "delta_prime_i": tuple(d_primes),
        "m_i": tuple(m_raw),
        "m_i_clamped": tuple(m_clamped),
        "M_i": tuple(big_m_raw),
        "M_i_clamped": tuple(big_m_clamped),
        "n_i": tuple(h.n_i for h in hs),
        "C_i": tuple(cs),
        "u_max": u_max,
        "variant": variant,
    }
    return BoundReport(lower, upper, clamped_lower, clamped_upper, inter)
