"""Switch recovery: box-constrained L1 minimization and probabilistic rounding.

The per-step problem is

    minimize    sum_i d_i
    subject to  K - delta <= d . P <= K + delta,   0 <= d_i <= 1.

With K <= delta the zero vector is optimal. Otherwise the lower constraint
binds and the optimum is the greedy fill in descending power order: each
unit of d_i buys P_i watts toward the target at unit cost, so the largest
appliances are cheapest per watt; the optimal point has at most one
fractional entry. The constraint is closed (<= delta): an open constraint
would have no attained minimizer, and the optimum lies on the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InfeasibleError
from .model import SwitchVector, as_fleet, values_of

__all__ = [
    "L1Solution",
    "solve_l1_boxed",
    "round_probabilistic",
    "check_sparsity",
    "check_power_concentration",
]


@dataclass(frozen=True)
class L1Solution:
    """Optimal fractional switch vector with its objective and attained load."""

    delta_star: SwitchVector
    objective: float
    active_target: float


def solve_l1_boxed(P, K: float, delta: float) -> L1Solution:
    """Solve the box-constrained L1 problem for a jump of magnitude ``K``.

    Raises :class:`InfeasibleError` when the required load K - delta exceeds
    the total fleet power.
    """
    fleet = as_fleet(P)
    if not K >= 0:
        raise ValueError("jump magnitude must be nonnegative")
    if not delta >= 0:
        raise ValueError("fluctuation budget must be nonnegative")
    out = np.zeros(fleet.n)
    objective, status = kernels.solve_fractions(
        fleet.powers, fleet.order_desc, float(K), float(delta), False, out
    )
    if status == 3:
        raise InfeasibleError(
            f"required load {K - delta:g} W exceeds total fleet power {fleet.total:g} W"
        )
    active = 0.0 if status == 0 else float(K) - float(delta)
    return L1Solution(SwitchVector(out), float(objective), active)


def round_probabilistic(delta_star, rng: np.random.Generator) -> SwitchVector:
    """Round each entry to 1 with probability equal to its value.

    Entries that are exactly 0 or 1 are preserved; the rounded vector is an
    unbiased estimate of the input.
    """
    vals = values_of(delta_star)
    if np.any(vals < 0) or np.any(vals > 1):
        raise ValueError("switch probabilities must lie in [0, 1]")
    rounded = (rng.random(vals.size) < vals).astype(np.float64)
    return SwitchVector(rounded)


def check_sparsity(deltas, u_max: int) -> bool:
    """True iff every switch vector has at most ``u_max`` active entries."""
    rows = [values_of(d) for d in deltas]
    return all(int(np.count_nonzero(r)) <= u_max for r in rows)


def check_power_concentration(P, delta: float, u_max: int) -> bool:
    """Verify the power-concentration condition for sparsity budget ``u_max``.

    On the ascending-sorted powers p_(1) <= ... <= p_(N), requires for every
    U in [1, u_max):

        sum_{k<=U} p_(k)  -  sum_{k<=U-1} p_(N+1-k)  >  2 * delta

    i.e. any U of the smallest appliances out-weigh the U-1 largest by more
    than the fluctuation budget, so a sparse jump cannot be faked by fewer,
    larger appliances.
    """
    fleet = as_fleet(P)
    if u_max > fleet.n:
        raise ValueError(f"u_max {u_max} exceeds fleet size {fleet.n}")
    asc = np.sort(fleet.powers)
    for u in range(1, u_max):
        lhs = float(asc[:u].sum())
        rhs = float(asc[fleet.n - (u - 1):].sum()) if u > 1 else 0.0
        if not lhs - rhs > 2.0 * delta:
            return False
    return True
