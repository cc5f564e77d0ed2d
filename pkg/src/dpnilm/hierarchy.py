"""Greedy fleet decomposition into power-comparable groups and hierarchical decoding.

Appliances are grouped so that within a group the power-concentration
condition holds; groups ("hierarchies") are then decoded largest-powers
first, each against the residual meter series left by the previous groups.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .inference import InferenceResult, multi_shot_infer
from .model import (
    AppliancePowerVector,
    MeterSeries,
    SensitivityParams,
    StateMatrix,
    SwitchVector,
    as_fleet,
    values_of,
)

__all__ = ["Hierarchy", "decompose", "good_hierarchy_check", "hierarchical_infer"]


@dataclass(frozen=True)
class Hierarchy:
    """One power-comparable appliance group.

    ``member_indices`` are fleet indices in original order, so decoding a
    single-group fleet is draw-for-draw identical to plain multi-shot
    inference. ``p_u`` is the largest possible total of ``u_max`` fleet
    appliances whose power is strictly below this group's smallest member;
    it bounds how much invisible smaller-appliance activity can perturb this
    group's readings.
    """

    member_indices: tuple[int, ...]
    power_subvector: AppliancePowerVector
    n_i: int
    p_min: float
    p_u: float


def _tail_power_sum(fleet: AppliancePowerVector, p_min: float, u_max: int) -> float:
    below = np.sort(fleet.powers[fleet.powers < p_min])[::-1]
    return float(below[:u_max].sum())


def _make_hierarchy(fleet: AppliancePowerVector, members: list[int], u_max: int) -> Hierarchy:
    idx = tuple(sorted(members))
    powers = fleet.powers[list(idx)]
    sub = AppliancePowerVector(powers, tuple(fleet.names[i] for i in idx))
    p_min = float(powers.min())
    return Hierarchy(idx, sub, len(idx), p_min, _tail_power_sum(fleet, p_min, u_max))


def decompose(P, delta: float, u_max: int = 1) -> list[Hierarchy]:
    """Greedy ascending grouping of a fleet into power-comparable hierarchies.

    Walking the appliances in ascending power order, the next appliance with
    power q joins the current group c_1 <= ... <= c_S (always when S <= 1)
    iff

        sum_{j<=floor(S/2)+1} c_j - 2*delta  >=  sum_{j<=floor(S/2)-1} c_{S+1-j} + q

    otherwise it starts a new group. Returned groups are ordered descending
    by their largest member power (the decoding order). ``u_max`` sizes each
    group's smaller-appliance disturbance total ``p_u``.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    fleet = as_fleet(P)
    groups: list[list[int]] = []
    current: list[int] = []
    for idx in fleet.order_asc:
        i = int(idx)
        if len(current) <= 1:
            current.append(i)
            continue
        c = fleet.powers[current]  # ascending by construction
        size = len(current)
        half = size // 2
        lhs = float(c[: half + 1].sum()) - 2.0 * delta
        rhs = float(c[size - (half - 1):].sum()) if half > 1 else 0.0
        if lhs >= rhs + fleet.powers[i]:
            current.append(i)
        else:
            groups.append(current)
            current = [i]
    groups.append(current)
    hierarchies = [_make_hierarchy(fleet, g, u_max) for g in groups]
    hierarchies.sort(key=lambda h: -float(h.power_subvector.powers.max()))
    return hierarchies


def good_hierarchy_check(h, delta: float) -> bool:
    """Strict power-concentration check over all sub-budgets of a group.

    For ascending member powers p_1 <= ... <= p_S, requires for every U < S:

        sum_{i<=U} p_i - 2*delta  >  sum_{i<=U-1} p_{S-i+1}

    Singletons pass vacuously.
    """
    powers = h.power_subvector.powers if isinstance(h, Hierarchy) else values_of(h)
    asc = np.sort(np.asarray(powers, dtype=np.float64))
    size = asc.size
    for u in range(1, size):
        lhs = float(asc[:u].sum()) - 2.0 * delta
        rhs = float(asc[size - (u - 1):].sum()) if u > 1 else 0.0
        if not lhs > rhs:
            return False
    return True


def hierarchical_infer(x0, Y: MeterSeries, P, sens: SensitivityParams,
                       rng: np.random.Generator,
                       correction_tolerance: float | None = None) -> InferenceResult:
    """Decode hierarchy by hierarchy against the residual meter series.

    Each group is decoded with plain multi-shot inference restricted to its
    members, against the readings minus every other group's estimated load:
    already-decoded groups contribute their decoded loads, not-yet-decoded
    groups their known initial standing load (their subsequent switching is
    the disturbance the hierarchy construction budgets via ``p_u``). Without
    the standing-load subtraction the correction step would chase the whole
    fleet's reading with one group's appliances. Residuals may go negative
    and are passed through unclamped; the solver only consumes absolute
    differences.

    When ``correction_tolerance`` is not given, each group's sub-run uses
    ``sens.delta + p_u``: a load mismatch below the invisible smaller
    appliances' envelope carries no evidence about this group's members, and
    correcting on it flips high-power appliances on every drift of the
    residual. An explicit tolerance is passed through to every group.
    """
    fleet = as_fleet(P)
    hierarchies = decompose(fleet, sens.delta, sens.u_max)
    readings = values_of(Y)
    horizon = readings.size - 1
    x0v = values_of(x0)
    if x0v.size != fleet.n:
        raise ValueError(f"initial state has {x0v.size} entries for {fleet.n} appliances")
    if horizon <= 0:
        return InferenceResult(StateMatrix(()), (), ())
    states = np.zeros((horizon, fleet.n))
    probs = np.zeros((horizon, fleet.n))
    corrections = np.zeros(horizon, dtype=np.int64)
    # per-group estimated load over slots 0..horizon, frozen at x0 until decoded
    estimates = np.empty((len(hierarchies), horizon + 1))
    for gi, h in enumerate(hierarchies):
        idx = list(h.member_indices)
        estimates[gi] = float(x0v[idx] @ h.power_subvector.powers)
    for gi, h in enumerate(hierarchies):
        idx = list(h.member_indices)
        others = np.zeros(horizon + 1)
        for gj in range(len(hierarchies)):
            if gj != gi:
                others += estimates[gj]
        residual = readings - others
        tol = sens.delta + h.p_u if correction_tolerance is None else correction_tolerance
        sub_result = multi_shot_infer(
            x0v[idx], MeterSeries(residual), h.power_subvector, sens, rng, tol,
        )
        sub_states = sub_result.states.to_array()
        states[:, idx] = sub_states
        probs[:, idx] = np.stack([p.values for p in sub_result.switch_probs])
        corrections += np.asarray(sub_result.corrections_applied, dtype=np.int64)
        estimates[gi, 1:] = sub_states @ h.power_subvector.powers
    return InferenceResult(
        states=StateMatrix.from_array(states),
        switch_probs=tuple(SwitchVector(row) for row in probs),
        corrections_applied=tuple(int(c) for c in corrections),
    )
