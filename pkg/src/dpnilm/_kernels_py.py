"""Pure-Python kernels: reference implementation of the hot loops.

The compiled extension ``dpnilm._kernels`` implements the same functions
with identical arithmetic (same operation order), so both backends produce
bit-identical results. Keep the two files in sync.

Statuses returned by :func:`solve_fractions`:
  0  zero solution (jump within the fluctuation budget)
  1  greedy fill reached the target
  2  saturated at all-ones (target beyond fleet total, ``saturate`` set)
  3  infeasible (target beyond fleet total, ``saturate`` unset)
"""

BACKEND_NAME = "python"


def solve_fractions(powers, order, k, delta, saturate, out):
    """Cheapest switch fractions explaining a meter jump of magnitude ``k``.

    Minimizes the entry sum subject to ``k - delta <= out . powers`` and the
    unit box, filling in descending power order (``order``). Returns
    ``(objective, status)``; ``out`` is overwritten.
    """
    n = powers.shape[0]
    for i in range(n):
        out[i] = 0.0
    if k <= delta:
        return 0.0, 0
    target = k - delta
    total = 0.0
    for i in range(n):
        total += powers[i]
    if target > total:
        if not saturate:
            return -1.0, 3
        for i in range(n):
            out[i] = 1.0
        return float(n), 2
    resid = target
    obj = 0.0
    for pos in range(n):
        j = order[pos]
        if resid <= 0.0:
            break
        p = powers[j]
        if resid >= p:
            out[j] = 1.0
            obj += 1.0
            resid -= p
        else:
            f = resid / p
            out[j] = f
            obj += f
            resid = 0.0
            break
    return obj, 1


def multi_shot_run(powers, order_desc, order_asc, x0, readings, delta, tol,
                   uniforms, probs_out, states_out, corrections_out):
    """Chained inference over a horizon with rounding and error correction.

    First pass: per-step greedy solve on the absolute reading difference and
    forward propagation of the (fractional) state. Second pass: probabilistic
    rounding against ``uniforms`` and per-slot correction toward the given
    readings, toggling appliances in global power-rank order.

    ``probs_out`` receives the per-step switch fractions, ``states_out`` the
    corrected binary states, ``corrections_out`` the number of state flips
    applied by correction at each slot.
    """
    horizon = uniforms.shape[0]
    n = powers.shape[0]
    x = [0.0] * n
    for i in range(n):
        x[i] = x0[i]
    for t in range(horizon):
        k = readings[t + 1] - readings[t]
        if k < 0.0:
            k = -k
        solve_fractions(powers, order_desc, k, delta, True, probs_out[t])
        for i in range(n):
            d = probs_out[t, i]
            xi = x[i]
            x[i] = xi * (1.0 - d) + (1.0 - xi) * d
            states_out[t, i] = x[i]
    for t in range(horizon):
        dot = 0.0
        for i in range(n):
            s = 1.0 if uniforms[t, i] < states_out[t, i] else 0.0
            states_out[t, i] = s
            dot += s * powers[i]
        y = readings[t + 1]
        flips = 0
        if dot > y + tol:
            rank = 0
            while dot > y + tol and rank < n:
                j = order_desc[rank]
                if states_out[t, j] == 1.0:
                    states_out[t, j] = 0.0
                    dot -= powers[j]
                    flips += 1
                rank += 1
        elif dot < y - tol:
            rank = 0
            while dot < y - tol and rank < n:
                j = order_asc[rank]
                if states_out[t, j] == 0.0:
                    states_out[t, j] = 1.0
                    dot += powers[j]
                    flips += 1
                rank += 1
        corrections_out[t] = flips


def one_shot_trial(powers, order_desc, readings, truth_deltas, delta, uniforms, work):
    """Mean single-step accuracy over a horizon, given true switch vectors.

    Each step solves from the consecutive (possibly noisy) readings, rounds
    against ``uniforms``, and scores ``1 - |rounded - truth|_1 / n``.
    Infeasible steps saturate at all-ones. ``work`` is an n-sized scratch.
    """
    horizon = uniforms.shape[0]
    n = powers.shape[0]
    acc_sum = 0.0
    for t in range(horizon):
        k = readings[t + 1] - readings[t]
        if k < 0.0:
            k = -k
        solve_fractions(powers, order_desc, k, delta, True, work)
        errs = 0.0
        for i in range(n):
            rounded = 1.0 if uniforms[t, i] < work[i] else 0.0
            diff = rounded - truth_deltas[t, i]
            if diff < 0.0:
                diff = -diff
            errs += diff
        acc_sum += 1.0 - errs / n
    if horizon == 0:
        return 1.0
    return acc_sum / horizon
