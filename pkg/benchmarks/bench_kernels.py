#!/usr/bin/env python3
"""Timing comparison of the compiled and pure-Python kernel backends.

Runs identical workloads through both backends, checks the outputs agree
bit for bit, and prints per-backend throughput. The decoding loops dominate
sweep runtime, so this is the speedup a Monte Carlo sweep sees end to end.

Usage: python benchmarks/bench_kernels.py [--trials 400] [--horizon 50] [--n 8]
"""

import argparse
import time

import numpy as np

from dpnilm import _kernels_py
from dpnilm.model import AppliancePowerVector
from dpnilm.rng import stream

try:
    from dpnilm import _kernels as compiled
except ImportError:
    compiled = None


def make_workload(n, horizon, trials):
    r = stream(7)
    fleet = AppliancePowerVector(r.uniform(90.0, 120.0, n))
    problems = []
    for _ in range(trials):
        x0 = (r.random(n) < 0.5).astype(np.float64)
        readings = r.uniform(0.0, fleet.total, horizon + 1)
        uniforms = r.random((horizon, n))
        truth = (r.random((horizon, n)) < 0.05).astype(np.float64)
        problems.append((x0, readings, uniforms, truth))
    return fleet, problems


def run_multi_shot(backend, fleet, problems, delta=2.0, tol=2.0):
    n = fleet.n
    outputs = []
    for x0, readings, uniforms, _ in problems:
        horizon = uniforms.shape[0]
        probs = np.zeros((horizon, n))
        states = np.zeros((horizon, n))
        corr = np.zeros(horizon, dtype=np.int64)
        backend.multi_shot_run(fleet.powers, fleet.order_desc, fleet.order_asc,
                               x0, readings, delta, tol, uniforms, probs, states, corr)
        outputs.append((probs, states, corr))
    return outputs


def run_one_shot(backend, fleet, problems, delta=2.0):
    work = np.zeros(fleet.n)
    return [
        backend.one_shot_trial(fleet.powers, fleet.order_desc, readings, truth,
                               delta, uniforms, work)
        for _, readings, uniforms, truth in problems
    ]


def timed(fn, *args):
    started = time.perf_counter()
    result = fn(*args)
    return result, time.perf_counter() - started


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=400)
    parser.add_argument("--horizon", type=int, default=50)
    parser.add_argument("--n", type=int, default=8)
    args = parser.parse_args()

    fleet, problems = make_workload(args.n, args.horizon, args.trials)
    print(f"workload: {args.trials} trials x {args.horizon} steps x {args.n} appliances")

    results = {}
    for label, backend in [("python", _kernels_py)] + ([("cython", compiled)] if compiled else []):
        ms_out, ms_time = timed(run_multi_shot, backend, fleet, problems)
        os_out, os_time = timed(run_one_shot, backend, fleet, problems)
        results[label] = (ms_out, os_out, ms_time, os_time)
        print(f"{label:>7}: multi-shot {ms_time:8.3f}s ({args.trials / ms_time:8.1f} trials/s)"
              f"   one-shot {os_time:8.3f}s ({args.trials / os_time:8.1f} trials/s)")

    if compiled is None:
        print("compiled backend not built; nothing to compare")
        return

    py_ms, py_os, py_ms_t, py_os_t = results["python"]
    cy_ms, cy_os, cy_ms_t, cy_os_t = results["cython"]
    for (pp, ps, pc), (cp, cs, cc) in zip(py_ms, cy_ms):
        assert np.array_equal(pp, cp) and np.array_equal(ps, cs) and np.array_equal(pc, cc)
    assert py_os == cy_os
    print("outputs: bit-identical across backends")
    print(f"speedup: multi-shot x{py_ms_t / cy_ms_t:.1f}, one-shot x{py_os_t / cy_os_t:.1f}")


if __name__ == "__main__":
    main()
