"""Command-line interface.

Subcommands: ``synth``, ``ingest``, ``infer``, ``sweep``, ``bounds``,
``sparsity``. Exit status: 0 on success, 1 on usage errors, 2 on data
errors. ``sweep --config`` reads a flat ``key = value`` file whose keys
mirror the sweep configuration fields (see README); explicit flags override
file values.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .bounds import hierarchical_bounds, lower_bound_one_shot, multi_shot_bounds, upper_bound_one_shot
from .dataio import (
    SynthConfig,
    binarize,
    default_thresholds,
    estimate_powers,
    estimate_u_max,
    aggregate,
    read_meter_csv,
    read_powers_csv,
    read_states_csv,
    read_trace_csv,
    sparsity,
    synthesize,
    write_meter_csv,
    write_powers_csv,
    write_states_csv,
    write_trace_csv,
)
from .errors import DataError, EstimationError, InfeasibleError
from .hierarchy import decompose, hierarchical_infer
from .inference import accuracy_multi_shot, multi_shot_infer
from .mechanisms import inject_noise
from .model import DpConfig, Mechanism, SensitivityParams, as_fleet
from .rng import stream
from .sweep import SweepConfig, default_epsilon_grid, render_svg, run_sweep, write_rows_csv

__all__ = ["cli_dispatch", "main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep usage failures as status 1, not SystemExit(2)
        raise _UsageError(message)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip() != "")
    except ValueError as exc:
        raise _UsageError(f"expected a comma-separated float list: {exc}") from exc


def default_powers(n: int) -> tuple[float, ...]:
    """Evenly spread fleet between 95 and 110 W; placeholder for real data."""
    return tuple(float(p) for p in np.linspace(95.0, 110.0, n))


def parse_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` pairs; '#' starts a comment."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _build_parser() -> _Parser:
    parser = _Parser(prog="dpnilm", description="Load disaggregation under privacy noise")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scenario")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--horizon", type=int, default=50)
    p.add_argument("--powers", type=str, default=None, help="comma list of watts")
    p.add_argument("--sparsity", type=float, default=0.99)
    p.add_argument("--jitter", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace-out", type=str, default=None)
    p.add_argument("--states-out", type=str, default=None)
    p.add_argument("--meter-out", type=str, default=None)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("ingest", help="binarize a trace and derive powers and meter data")
    p.add_argument("--trace", type=str, required=True)
    p.add_argument("--threshold-frac", type=float, default=0.05,
                   help="on threshold as a fraction of each appliance's max")
    p.add_argument("--states-out", type=str, default=None)
    p.add_argument("--meter-out", type=str, default=None)
    p.add_argument("--powers-out", type=str, default=None)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("infer", help="decode appliance states from meter data")
    p.add_argument("--mode", choices=["multi-shot", "hierarchical"], default="multi-shot")
    p.add_argument("--meter", type=str, required=True)
    p.add_argument("--powers-csv", type=str, required=True)
    p.add_argument("--states", type=str, default=None,
                   help="ground-truth states CSV; row 0 is the initial state")
    p.add_argument("--x0", type=str, default=None, help="comma list initial state")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--u-max", type=int, default=None,
                   help="switch-sparsity budget; defaults to the largest "
                        "per-step switch count of --states, else 1")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--mechanism", choices=["laplace", "staircase", "none"], default="none")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None,
                   help="correction tolerance; defaults to delta, 0 is literal")
    p.add_argument("--out", type=str, default=None, help="inferred states CSV")
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("sweep", help="Monte Carlo accuracy sweep over epsilon")
    p.add_argument("--config", type=str, default=None)
    p.add_argument("--out", type=str, required=True)
    p.add_argument("--svg", type=str, default=None)
    p.add_argument("--mode", choices=["one-shot", "multi-shot", "hierarchical"], default=None)
    p.add_argument("--mechanism", choices=["laplace", "staircase"], default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--u-max", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--c", type=float, default=None, help="recovery-constant override")
    p.add_argument("--variant", choices=["as-stated", "corrected"], default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--eps-grid", type=str, default=None)
    p.add_argument("--eps-min", type=float, default=None)
    p.add_argument("--eps-max", type=float, default=None)
    p.add_argument("--eps-points", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--powers", type=str, default=None)
    p.add_argument("--sparsity", type=float, default=None)
    p.add_argument("--jitter", type=float, default=None)
    p.add_argument("--meter-csv", type=str, default=None)
    p.add_argument("--states-csv", type=str, default=None)
    p.add_argument("--powers-csv", type=str, default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("bounds", help="evaluate the closed-form accuracy bounds")
    p.add_argument("--mode", choices=["one-shot", "multi-shot", "hierarchical"], required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--p-norm", type=float, default=None)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--u-max", type=int, default=1)
    p.add_argument("--powers", type=str, default=None)
    p.add_argument("--variant", choices=["as-stated", "corrected"], default="as-stated")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("sparsity", help="measure the switch sparsity of a states CSV")
    p.add_argument("--states", type=str, required=True)
    p.set_defaults(func=_cmd_sparsity)

    return parser


def _cmd_synth(args) -> int:
    powers = _floats(args.powers) if args.powers else default_powers(args.n)
    if len(powers) != args.n and args.powers:
        args.n = len(powers)
    cfg = SynthConfig(len(powers), args.horizon, powers,
                      target_sparsity=args.sparsity,
                      consumption_jitter=args.jitter, seed=args.seed)
    states, trace, meter = synthesize(cfg)
    wrote = False
    if args.trace_out:
        write_trace_csv(args.trace_out, trace)
        wrote = True
    if args.states_out:
        write_states_csv(args.states_out, states)
        wrote = True
    if args.meter_out:
        write_meter_csv(args.meter_out, meter)
        wrote = True
    if not wrote:
        raise _UsageError("synth: pass at least one of --trace-out/--states-out/--meter-out")
    return 0


def _cmd_ingest(args) -> int:
    trace = read_trace_csv(args.trace)
    states = binarize(trace, default_thresholds(trace, args.threshold_frac))
    if args.states_out:
        write_states_csv(args.states_out, states)
    if args.meter_out:
        write_meter_csv(args.meter_out, aggregate(trace, states))
    if args.powers_out:
        write_powers_csv(args.powers_out, estimate_powers(trace, states))
    return 0


def _cmd_infer(args) -> int:
    fleet = read_powers_csv(args.powers_csv)
    meter = read_meter_csv(args.meter)
    truth = None
    if args.states is not None:
        truth = read_states_csv(args.states)
        if truth.n != fleet.n:
            raise DataError(f"states cover {truth.n} appliances, powers {fleet.n}")
        x0 = truth.to_array()[0]
    elif args.x0 is not None:
        x0 = np.asarray(_floats(args.x0))
    else:
        raise _UsageError("infer: pass --states or --x0")
    if args.u_max is not None:
        u_max = args.u_max
    elif truth is not None:
        u_max = estimate_u_max(truth)
    else:
        u_max = 1
    sens = SensitivityParams(args.delta, u_max)
    mechanism = Mechanism(args.mechanism)
    if mechanism is not Mechanism.NONE:
        if args.epsilon is None:
            raise _UsageError("infer: --epsilon is required with an active mechanism")
        dp = DpConfig(args.epsilon, args.delta / 2.0, mechanism, seed=args.seed)
        meter = inject_noise(meter, dp, stream(args.seed, 2))
    infer = multi_shot_infer if args.mode == "multi-shot" else hierarchical_infer
    result = infer(x0, meter, fleet, sens, stream(args.seed, 3), args.tol)
    if args.out:
        write_states_csv(args.out, result.states, start_slot=1)
    if truth is not None and truth.slots == meter.readings.size:
        acc = accuracy_multi_shot(result.states, truth.drop_first())
        print(f"accuracy {acc!r}")
    return 0


def _resolve(flag, cfg: dict[str, str], key: str, conv, default):
    if flag is not None:
        return flag
    if key in cfg:
        raw = cfg[key]
        try:
            return conv(raw)
        except (TypeError, ValueError) as exc:
            raise DataError(f"config key {key}: {exc}") from exc
    return default


def _cmd_sweep(args) -> int:
    cfg = parse_config_file(args.config) if args.config else {}
    mode = _resolve(args.mode, cfg, "mode", str, "one-shot")
    mechanism = _resolve(args.mechanism, cfg, "mechanism", str, "laplace")
    trials = _resolve(args.trials, cfg, "trials", int, 200)
    delta = _resolve(args.delta, cfg, "delta", float, 2.0)
    u_max = _resolve(args.u_max, cfg, "u_max", int, 3)
    seed = _resolve(args.seed, cfg, "master_seed", int, 0)
    c_override = _resolve(args.c, cfg, "c_override", float, None)
    variant = _resolve(args.variant, cfg, "bound_variant", str, "as-stated")
    tol = _resolve(args.tol, cfg, "correction_tolerance", float, None)
    grid_text = _resolve(args.eps_grid, cfg, "epsilon_grid", str, None)
    if grid_text is not None:
        grid = _floats(grid_text) if isinstance(grid_text, str) else grid_text
    else:
        lo = _resolve(args.eps_min, cfg, "eps_min", float, 1e-2)
        hi = _resolve(args.eps_max, cfg, "eps_max", float, 1e2)
        points = _resolve(args.eps_points, cfg, "eps_points", int, 16)
        grid = default_epsilon_grid(points, lo, hi)

    meter_csv = _resolve(args.meter_csv, cfg, "meter_csv", str, None)
    states_csv = _resolve(args.states_csv, cfg, "states_csv", str, None)
    powers_csv = _resolve(args.powers_csv, cfg, "powers_csv", str, None)
    synth = None
    if meter_csv is None:
        n = _resolve(args.n, cfg, "n_appliances", int, 8)
        powers_text = _resolve(args.powers, cfg, "powers", str, None)
        powers = _floats(powers_text) if powers_text else default_powers(n)
        synth = SynthConfig(
            len(powers),
            _resolve(args.horizon, cfg, "horizon", int, 50),
            powers,
            target_sparsity=_resolve(args.sparsity, cfg, "target_sparsity", float, 0.99),
            consumption_jitter=_resolve(args.jitter, cfg, "consumption_jitter", float, 0.0),
        )
    sweep_cfg = SweepConfig(
        epsilon_grid=tuple(grid),
        trials=trials,
        mode=mode,
        mechanism=Mechanism(mechanism),
        sens=SensitivityParams(delta, u_max),
        master_seed=seed,
        synth=synth,
        meter_csv=meter_csv,
        states_csv=states_csv,
        powers_csv=powers_csv,
        c_override=c_override,
        bound_variant=variant,
        correction_tolerance=tol,
    )
    rows = run_sweep(sweep_cfg)
    write_rows_csv(rows, args.out)
    if args.svg:
        render_svg(rows, args.svg)
    return 0


def _cmd_bounds(args) -> int:
    if args.mode == "one-shot":
        if args.n is None or args.c is None:
            raise _UsageError("bounds one-shot: --n and --c are required")
        lo = lower_bound_one_shot(args.delta, args.epsilon, args.n, args.c)
        print(f"lower {lo.raw!r}")
        if args.p_norm is not None:
            up = upper_bound_one_shot(args.delta, args.epsilon, args.n, args.p_norm)
            print(f"upper {up.raw!r}")
    elif args.mode == "multi-shot":
        if args.n is None or args.c is None or args.p_norm is None or args.t is None:
            raise _UsageError("bounds multi-shot: --n, --c, --p-norm and --t are required")
        rep = multi_shot_bounds(args.delta, args.epsilon, args.n, args.t,
                                args.c, args.p_norm, args.variant)
        print(f"lower {rep.lower!r}")
        print(f"upper {rep.upper!r}")
        print(f"clamped_lower {rep.clamped_lower!r}")
        print(f"clamped_upper {rep.clamped_upper!r}")
    else:
        if args.powers is None or args.c is None or args.t is None:
            raise _UsageError("bounds hierarchical: --powers, --c and --t are required")
        fleet = as_fleet(_floats(args.powers))
        hs = decompose(fleet, args.delta, args.u_max)
        rep = hierarchical_bounds(hs, args.delta, args.epsilon, args.t, args.u_max,
                                  args.c, args.variant)
        for i, (m, big) in enumerate(zip(rep.intermediates["m_i"], rep.intermediates["M_i"])):
            print(f"hierarchy {i} lower {m!r} upper {big!r}")
        print(f"lower {rep.lower!r}")
        print(f"upper {rep.upper!r}")
    return 0


def _cmd_sparsity(args) -> int:
    value = sparsity(read_states_csv(args.states))
    print(repr(value))
    return 0


def cli_dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, EstimationError, InfeasibleError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
