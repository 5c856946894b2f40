"""Command-line entry point.

Subcommands:
    run         execute an experiment from a preset and/or INI config file
    verify      run the invariant check suites (fast or full tier)
    plotdata    merge aggregate CSVs into one wide plot-ready CSV
    stationary  solve and print the rest point of the mutation flow
"""

from __future__ import annotations

import argparse
import glob
import sys
from dataclasses import replace

import numpy as np

from .dynamics import solve_stationary
from .games import (StrategyProfile, exploitability, make_brps,
                    make_brps_fig1, make_mne, make_random, random_interior,
                    uniform)
from .harness import (apply_env_overrides, emit_plotdata, load_config,
                      run_experiment)
from .presets import make_preset, preset_names
from .verify import format_report, verify_suite


def _cmd_run(args) -> int:
    scale = "paper" if args.paper else "desk"
    cfg = None
    if args.preset:
        cfg = make_preset(args.preset, scale)
    if args.config:
        cfg = load_config(args.config, base=cfg)
    if cfg is None:
        print("run: need --config and/or --preset", file=sys.stderr)
        return 2
    cfg = apply_env_overrides(cfg)
    overrides = {}
    if args.out:
        overrides["out_dir"] = args.out
    if args.seeds:
        overrides["seeds"] = tuple(int(s) for s in args.seeds.replace(",", " ").split())
    if args.T:
        overrides["T"] = args.T
    if args.record_every:
        overrides["record_every"] = args.record_every
    if overrides:
        cfg = replace(cfg, **overrides)

    def progress(label, series):
        if series is not None:
            print(f"{cfg.name}/{label}: mean final exploitability "
                  f"{series.final_mean:.6g} over {len(series.seeds)} seeds")
        else:
            print(f"{cfg.name}/{label}: all seeds diverged")

    report = run_experiment(cfg, progress=progress)
    print(f"wrote {report.out_dir}")
    for label, events in report.diverged.items():
        for seed, t in events:
            print(f"note: {label} seed {seed} diverged at t={t}")
    return 0


def _cmd_verify(args) -> int:
    results = verify_suite(args.level)
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 1


def _cmd_plotdata(args) -> int:
    paths = sorted(glob.glob(args.inputs))
    if not paths:
        print(f"plotdata: no files match {args.inputs!r}", file=sys.stderr)
        return 2
    floored = emit_plotdata(paths, args.out)
    print(f"wrote {args.out} ({len(paths)} series, {floored} zeros floored)")
    return 0


def _cmd_stationary(args) -> int:
    if args.game == "brps":
        game = make_brps()
    elif args.game == "brps_fig1":
        game = make_brps_fig1()
    elif args.game == "mne":
        game = make_mne()
    elif args.game == "random":
        game = make_random(args.size, args.seed)
    else:
        print(f"stationary: unknown game {args.game!r}", file=sys.stderr)
        return 2
    if args.ref == "uniform":
        ref = StrategyProfile(uniform(game.rows), uniform(game.cols))
    else:
        rng = np.random.default_rng(args.seed)
        ref = StrategyProfile(random_interior(game.rows, rng),
                              random_interior(game.cols, rng))
    point = solve_stationary(game, args.mu, ref, tol=args.tol)
    np.set_printoptions(precision=8, suppress=False)
    print(f"game={args.game} mu={args.mu} ref={args.ref}")
    print(f"p1 = {point.profile.p1.probs}")
    print(f"p2 = {point.profile.p2.probs}")
    print(f"residual        = {point.residual:.3e}")
    print(f"exploitability  = {exploitability(game, point.profile):.6g} (cap 2*mu = {2 * args.mu:g})")
    print(f"learner steps   = {point.iterations}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="zslearn",
        description="Last-iterate learning in two-player zero-sum matrix games.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment sweep")
    p_run.add_argument("--config", help="INI config file")
    p_run.add_argument("--preset", choices=preset_names(), help="named preset")
    scale = p_run.add_mutually_exclusive_group()
    scale.add_argument("--desk", action="store_true", help="desk scale (default): 10 seeds, horizon/5")
    scale.add_argument("--paper", action="store_true", help="paper scale: 100 seeds, full horizon")
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument("--seeds", help="override seed list, e.g. '0,1,2'")
    p_run.add_argument("--T", type=int, help="override iteration count")
    p_run.add_argument("--record-every", type=int, dest="record_every",
                       help="override snapshot cadence")
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="run the invariant check suite")
    p_verify.add_argument("--level", choices=("fast", "full"), default="fast")
    p_verify.set_defaults(func=_cmd_verify)

    p_plot = sub.add_parser("plotdata", help="merge aggregate CSVs for plotting")
    p_plot.add_argument("--in", dest="inputs", required=True,
                        help="glob of aggregate CSV files")
    p_plot.add_argument("--out", required=True, help="output CSV path")
    p_plot.set_defaults(func=_cmd_plotdata)

    p_st = sub.add_parser("stationary", help="solve the mutation-flow rest point")
    p_st.add_argument("--game", required=True,
                      choices=("brps", "brps_fig1", "mne", "random"))
    p_st.add_argument("--mu", type=float, required=True)
    p_st.add_argument("--ref", choices=("uniform", "random"), default="uniform")
    p_st.add_argument("--size", type=int, default=25, help="size for random games")
    p_st.add_argument("--seed", type=int, default=0, help="seed for random game/reference")
    p_st.add_argument("--tol", type=float, default=1e-12)
    p_st.set_defaults(func=_cmd_stationary)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
