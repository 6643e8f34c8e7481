"""Command-line interface: validate | simulate | estimate | dimension |
cover-bound | check-osc | cylinder.

Every run is reproducible from its arguments and master seed; output files
start with comment headers carrying the version, a hash of the effective
configuration, and the seed (JSON outputs embed the same block as their
first key).  Worker count never changes results.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

import numpy as np

from . import catalog, io
from .config import RunConfig, load_config
from .dimension import cover_upper_bound, measure_dimension
from .errors import ConfigError, IfsError
from .estimators import dimension_ratio, entropy_rate, lyapunov_exponent
from .geometry import OpenSet, check_osc, check_rosc, check_sosc
from .model import IfsSystem, validate_system
from .simulate import chaos_game, chaos_game_many, empirical_measure
from .words import cylinder_measure_minus, cylinder_measure_plus, format_word, parse_word


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="TOML run configuration")
    p.add_argument("--system", metavar="NAME",
                   help=f"built-in system: {', '.join(catalog.builtin_names())}")
    p.add_argument("--p1", type=float, default=0.7,
                   help="first-map weight for --system paper-example (default 0.7)")
    p.add_argument("--n-max", type=int, default=catalog.DEFAULT_BAND_TRUNCATION,
                   help="band truncation for the reported open set (default 6)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker pool size; results are independent of it")
    p.add_argument("--json", action="store_true", help="emit JSON instead of CSV/text")
    p.add_argument("--out", metavar="PATH", help="output file (default stdout)")


def _sim_flags(p: argparse.ArgumentParser, steps_default: int) -> None:
    p.add_argument("--steps", type=int, default=steps_default,
                   help=f"steps per trajectory (default {steps_default})")
    p.add_argument("--burn-in", type=int, default=10_000,
                   help="discarded leading steps (default 10000)")
    p.add_argument("--trajectories", type=int, default=1,
                   help="independent trajectories (default 1)")
    p.add_argument("--thinning", type=int, default=1,
                   help="keep every n-th point when pooling (default 1)")
    p.add_argument("--x0", type=float, default=None,
                   help="start point (default: system-specific)")


def _plot_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--plot", metavar="PATH", nargs="?", const="",
                   help="render a figure; with no PATH, derive it from --out")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ifsdim",
        description="Simulation and dimension estimation for iterated function "
                    "systems with place-dependent probabilities.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the standing hypotheses by sampling")
    _common_flags(p)
    p.add_argument("--budget", type=int, default=2000, help="sample points (default 2000)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run the chaos game; export CSV/snapshot")
    _common_flags(p)
    _sim_flags(p, 100_000)
    p.add_argument("--snapshot", metavar="PATH", help="save the pooled measure (binary)")
    p.add_argument("--measure-csv", metavar="PATH", help="save the pooled measure as CSV")
    _plot_flag(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="Lyapunov exponent, entropy, dimension ratio")
    _common_flags(p)
    _sim_flags(p, 1_000_000)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("dimension", help="local-dimension quantiles over sampled centers")
    _common_flags(p)
    _sim_flags(p, 1_000_000)
    p.add_argument("--snapshot", metavar="PATH", help="load a measure instead of simulating")
    p.add_argument("--centers", type=int, default=64, help="sampled centers (default 64)")
    p.add_argument("--levels", type=int, default=16, help="dyadic radii levels (default 16)")
    p.add_argument("--r0", type=float, default=None,
                   help="largest radius (default: cloud diameter / 8)")
    _plot_flag(p)
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("cover-bound", help="filtered-word cover and critical exponent")
    _common_flags(p)
    _sim_flags(p, 1_000_000)
    p.add_argument("--snapshot", metavar="PATH", help="load a measure instead of simulating")
    p.add_argument("--n", type=int, default=12, help="word length (default 12)")
    p.add_argument("--epsilon", type=float, default=0.05, help="filter slack (default 0.05)")
    p.add_argument("--boxes", type=int, default=32, help="quantile boxes (default 32)")
    p.add_argument("--word-budget", type=int, default=65536,
                   help="max sampled words (default 65536)")
    p.add_argument("--diameters-csv", metavar="PATH",
                   help="also dump per-set diameters for plotting")
    _plot_flag(p)
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("check-osc", help="open set condition: plain, strong, regular")
    _common_flags(p)
    p.add_argument("--budget", type=int, default=1000,
                   help="Monte Carlo budget for non-exact geometries (default 1000)")
    p.set_defaults(func=cmd_check_osc)

    p = sub.add_parser("cylinder", help="cylinder masses of finite words")
    _common_flags(p)
    _sim_flags(p, 100_000)
    p.add_argument("--snapshot", metavar="PATH", help="load a measure instead of simulating")
    p.add_argument("--word", action="append", required=True, metavar="DIGITS",
                   help="word as a digit string, e.g. 121; repeatable")
    p.set_defaults(func=cmd_cylinder)

    return ap


def _resolve_system(args) -> tuple[IfsSystem, Optional[OpenSet], str, float]:
    """(system, open_set, label, default_x0) from --system or --config."""
    if args.system and args.config:
        raise ConfigError("pass either --system or --config, not both")
    if args.system:
        try:
            ns = catalog.named_system(args.system, p1=args.p1, n_max=args.n_max)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
        return ns.system, ns.open_set, ns.name, ns.default_x0
    if args.config:
        cfg: RunConfig = load_config(args.config)
        if cfg.system is None:
            raise ConfigError(f"{args.config}: missing [system] table")
        x0 = float(cfg.run.get("x0", 0.0))
        return cfg.system, cfg.open_set, f"config:{os.path.basename(args.config)}", x0
    raise ConfigError("a system is required: pass --system NAME or --config PATH")


def _effective(args, **extra) -> dict:
    eff = {"command": args.command, "seed": args.seed}
    if args.system:
        eff["system"] = args.system
        if args.system in ("paper-example", "decade-bands"):
            eff["p1"] = args.p1
            eff["n_max"] = args.n_max
    if args.config:
        eff["config"] = os.path.basename(args.config)
    # worker count never changes results, so it stays out of the config echo
    eff.update(extra)
    return eff


def _plot_path(args) -> Optional[str]:
    plot = getattr(args, "plot", None)
    if plot is None:
        return None
    if plot:
        return plot
    if not args.out:
        raise ConfigError("--plot without a path needs --out to derive one from")
    return os.path.splitext(args.out)[0] + ".png"


def _build_measure(args, system, default_x0: float):
    snapshot = getattr(args, "snapshot", None)
    if snapshot and os.path.exists(snapshot) and args.command != "simulate":
        return io.load_measure(snapshot), {"snapshot": os.path.basename(snapshot)}
    x0 = args.x0 if args.x0 is not None else default_x0
    sim_meta = {"steps": args.steps, "burn_in": args.burn_in,
                "trajectories": args.trajectories, "thinning": args.thinning, "x0": x0}
    if args.trajectories > 1:
        trajs = chaos_game_many(system, x0, args.trajectories, args.steps,
                                args.burn_in, args.seed, threads=args.threads)
    else:
        trajs = [chaos_game(system, x0, args.steps, args.burn_in, args.seed)]
    return empirical_measure(trajs, thinning=args.thinning), sim_meta


def cmd_validate(args) -> int:
    system, _, label, _ = _resolve_system(args)
    eff = _effective(args, budget=args.budget, target=label)
    report = validate_system(system, sample_budget=args.budget, seed=args.seed)
    if args.json:
        io.write_json(args.out, {
            "meta": _meta(eff, args.seed),
            "ok": report.ok,
            "checks": [{"name": c.name, "passed": c.passed,
                        "witness": None if c.witness is None else np.asarray(c.witness).tolist(),
                        "detail": c.detail} for c in report.checks],
        })
    else:
        lines = io.header_lines(eff, args.seed) + report.lines()
        text = "\n".join(lines) + "\n"
        if args.out:
            io._atomic_write_text(args.out, text)
        else:
            sys.stdout.write(text)
    return 0 if report.ok else 1


def _meta(eff: dict, seed: int) -> dict:
    return {"version": io.VERSION, "config_hash": io.config_hash(eff), "seed": seed}


def cmd_simulate(args) -> int:
    system, _, label, x0_default = _resolve_system(args)
    x0 = args.x0 if args.x0 is not None else x0_default
    eff = _effective(args, steps=args.steps, burn_in=args.burn_in,
                     trajectories=args.trajectories, thinning=args.thinning,
                     x0=x0, target=label)
    if args.trajectories > 1:
        trajs = chaos_game_many(system, x0, args.trajectories, args.steps,
                                args.burn_in, args.seed, threads=args.threads)
    else:
        trajs = [chaos_game(system, x0, args.steps, args.burn_in, args.seed)]

    cols = io.trajectory_columns(system.d)
    if args.trajectories > 1:
        cols = ["traj"] + cols

    def rows():
        for ti, traj in enumerate(trajs):
            for row in io.trajectory_rows(traj):
                yield ([ti] + row) if args.trajectories > 1 else row

    io.write_csv(args.out, io.header_lines(eff, args.seed), cols, rows())
    if args.snapshot or args.measure_csv or args.plot is not None:
        measure = empirical_measure(trajs, thinning=args.thinning)
        if args.snapshot:
            io.save_measure(measure, args.snapshot)
        if args.measure_csv:
            io.write_csv(args.measure_csv, io.header_lines(eff, args.seed),
                         io.measure_columns(measure.d), io.measure_rows(measure))
        ppath = _plot_path(args)
        if ppath:
            from . import figures
            figures.render_measure(measure, ppath, title=label)
    return 0


def cmd_estimate(args) -> int:
    system, _, label, x0_default = _resolve_system(args)
    x0 = args.x0 if args.x0 is not None else x0_default
    eff = _effective(args, steps=args.steps, burn_in=args.burn_in, x0=x0, target=label)
    traj = chaos_game(system, x0, args.steps, args.burn_in, args.seed)
    lam = lyapunov_exponent(traj)
    eta = entropy_rate(traj)
    s = dimension_ratio(min(eta.value, 0.0), lam.value)
    if args.json:
        io.write_json(args.out, {
            "meta": _meta(eff, args.seed),
            "lambda": lam.value, "eta": eta.value, "s": s,
            "stderr_lambda": lam.stderr, "stderr_eta": eta.stderr,
            "n": lam.n_samples,
        })
    else:
        io.write_csv(args.out, io.header_lines(eff, args.seed),
                     ["lambda", "eta", "s", "stderr_lambda", "stderr_eta", "n"],
                     [[lam.value, eta.value, s, lam.stderr, eta.stderr, lam.n_samples]])
    return 0


def cmd_dimension(args) -> int:
    system, _, label, x0_default = _resolve_system(args)
    measure, src_meta = _build_measure(args, system, x0_default)
    eff = _effective(args, centers=args.centers, levels=args.levels,
                     r0=args.r0, target=label, **src_meta)
    summary = measure_dimension(measure, n_centers=args.centers, r0=args.r0,
                                levels=args.levels, seed=args.seed)
    if args.json:
        io.write_json(args.out, {
            "meta": _meta(eff, args.seed),
            "median": summary.median, "q10": summary.q10, "q90": summary.q90,
            "n_valid": summary.n_valid, "n_discarded": summary.n_discarded,
            "centers": [{"center": r.center.tolist(), "slope": r.slope,
                         "r2": r.r2, "discarded": r.discarded}
                        for r in summary.records],
        })
    else:
        def rows():
            for r in summary.records:
                yield [r.center[0] if measure.d == 1 else "|".join(map(io.fmt, r.center)),
                       r.slope, r.r2, int(r.discarded)]
            yield ["summary", summary.median, summary.q10, summary.q90]

        io.write_csv(args.out, io.header_lines(eff, args.seed),
                     ["center", "slope", "r2", "discarded"], rows())
    ppath = _plot_path(args)
    if ppath:
        from . import figures
        figures.render_dimension(summary, ppath, title=label)
    return 0


def cmd_cover(args) -> int:
    system, _, label, x0_default = _resolve_system(args)
    measure, src_meta = _build_measure(args, system, x0_default)
    eff = _effective(args, n=args.n, epsilon=args.epsilon, boxes=args.boxes,
                     word_budget=args.word_budget, target=label, **src_meta)
    report = cover_upper_bound(system, measure, n=args.n, epsilon=args.epsilon,
                               seed=args.seed, n_boxes=args.boxes,
                               word_budget=args.word_budget)
    io.write_json(args.out, {
        "meta": _meta(eff, args.seed),
        "n": report.n, "epsilon": report.epsilon, "K": report.k_filter,
        "num_sets": report.num_sets,
        "diameters": {"min": report.diam_min, "median": report.diam_median,
                      "max": report.diam_max},
        "critical_exponent": report.critical_exponent,
        "mass_covered": report.mass_covered,
        "family_subsampled": report.family_subsampled,
        "t_grid": report.t_grid, "log_sums": report.log_sums,
    })
    if args.diameters_csv:
        io.write_csv(args.diameters_csv, io.header_lines(eff, args.seed),
                     ["diameter", "is_log_weight"],
                     zip(report.diameters, report.is_log_weights))
    ppath = _plot_path(args)
    if ppath:
        from . import figures
        figures.render_cover(report, ppath, title=label)
    return 0


def cmd_check_osc(args) -> int:
    system, open_set, label, _ = _resolve_system(args)
    if open_set is None:
        raise ConfigError("no open set: add an [open_set] table or use a --system with one")
    eff = _effective(args, budget=args.budget, target=label)
    # truncated band family: containment is judged against one extra band,
    # since the top band's upward image lies in the next band by design
    containment_target = None
    if label in ("paper-example", "decade-bands"):
        containment_target = OpenSet.from_intervals(
            catalog.band_intervals(args.n_max + 1))
    report = check_osc(system, open_set, budget=args.budget, seed=args.seed,
                       containment_target=containment_target)
    r1 = None
    rosc = None
    if report.disjointness_pass:
        r1 = check_sosc(system, open_set, budget=args.budget, seed=args.seed)
        rosc = check_rosc(system, open_set, budget=max(args.budget // 5, 100),
                          seed=args.seed)
    io.write_json(args.out, {
        "meta": _meta(eff, args.seed),
        "containment_pass": report.containment_pass,
        "disjointness_pass": report.disjointness_pass,
        "separation_r1": r1,
        "regularity_r2_r3": rosc,
        "certified": report.certified,
        "note": report.note,
        "witnesses": {k: np.asarray(v).tolist() for k, v in report.witnesses.items()},
        "open_set_components": len(open_set.boxes),
    })
    return 0 if (report.containment_pass and report.disjointness_pass) else 1


def cmd_cylinder(args) -> int:
    system, _, label, x0_default = _resolve_system(args)
    measure, src_meta = _build_measure(args, system, x0_default)
    words = [parse_word(w) for w in args.word]
    eff = _effective(args, words=[format_word(w) for w in words], target=label, **src_meta)
    rows = []
    for w in words:
        plus = cylinder_measure_plus(system, w, measure)
        minus = cylinder_measure_minus(system, w, measure)
        rows.append([format_word(w), plus.value, plus.stderr,
                     minus.value, minus.stderr, plus.n_samples])
    if args.json:
        io.write_json(args.out, {
            "meta": _meta(eff, args.seed),
            "cylinders": [{"word": r[0], "plus": r[1], "plus_stderr": r[2],
                           "minus": r[3], "minus_stderr": r[4], "n": r[5]}
                          for r in rows],
        })
    else:
        io.write_csv(args.out, io.header_lines(eff, args.seed),
                     ["word", "plus", "plus_stderr", "minus", "minus_stderr", "n"],
                     rows)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IfsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
