"""Command-line front end.

    poptrack simulate <scenario> [-o DIR] [--deterministic] [--no-figures]
    poptrack compare  <scenario> [-o DIR] [--deterministic] [--no-figures]
    poptrack bench    <scenario> [-n ITERS] [-o DIR]
    poptrack gen-track <spec> -o FILE

``<scenario>`` may be ``@benchmark`` for the bundled comparison scenario.
Exit codes: 0 ok, 1 usage/parse error, 2 I/O error, 3 divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path as FsPath
from typing import Sequence

from poptrack.config import ConfigError, ScenarioFile, load_scenario_file, load_track_spec_file
from poptrack.sim import (
    RunLog,
    SimulationError,
    compare,
    compute_metrics,
    latency_stats,
    prepare_track,
    run_scenario,
    transient_trimmed_metrics,
    write_run_csv,
)
from poptrack.svg import Series, write_svg
from poptrack.tracks import generate_track, write_track_csv
from poptrack.trajectory import Path

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DIVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # one diagnostic line, exit code 1
        raise UsageError(message)


def bundled_scenario(name: str = "benchmark") -> FsPath:
    return FsPath(str(resources.files("poptrack") / "data" / f"{name}.json"))


def _resolve(scenario: str) -> FsPath:
    if scenario.startswith("@"):
        path = bundled_scenario(scenario[1:])
        if not path.exists():
            raise FileNotFoundError(2, "no bundled scenario", scenario)
        return path
    return FsPath(scenario)


def _write_json(filename: FsPath, payload: dict) -> None:
    filename.write_text(json.dumps(payload, indent=2) + "\n")


def _reference_series(path: Path) -> Series:
    return Series("reference", path.points[:, 0], path.points[:, 1], color="#888888", dashed=True)


def _run_svg(filename: FsPath, log_: RunLog, path: Path) -> None:
    write_svg(
        filename,
        top=[_reference_series(path), Series(f"{log_.controller} path", log_.column("x"), log_.column("y"))],
        bottom=[Series(f"{log_.controller} steering", log_.column("t"), log_.column("steering"))],
        top_title="reference vs driven path",
        bottom_title="steering [rad] vs t [s]",
    )


def _prepare_outdir(out: str) -> FsPath:
    outdir = FsPath(out)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _single(parsed: ScenarioFile, command: str):
    if not parsed.single:
        raise ConfigError(f"{command} needs a scenario with a single 'controller'")
    return parsed.scenarios[0]


def cmd_simulate(args: argparse.Namespace) -> int:
    parsed = load_scenario_file(_resolve(args.scenario))
    scenario = _single(parsed, "simulate")
    path, densify_s = prepare_track(scenario)
    run = run_scenario(scenario, path)
    run.densify_seconds = densify_s
    if args.deterministic:
        run = run.without_latency()
    outdir = _prepare_outdir(args.output)
    write_run_csv(run, outdir / "run.csv")
    metrics = compute_metrics(run)
    _write_json(outdir / "metrics.json", metrics.to_dict())
    if parsed.output.svg:
        _run_svg(outdir / "trajectory.svg", run, path)
    if parsed.output.figure and not args.no_figures:
        from poptrack.plotting import plot_run

        plot_run(run, path, outdir / "trajectory.png")

    trimmed = transient_trimmed_metrics(run)
    print(f"{run.controller}: {run.termination} after {metrics.steps} steps")
    print(f"  mean |crosstrack| {metrics.mean_abs_crosstrack:.4f} m, mean |heading| {metrics.mean_abs_heading:.4f} rad")
    if trimmed is not None:
        print(f"  without first 5 s: {trimmed.mean_abs_crosstrack:.4f} m, {trimmed.mean_abs_heading:.4f} rad")
    print(f"  lateral latency mean {metrics.mean_latency:.1f} us, p99 {metrics.p99_latency:.1f} us")
    if run.diverged:
        print(f"error: run diverged at t={run.records[-1].t:.2f} s", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    parsed = load_scenario_file(_resolve(args.scenario))
    result = compare(parsed.scenarios)
    if args.deterministic:
        result = result.without_latency()
    logs = result.logs
    outdir = _prepare_outdir(args.output)
    _write_json(outdir / "comparison.json", result.to_dict())
    names = [row.name for row in result.rows]
    if parsed.output.svg:
        write_svg(
            outdir / "comparison.svg",
            top=[_reference_series(result.path)] + [Series(n, lg.column("x"), lg.column("y")) for n, lg in zip(names, logs)],
            bottom=[Series(n, lg.column("t"), lg.column("crosstrack")) for n, lg in zip(names, logs)],
            top_title="reference vs driven paths",
            bottom_title="crosstrack [m] vs t [s]",
        )
    if parsed.output.figure and not args.no_figures:
        from poptrack.plotting import plot_comparison

        plot_comparison(logs, names, result.path, outdir / "comparison.png")

    print(f"{'rank':<5}{'controller':<16}{'|xte| m':>10}{'|psi| rad':>11}{'max xte':>10}{'lat us':>10}  end")
    for row in sorted(result.rows, key=lambda r: r.rank):
        m = row.metrics
        print(
            f"{row.rank:<5}{row.name:<16}{m.mean_abs_crosstrack:>10.4f}{m.mean_abs_heading:>11.4f}"
            f"{m.max_abs_crosstrack:>10.3f}{m.mean_latency:>10.1f}  {row.termination}"
        )
    diverged = [row.name for row in result.rows if row.termination == "diverged"]
    if diverged:
        print(f"error: diverged runs: {', '.join(diverged)}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    if args.iterations < 1:
        raise UsageError("--iterations must be >= 1")
    parsed = load_scenario_file(_resolve(args.scenario))
    path, _ = prepare_track(parsed.scenarios[0])
    report: dict[str, dict] = {}
    diverged = False
    for scenario in parsed.scenarios:
        samples: list[float] = []
        steps = 0
        for _ in range(args.iterations):
            run = run_scenario(scenario, path)
            diverged |= run.diverged
            samples.extend(r.controller_latency for r in run.records)
            steps = len(run.records)
        stats = latency_stats(samples)
        report[scenario.controller_name] = {**stats.to_dict(), "steps_per_run": steps}
        print(
            f"{scenario.controller_name}: mean {stats.mean:.1f} us, p50 {stats.p50:.1f} us, "
            f"p99 {stats.p99:.1f} us over {stats.samples} steps ({args.iterations} runs)"
        )
    outdir = _prepare_outdir(args.output)
    _write_json(outdir / "bench.json", {"iterations": args.iterations, "unit": "us", "controllers": report})
    if diverged:
        print("error: a benchmark run diverged", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_gen_track(args: argparse.Namespace) -> int:
    spec = load_track_spec_file(args.spec)
    if spec.generator is None:
        raise ConfigError("gen-track needs a generator spec, not a csv reference")
    path = generate_track(spec)
    out = FsPath(args.output)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True)
    write_track_csv(path, out)
    print(f"wrote {len(path)} waypoints to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="poptrack", description="Path-tracking controller simulation and benchmarking.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run one scenario")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", default=".")
    p.add_argument("--deterministic", action="store_true", help="zero latency fields for byte-identical output")
    p.add_argument("--no-figures", action="store_true", help="skip matplotlib figures")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run every listed controller on a shared setup and rank them")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", default=".")
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="lateral-controller latency statistics")
    p.add_argument("scenario")
    p.add_argument("-n", "--iterations", type=int, default=5)
    p.add_argument("-o", "--output", default=".")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen-track", help="write a generated track as x,y CSV")
    p.add_argument("spec")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_track)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError, SimulationError) as exc:
        code, message = EXIT_USAGE, str(exc)
    except OSError as exc:
        code = EXIT_IO
        message = f"{exc.filename}: {exc.strerror}" if getattr(exc, "filename", None) and exc.strerror else str(exc)
    except ValueError as exc:
        code, message = EXIT_USAGE, str(exc)
    print("error: " + " ".join(message.split()), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
