"""Command-line front end: detect, score, oracle, and generate subcommands.

All diagnostics go to standard error; covers are written to --output or
standard output in the one-community-per-line label format. Exit codes:
0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import TextIO

from . import __version__
from .bench import brute_force_best, greedy_baseline
from .encoding import InvalidChromosomeError, InvalidCoverError, format_cover, parse_cover
from .evolution import GAConfig, run
from .fitness import overlapping_modularity
from .graph import Graph, GraphParseError, PlantedCover, load_edge_list, ring_of_cliques, write_edge_list

__all__ = ["main", "console_main"]


def _generator_spec(value: str) -> tuple[str, tuple[int, ...]]:
    """Parse a generator spec such as ``ring:3,4``."""
    name, _, params = value.partition(":")
    if name != "ring":
        raise argparse.ArgumentTypeError(f"unknown generator {name!r} (expected 'ring')")
    try:
        numbers = tuple(int(tok) for tok in params.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad generator parameters in {value!r}")
    if len(numbers) != 2:
        raise argparse.ArgumentTypeError("ring generator takes exactly two parameters: ring:C,S")
    return name, numbers


def _add_input_flags(parser: argparse.ArgumentParser, required: bool = True) -> None:
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--input", metavar="PATH", help="edge-list file to analyze")
    group.add_argument(
        "--generate",
        metavar="SPEC",
        type=_generator_spec,
        help="synthetic input instead of a file, e.g. ring:3,4",
    )


def _add_ga_flags(parser: argparse.ArgumentParser) -> None:
    defaults = GAConfig()
    parser.add_argument("--seed", type=int, metavar="U64", help="RNG seed (drawn and printed if omitted)")
    parser.add_argument("--population", type=int, default=defaults.population_size, metavar="N")
    parser.add_argument("--generations", type=int, default=defaults.generations, metavar="N")
    parser.add_argument(
        "--stagnation-window", type=int, default=defaults.stagnation_window, metavar="N",
        help="stop after this many generations without improvement",
    )
    parser.add_argument("--elitism", type=int, default=defaults.elitism_count, metavar="N")
    parser.add_argument("--tournament-size", type=int, default=defaults.tournament_size, metavar="N")
    parser.add_argument("--crossover-rate", type=float, default=defaults.crossover_rate, metavar="F")
    parser.add_argument("--p-min", type=float, default=defaults.p_min, metavar="F")
    parser.add_argument("--p-max", type=float, default=defaults.p_max, metavar="F")
    parser.add_argument("--p-overlap", type=float, default=defaults.p_overlap_init, metavar="F")
    parser.add_argument("--k-max", type=int, default=defaults.k_max, metavar="K",
                        help="maximum memberships per node")
    parser.add_argument("--lambda", dest="membership_weight", type=float,
                        default=defaults.membership_weight, metavar="F",
                        help="weight of the membership factor in the mutation priority")
    parser.add_argument("--workers", type=int, default=1, metavar="N",
                        help="fitness evaluation processes (never changes results)")
    parser.add_argument("--dump-informativeness", metavar="PATH",
                        help="append per-generation informativeness tables to PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evocover",
        description="Detect overlapping communities in undirected networks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="run the evolutionary search")
    _add_input_flags(p_detect)
    p_detect.add_argument("--output", metavar="PATH", help="cover file (default: stdout)")
    p_detect.add_argument("--report", metavar="PATH",
                          help="JSON run report; a PNG figure is rendered next to it")
    _add_ga_flags(p_detect)

    p_score = sub.add_parser("score", help="score a cover file against a graph")
    _add_input_flags(p_score)
    p_score.add_argument("--cover", metavar="PATH", required=True, help="cover file to score")

    p_oracle = sub.add_parser("oracle", help="run a baseline or exhaustive oracle")
    _add_input_flags(p_oracle)
    p_oracle.add_argument("--oracle", choices=("brute", "greedy"), required=True)
    p_oracle.add_argument("--k-max", type=int, default=2, metavar="K")
    p_oracle.add_argument("--output", metavar="PATH", help="cover file (default: stdout)")

    p_gen = sub.add_parser("generate", help="emit a synthetic graph and its planted truth")
    p_gen.add_argument("--generate", metavar="SPEC", type=_generator_spec, required=True)
    p_gen.add_argument("--output", metavar="PATH", help="edge-list file (default: stdout)")
    p_gen.add_argument("--truth", metavar="PATH", help="write the planted cover here")

    return parser


def _build_input(args: argparse.Namespace) -> tuple[Graph, str, PlantedCover | None]:
    if getattr(args, "input", None):
        with open(args.input, "r", encoding="utf-8") as fh:
            graph = load_edge_list(fh)
        if graph.dropped_lines:
            print(
                f"note: dropped {graph.dropped_self_loops} self-loop and "
                f"{graph.dropped_duplicates} duplicate line(s)",
                file=sys.stderr,
            )
        return graph, args.input, None
    name, params = args.generate
    planted = ring_of_cliques(*params)
    return planted.graph, f"{name}:{','.join(map(str, params))}", planted


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _sig12(value: float) -> float:
    return float(f"{value:.12g}")


def _cmd_detect(args: argparse.Namespace) -> int:
    graph, input_desc, _ = _build_input(args)

    seed = args.seed
    if seed is None:
        seed = int.from_bytes(os.urandom(8), "little") >> 1
        print(f"seed: {seed}", file=sys.stderr)

    cfg = GAConfig(
        population_size=args.population,
        generations=args.generations,
        stagnation_window=args.stagnation_window,
        elitism_count=args.elitism,
        tournament_size=args.tournament_size,
        crossover_rate=args.crossover_rate,
        p_min=args.p_min,
        p_max=args.p_max,
        p_overlap_init=args.p_overlap,
        k_max=args.k_max,
        membership_weight=args.membership_weight,
        seed=seed,
    )
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2

    dump: TextIO | None = None
    on_generation = None
    if args.dump_informativeness:
        dump = open(args.dump_informativeness, "w", encoding="utf-8")
        dump.write("# generation\tnode\tpinf\tmembership_kld\toinf\tcombined\n")

        def on_generation(gen: int, info) -> None:
            for i in range(graph.n):
                dump.write(
                    f"{gen}\t{graph.labels[i]}\t{info.pinf[i]:.6f}\t"
                    f"{info.membership_kld[i]:.6f}\t{info.oinf[i]:.6f}\t"
                    f"{info.combined[i]:.6f}\n"
                )

    try:
        report = run(graph, cfg, workers=args.workers, on_generation=on_generation)
    finally:
        if dump is not None:
            dump.close()

    _write_text(args.output, format_cover(report.best_cover, graph))

    if args.report:
        payload = {
            "version": __version__,
            "input": input_desc,
            "config": asdict(report.config),
            "seed": report.config.seed,
            "best_q": _sig12(report.best_q),
            "q_trace": [_sig12(q) for q in report.q_trace],
            "generations_run": report.generations_run,
            "wall_time_s": report.wall_time_s,
            "overlap_nodes": [graph.labels[i] for i in report.best_cover.overlap_nodes()],
        }
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        from .plots import render_report_figure

        figure_path = str(Path(args.report).with_suffix(".png"))
        render_report_figure(
            report.q_trace, report.best_cover, figure_path, title=input_desc
        )
        print(f"report: {args.report} (figure: {figure_path})", file=sys.stderr)
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    graph, _, _ = _build_input(args)
    with open(args.cover, "r", encoding="utf-8") as fh:
        cover = parse_cover(fh, graph)
    q = overlapping_modularity(cover, graph)
    print(f"{q:.12g}")
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    graph, _, _ = _build_input(args)
    if args.oracle == "greedy":
        partition, q = greedy_baseline(graph)
        cover = partition.to_cover(k_max=1)
    else:
        cover, q = brute_force_best(graph, args.k_max)
    _write_text(args.output, format_cover(cover, graph))
    print(f"Q = {q:.12g}", file=sys.stderr)
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    _, params = args.generate
    planted = ring_of_cliques(*params)
    buf = io.StringIO()
    write_edge_list(planted.graph, buf)
    _write_text(args.output, buf.getvalue())
    if args.truth:
        _write_text(args.truth, format_cover(planted.truth, planted.graph))
    return 0


_COMMANDS = {
    "detect": _cmd_detect,
    "score": _cmd_score,
    "oracle": _cmd_oracle,
    "generate": _cmd_generate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (GraphParseError, InvalidCoverError, InvalidChromosomeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    sys.exit(main())
