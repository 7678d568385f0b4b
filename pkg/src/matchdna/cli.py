"""Command-line front end for the match workbench.

Every subcommand is a thin wrapper over one library call, reading and
writing the artifact files the pipeline stages exchange.  Global flags:
--config (JSON run config), --seed, --out-dir, --verbose.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import fuzzy_ca, mining, pipeline
from .attractor_tree import ca_feedback, load_tree
from .diagnostics import EDGE_OF_CHAOS_ENTROPY

log = logging.getLogger(__name__)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config file")
    common.add_argument("--seed", type=int, help="master seed override")
    common.add_argument("--out-dir", help="artifact directory override")
    common.add_argument("--verbose", "-v", action="store_true",
                        help="log stage progress")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="matchdna",
        description="simulate matches, encode play sequences, mine patterns, "
                    "and train sequence-driven classifiers",
        parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common],
                       help="run the seeded match corpus and write logs")
    p.add_argument("--matches", type=int, help="number of matches")
    p.add_argument("--cycles", type=int, help="cycles per match")
    p.add_argument("--players", type=int, help="players per team")

    p = sub.add_parser("encode", parents=[common],
                       help="encode logged matches into letter sequences")
    p.add_argument("--window", type=int, help="cycles per sequence letter")

    p = sub.add_parser("mine", parents=[common],
                       help="mine sequences for patterns and tandem runs")
    p.add_argument("--min-len", type=int, help="shortest pattern length")
    p.add_argument("--max-len", type=int, help="longest pattern length")
    p.add_argument("--top", type=int, help="patterns kept in the report")

    p = sub.add_parser("motifs", parents=[common],
                       help="list the motif tables or test one against text")
    p.add_argument("--template", help="motif template, x = wildcard")
    p.add_argument("--letters", help="sequence to scan for the template")

    p = sub.add_parser("fca-run", parents=[common],
                       help="evolve a fuzzy rule vector from a start state")
    p.add_argument("--rules", required=True,
                   help="comma-separated rule numbers, e.g. 238,254,238,252")
    p.add_argument("--state", required=True,
                   help="comma-separated cell values in [0,1]")
    p.add_argument("--steps", type=int, default=50, help="max steps")
    p.add_argument("--deps", action="store_true",
                   help="also print the dependency matrix")

    sub.add_parser("train-fmaca", parents=[common],
                   help="train the attractor-basin window classifier")

    p = sub.add_parser("feedback", parents=[common],
                       help="gate a shot: classify a letter window")
    p.add_argument("--tree", help="trained tree JSON "
                                  "(default <out-dir>/fmaca/tree.json)")
    p.add_argument("--letters", required=True, help="recent action letters")

    p = sub.add_parser("train-lcs", parents=[common],
                       help="train the learning classifier system")
    p.add_argument("--env", choices=("oracle", "match"),
                   help="training environment")
    p.add_argument("--iters", type=int, help="training iterations")
    p.add_argument("--ga-period", type=int, help="iterations between GA runs")

    p = sub.add_parser("diagnose", parents=[common],
                       help="entropy/MI diagnostics of an evolving rule vector")
    p.add_argument("--cells", type=int, help="rule vector width")
    p.add_argument("--generations", type=int, help="GA generations")

    sub.add_parser("pipeline", parents=[common],
                   help="run all stages: simulate, encode, mine, "
                        "train-fmaca, train-lcs, diagnose")
    return parser


def _resolve(args, stage_overrides: dict | None = None) -> dict:
    file_config = pipeline.load_config_file(args.config) if args.config else None
    overrides = dict(stage_overrides or {})
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out_dir is not None:
        overrides["out_dir"] = args.out_dir
    return pipeline.resolve_config(file_config, overrides)


def _section(name: str, pairs) -> dict:
    values = {key: value for key, value in pairs if value is not None}
    return {name: values} if values else {}


def _print_rates(report_path: Path) -> None:
    with open(report_path) as fh:
        doc = json.load(fh)
    for row in doc["motif_rates"]:
        rate = "n/a" if row["rate"] is None else f"{row['rate']:.1f}%"
        print(f"{row['label']:>6} {row['template']:<6} "
              f"band {row['band']:>4}: {rate}")


def _cmd_simulate(args) -> int:
    config = _resolve(args, _section("simulate", [
        ("matches", args.matches), ("cycles", args.cycles),
        ("players_per_team", args.players)]))
    path = pipeline.run_stage("simulate", config, config["out_dir"])
    print(f"wrote {path}")
    return 0


def _cmd_encode(args) -> int:
    config = _resolve(args, _section("encode", [("window_cycles", args.window)]))
    path = pipeline.run_stage("encode", config, config["out_dir"])
    print(f"wrote {path}")
    return 0


def _cmd_mine(args) -> int:
    config = _resolve(args, _section("mine", [
        ("min_len", args.min_len), ("max_len", args.max_len),
        ("top_patterns", args.top)]))
    path = pipeline.run_stage("mine", config, config["out_dir"])
    _print_rates(path)
    print(f"wrote {path}")
    return 0


def _cmd_motifs(args) -> int:
    if args.template is None and args.letters is None:
        for motif in mining.DEFAULT_MOTIFS:
            print(f"{motif.label:>6} {motif.template:<6} band {motif.confidence_band}")
        return 0
    if args.template is None or args.letters is None:
        print("motifs: --template and --letters go together", file=sys.stderr)
        return 2
    motif = mining.Motif(args.template, mining.GOAL)
    hits = mining.find_motif(args.letters, motif)
    print(f"{len(hits)} match(es) at {hits}" if hits else "no match")
    return 0


def _cmd_fca_run(args) -> int:
    rules = fuzzy_ca.parse_rule_vector(args.rules)
    state = np.array([float(tok) for tok in args.state.split(",")])
    trajectory = fuzzy_ca.evolve(state, rules, max_steps=args.steps)
    for t, row in enumerate(trajectory.states):
        print(f"P({t}) = ({', '.join(f'{v:.2f}' for v in row)})")
    terminal = trajectory.terminal
    if terminal.kind == "fixed_point":
        print(f"terminal: fixed point at step {terminal.index}")
    elif terminal.kind == "cycle":
        print(f"terminal: cycle of period {terminal.period} "
              f"from step {terminal.start}")
    else:
        print(f"terminal: truncated after {terminal.steps} steps")
    if args.deps:
        print("dependency matrix:")
        for row in fuzzy_ca.dependency_matrix(rules):
            print("  " + "".join(str(int(v)) for v in row))
    return 0


def _cmd_train_fmaca(args) -> int:
    config = _resolve(args)
    path = pipeline.run_stage("train-fmaca", config, config["out_dir"])
    metrics = Path(config["out_dir"]) / "fmaca" / "metrics.json"
    with open(metrics) as fh:
        doc = json.load(fh)
    print(f"training accuracy {doc['training_accuracy']:.3f} "
          f"on {doc['n_windows']} windows (depth {doc['tree_depth']})")
    print(f"wrote {path}")
    return 0


def _cmd_feedback(args) -> int:
    config = _resolve(args)
    tree_path = args.tree or Path(config["out_dir"]) / "fmaca" / "tree.json"
    tree = load_tree(tree_path)
    decision = ca_feedback(tree, args.letters)
    verdict = "proceed" if decision.proceed else "veto"
    if decision.flagged:
        verdict += " (window too short to judge)"
    print(verdict)
    return 0


def _cmd_train_lcs(args) -> int:
    config = _resolve(args, _section("train_lcs", [
        ("env", args.env), ("iters", args.iters),
        ("ga_period", args.ga_period)]))
    path = pipeline.run_stage("train-lcs", config, config["out_dir"])
    curve = Path(path).read_text().strip().splitlines()
    if len(curve) > 2:
        iteration, proportion = curve[-1].split(",")
        print(f"proportion_correct {float(proportion):.3f} "
              f"at iteration {iteration}")
    print(f"wrote {path}")
    return 0


def _cmd_diagnose(args) -> int:
    config = _resolve(args, _section("diagnose", [
        ("n_cells", args.cells), ("generations", args.generations)]))
    path = pipeline.run_stage("diagnose", config, config["out_dir"])
    print(f"edge-of-chaos entropy reference: {EDGE_OF_CHAOS_ENTROPY}")
    print(f"wrote {path}")
    return 0


def _cmd_pipeline(args) -> int:
    config = _resolve(args)
    artifacts = pipeline.pipeline_run(config)
    for stage in pipeline.STAGES:
        print(f"{stage}: {artifacts[stage]}")
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "encode": _cmd_encode,
    "mine": _cmd_mine,
    "motifs": _cmd_motifs,
    "fca-run": _cmd_fca_run,
    "train-fmaca": _cmd_train_fmaca,
    "feedback": _cmd_feedback,
    "train-lcs": _cmd_train_lcs,
    "diagnose": _cmd_diagnose,
    "pipeline": _cmd_pipeline,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _HANDLERS[args.command](args)
    except pipeline.StageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
