"""File-based pipeline: simulate matches, encode sequences, mine patterns,
train classifiers, and emit dynamics diagnostics.

Stages communicate only through artifact files under one output
directory, so any stage can be rerun or inspected in isolation.  Every
artifact carries a schema_version and every random draw flows from a
seed recorded in the resolved run config; the manifest's creation
timestamp is the single nondeterministic field.
"""

from __future__ import annotations

import copy
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import mining, sequences
from .attractor_tree import (
    GaConfig,
    classify_batch,
    encode_window,
    fit_window_classifier,
    save_tree,
)
from .classifier_system import (
    LcsConfig,
    LearningCurve,
    MinerStats,
    Population,
    SequenceReplayEnvironment,
    SuffixOracleEnvironment,
    curve_to_csv,
    population_to_csv,
    train,
)
from .diagnostics import DiagnosticsConfig, diagnostics_to_csv, ga_diagnostics
from .mining import DEFAULT_MOTIFS, GOAL, THREAT, AnnotatedSequence, PatternQuery
from .sequences import encode_game, encode_player
from .shooting import ShootingPolicy
from .simulator import AWAY, HOME, FieldConfig, load_match_log, run_match, save_match_log

log = logging.getLogger(__name__)

CONFIG_SCHEMA_VERSION = 1
MANIFEST_SCHEMA_VERSION = 1
REPORT_SCHEMA_VERSION = 1

STAGES = ("simulate", "encode", "mine", "train-fmaca", "train-lcs", "diagnose")

# attacking kicks inside this distance of the goal line flag a threat window
THREAT_DISTANCE = 30.0

DEFAULT_CONFIG = {
    "schema_version": CONFIG_SCHEMA_VERSION,
    "seed": 0,
    "out_dir": "runs/out",
    "simulate": {
        "matches": 100,
        "cycles": 1000,
        "players_per_team": 2,
        "master_seed": None,
    },
    "encode": {
        "window_cycles": 10,
    },
    "mine": {
        "min_len": 2,
        "max_len": 5,
        "top_patterns": 25,
        "lookback": 5,
    },
    "train_fmaca": {
        "window": 5,
        "population_size": 50,
        "generations": 40,
        "seed": None,
    },
    "train_lcs": {
        "env": "match",
        "population_size": 200,
        "iters": 20000,
        "ga_period": 4000,
        "bid_fraction": 0.1,
        "reward_win": 1000.0,
        "reward_play": 50.0,
        "mutation_rate": 0.02,
        "seed": None,
    },
    "diagnose": {
        "n_cells": 8,
        "population_size": 30,
        "generations": 12,
        "window": 10,
        "run_steps": 400,
        "trials": 5,
        "seed": None,
    },
}


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for reporting."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


# ----- run config ---------------------------------------------------------

def _check_keys(given: dict, allowed: dict, path: str):
    for key in given:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise ValueError(f"unknown config key {where!r}")


def resolve_config(file_config: dict | None = None,
                   overrides: dict | None = None) -> dict:
    """Defaults <- config file <- flag overrides, with every seed made
    explicit and unknown keys rejected."""
    resolved = copy.deepcopy(DEFAULT_CONFIG)

    for source in (file_config, overrides):
        if not source:
            continue
        _check_keys(source, DEFAULT_CONFIG, "")
        for key, value in source.items():
            if isinstance(DEFAULT_CONFIG[key], dict):
                if not isinstance(value, dict):
                    raise ValueError(f"config section {key!r} must be an object")
                _check_keys(value, DEFAULT_CONFIG[key], key)
                resolved[key].update(value)
            else:
                resolved[key] = value

    if resolved["schema_version"] != CONFIG_SCHEMA_VERSION:
        raise ValueError(f"unsupported config schema_version "
                         f"{resolved['schema_version']!r}")
    seed = int(resolved["seed"])
    resolved["seed"] = seed
    # stage seeds default to fixed offsets so the resolved file is fully
    # explicit and two stages never share a stream by accident
    if resolved["simulate"]["master_seed"] is None:
        resolved["simulate"]["master_seed"] = seed
    if resolved["train_fmaca"]["seed"] is None:
        resolved["train_fmaca"]["seed"] = seed + 1
    if resolved["train_lcs"]["seed"] is None:
        resolved["train_lcs"]["seed"] = seed + 2
    if resolved["diagnose"]["seed"] is None:
        resolved["diagnose"]["seed"] = seed + 3
    return resolved


def load_config_file(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_resolved_config(config: dict, out_dir: Path) -> Path:
    path = out_dir / "config.resolved.json"
    with open(path, "w") as fh:
        json.dump(config, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


# ----- corpus manifest ------------------------------------------------------

@dataclass
class ManifestEntry:
    match_id: str
    log_path: str
    sequence_path: str | None = None
    annotations_path: str | None = None


@dataclass
class CorpusManifest:
    window_cycles: int | None = None
    created_at: str = ""
    entries: list = field(default_factory=list)

    def validate(self, base_dir) -> None:
        base = Path(base_dir)
        ids = [e.match_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("manifest match_ids are not unique")
        for entry in self.entries:
            for attr in ("log_path", "sequence_path", "annotations_path"):
                rel = getattr(entry, attr)
                if rel is not None and not (base / rel).exists():
                    raise FileNotFoundError(
                        f"manifest references missing {attr} {rel!r}")


def save_manifest(manifest: CorpusManifest, path) -> None:
    doc = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "created_at": manifest.created_at,
        "window_cycles": manifest.window_cycles,
        "entries": [vars(e) for e in manifest.entries],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> CorpusManifest:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise ValueError("unsupported manifest schema_version")
    return CorpusManifest(
        window_cycles=doc["window_cycles"],
        created_at=doc["created_at"],
        entries=[ManifestEntry(**e) for e in doc["entries"]],
    )


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


# ----- stages ---------------------------------------------------------------

def stage_simulate(config: dict, out_dir: Path) -> Path:
    """Run the seeded match corpus; write one JSONL log per match plus the
    manifest skeleton."""
    sim = config["simulate"]
    logs_dir = out_dir / "logs"
    logs_dir.mkdir(parents=True, exist_ok=True)
    manifest = CorpusManifest(created_at=_timestamp())
    for i in range(int(sim["matches"])):
        match_id = f"m{i:03d}"
        field_config = FieldConfig(
            cycle_count=int(sim["cycles"]),
            rng_seed=int(sim["master_seed"]) + i,
            players_per_team=int(sim["players_per_team"]),
        )
        home = ShootingPolicy(field_config, team=HOME)
        away = ShootingPolicy(field_config, team=AWAY)
        match_log = run_match(home, away, field_config)
        if not match_log.valid:
            raise RuntimeError(f"match {match_id} aborted mid-run")
        rel = f"logs/{match_id}.jsonl"
        save_match_log(match_log, out_dir / rel)
        manifest.entries.append(ManifestEntry(match_id=match_id, log_path=rel))
        log.info("simulated %s: score %s", match_id, match_log.score)
    manifest_path = out_dir / "manifest.json"
    save_manifest(manifest, manifest_path)
    return manifest_path


def annotate_log(match_log, window_cycles: int) -> list:
    """(window_index, label) events: one goal entry per goal event, one
    threat entry per window with an effective attacking kick close to the
    opponent goal line."""
    events = []
    threat_line = match_log.config.length / 2.0 - THREAT_DISTANCE
    threat_windows = set()
    first_agents, _ball = match_log.per_cycle_states[0]
    teams = {agent.id: agent.team for agent in first_agents}
    for event in match_log.events:
        window = event.cycle // window_cycles
        if event.kind == "goal":
            events.append((window, GOAL))
        elif event.kind == "kick" and event.effective:
            agents, ball = match_log.per_cycle_states[event.cycle]
            team = teams.get(event.agent)
            if team == HOME and ball.x > threat_line:
                threat_windows.add(window)
            elif team == AWAY and ball.x < -threat_line:
                threat_windows.add(window)
    events.extend((w, THREAT) for w in sorted(threat_windows))
    return sorted(events)


def stage_encode(config: dict, out_dir: Path) -> Path:
    """Encode every logged match into game/player sequences plus
    goal/threat window annotations; fill the manifest paths in."""
    window_cycles = int(config["encode"]["window_cycles"])
    manifest_path = out_dir / "manifest.json"
    manifest = load_manifest(manifest_path)
    manifest.validate(out_dir)
    (out_dir / "sequences").mkdir(exist_ok=True)
    (out_dir / "annotations").mkdir(exist_ok=True)
    for entry in manifest.entries:
        match_log = load_match_log(out_dir / entry.log_path)
        game = encode_game(match_log, window_cycles, game_id=entry.match_id)
        agents, _ball = match_log.per_cycle_states[0]
        players = [encode_player(match_log, game, a.id)
                   for a in sorted(agents, key=lambda a: a.id)]
        seq_rel = f"sequences/{entry.match_id}.fasta"
        sequences.write_fasta([game] + players, out_dir / seq_rel)
        ann_rel = f"annotations/{entry.match_id}.json"
        with open(out_dir / ann_rel, "w") as fh:
            json.dump({
                "schema_version": REPORT_SCHEMA_VERSION,
                "match_id": entry.match_id,
                "window_cycles": window_cycles,
                "events": annotate_log(match_log, window_cycles),
            }, fh, indent=1, sort_keys=True)
            fh.write("\n")
        entry.sequence_path = seq_rel
        entry.annotations_path = ann_rel
    manifest.window_cycles = window_cycles
    manifest.created_at = _timestamp()
    save_manifest(manifest, manifest_path)
    return manifest_path


def _load_corpus(out_dir: Path, manifest: CorpusManifest):
    """(game AnnotatedSequences, player AnnotatedSequences); players carry
    their game's events since window indices align."""
    games = []
    players = []
    for entry in manifest.entries:
        if entry.sequence_path is None or entry.annotations_path is None:
            raise FileNotFoundError(
                f"match {entry.match_id} has no encoded sequences; "
                "run the encode stage first")
        with open(out_dir / entry.annotations_path) as fh:
            doc = json.load(fh)
        if doc.get("schema_version") != REPORT_SCHEMA_VERSION:
            raise ValueError("unsupported annotations schema_version")
        events = [(int(w), str(label)) for w, label in doc["events"]]
        for header, letters in sequences.read_fasta(out_dir / entry.sequence_path):
            seq = AnnotatedSequence(header, letters, events)
            if header.startswith("game:"):
                games.append(seq)
            else:
                players.append(seq)
    return games, players


def stage_mine(config: dict, out_dir: Path) -> Path:
    """Mine player sequences for frequent patterns and tandem runs and
    score the motif tables against the annotated corpus."""
    params = config["mine"]
    manifest = load_manifest(out_dir / "manifest.json")
    manifest.validate(out_dir)
    games, players = _load_corpus(out_dir, manifest)

    query = PatternQuery(int(params["min_len"]), int(params["max_len"]))
    report = mining.mine_report([(s.sequence_id, s.letters) for s in players],
                                query)
    totals = {}
    for pattern, count, _seq_id in report.rows:
        totals[pattern] = totals.get(pattern, 0) + count
    top = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    top = top[:int(params["top_patterns"])]

    # motifs speak the action alphabet, so rates are taken over player
    # sequences (each carries its game's event windows)
    lookback = int(params["lookback"])
    rates = []
    for motif in DEFAULT_MOTIFS:
        try:
            rate = mining.motif_occurrence_rate(players, motif, lookback)
        except ValueError:
            rate = None  # corpus has no events with this label
        rates.append({"template": motif.template, "label": motif.label,
                      "band": motif.confidence_band, "rate": rate})

    mining_dir = out_dir / "mining"
    mining_dir.mkdir(exist_ok=True)
    path = mining_dir / "report.json"
    with open(path, "w") as fh:
        json.dump({
            "schema_version": REPORT_SCHEMA_VERSION,
            "query": {"min_len": query.min_len, "max_len": query.max_len},
            "lookback": lookback,
            "patterns": top,
            "tandem_runs": report.tandem_runs,
            "motif_rates": rates,
        }, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def _motif_windows(window: int) -> list:
    """Concrete goal/threat exemplars expanded from the motif tables;
    wildcards range over the action letters and short templates are
    left-padded with idle."""
    out = []
    for motif in DEFAULT_MOTIFS:
        template = motif.template[-window:].rjust(window, "-")
        expansions = [""]
        for ch in template:
            letters = "ACGT" if ch == mining.WILDCARD else ch
            expansions = [prefix + letter
                          for prefix in expansions for letter in letters]
        out.extend((text, motif.label) for text in expansions)
    return out


def _corpus_windows(players: list, window: int) -> list:
    """Action windows ending at each annotated event, one per player who
    did anything in that span (all-idle windows carry no signal)."""
    out = []
    for seq in players:
        for index, label in seq.events:
            if label not in (GOAL, THREAT):
                continue
            text = seq.letters[max(0, index + 1 - window):index + 1]
            text = text.rjust(window, "-")
            if set(text) == {"-"}:
                continue
            out.append((text, label))
    return out


def stage_train_fmaca(config: dict, out_dir: Path) -> Path:
    """Fit the attractor-basin window classifier on goal/threat windows
    from the corpus plus the motif-table exemplars."""
    params = config["train_fmaca"]
    window = int(params["window"])
    manifest = load_manifest(out_dir / "manifest.json")
    _games, players = _load_corpus(out_dir, manifest)

    samples = _motif_windows(window) + _corpus_windows(players, window)
    seen = set()
    windows, labels = [], []
    for text, label in samples:
        if (text, label) in seen:
            continue
        seen.add((text, label))
        windows.append(text)
        labels.append(label)

    ga = GaConfig(population_size=int(params["population_size"]),
                  generations=int(params["generations"]),
                  rng_seed=int(params["seed"]))
    tree = fit_window_classifier(windows, labels, ga=ga)

    predicted = classify_batch(tree, np.array([encode_window(w) for w in windows]))
    wanted = np.array([1 if label == GOAL else 2 for label in labels])
    accuracy = float((predicted == wanted).mean())

    fmaca_dir = out_dir / "fmaca"
    fmaca_dir.mkdir(exist_ok=True)
    tree_path = fmaca_dir / "tree.json"
    save_tree(tree, tree_path)
    with open(fmaca_dir / "metrics.json", "w") as fh:
        json.dump({
            "schema_version": REPORT_SCHEMA_VERSION,
            "n_windows": len(windows),
            "training_accuracy": round(accuracy, 6),
            "tree_depth": tree.depth(),
        }, fh, indent=1, sort_keys=True)
        fh.write("\n")
    log.info("fmaca training accuracy %.3f on %d windows", accuracy, len(windows))
    return tree_path


def _lcs_config(params: dict) -> LcsConfig:
    return LcsConfig(
        population_size=int(params["population_size"]),
        bid_fraction=float(params["bid_fraction"]),
        ga_period=int(params["ga_period"]),
        max_iterations=int(params["iters"]),
        reward_win=float(params["reward_win"]),
        reward_play=float(params["reward_play"]),
        mutation_rate=float(params["mutation_rate"]),
        rng_seed=int(params["seed"]),
    )


def _miner_stats_from_report(path) -> MinerStats:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise ValueError("unsupported mining report schema_version")
    patterns = [(str(p), int(c)) for p, c in doc["patterns"]]
    return MinerStats(patterns=patterns, motifs=list(DEFAULT_MOTIFS))


def stage_train_lcs(config: dict, out_dir: Path) -> Path:
    """Train the classifier system on replayed corpus sequences (or the
    built-in oracle) and write the population and learning curve."""
    params = config["train_lcs"]
    lcs_config = _lcs_config(params)
    env_name = params["env"]
    environment = None
    if env_name == "oracle":
        environment = SuffixOracleEnvironment(lcs_config)
    elif env_name == "match":
        manifest = load_manifest(out_dir / "manifest.json")
        _games, players = _load_corpus(out_dir, manifest)
        stats = _miner_stats_from_report(out_dir / "mining" / "report.json")
        try:
            environment = SequenceReplayEnvironment(players, lcs_config, stats)
        except ValueError:
            # an all-idle corpus (possession never held for a window
            # majority) has nothing to learn from; write the seeded
            # starting population untrained rather than aborting the run
            log.warning("corpus has no usable context windows; "
                        "writing untrained population")
    else:
        raise ValueError(f"unknown environment {env_name!r}")

    if environment is None:
        rng = np.random.default_rng(lcs_config.rng_seed)
        population = Population.random(lcs_config, rng)
        curve = LearningCurve(points=[])
    else:
        population, curve = train(environment, lcs_config)
    lcs_dir = out_dir / "lcs"
    lcs_dir.mkdir(exist_ok=True)
    with open(lcs_dir / "population.csv", "w") as fh:
        fh.write(population_to_csv(population))
    curve_path = lcs_dir / "curve.csv"
    with open(curve_path, "w") as fh:
        fh.write(curve_to_csv(curve))
    if curve.points:
        log.info("lcs final proportion_correct %.3f", curve.points[-1][1])
    return curve_path


def stage_diagnose(config: dict, out_dir: Path) -> Path:
    """Evolve a rule vector on the synthetic task and log per-generation
    entropy/MI of the best vector."""
    params = config["diagnose"]
    ga = GaConfig(population_size=int(params["population_size"]),
                  generations=int(params["generations"]),
                  rng_seed=int(params["seed"]))
    diag = DiagnosticsConfig(window=int(params["window"]),
                             run_steps=int(params["run_steps"]),
                             trials=int(params["trials"]),
                             rng_seed=int(params["seed"]))
    rows = ga_diagnostics(int(params["n_cells"]), ga, diag)
    diag_dir = out_dir / "diagnostics"
    diag_dir.mkdir(exist_ok=True)
    path = diag_dir / "ga_diagnostics.csv"
    with open(path, "w") as fh:
        fh.write(diagnostics_to_csv(rows))
    return path


_STAGE_FUNCTIONS = {
    "simulate": stage_simulate,
    "encode": stage_encode,
    "mine": stage_mine,
    "train-fmaca": stage_train_fmaca,
    "train-lcs": stage_train_lcs,
    "diagnose": stage_diagnose,
}


def run_stage(name: str, config: dict, out_dir) -> Path:
    """One stage with failures wrapped so callers learn the stage name."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return _STAGE_FUNCTIONS[name](config, out)
    except StageError:
        raise
    except Exception as err:
        raise StageError(name, err) from err


def pipeline_run(config: dict) -> dict:
    """All six stages in order; artifacts land under config['out_dir'].

    Raises StageError on the first failing stage, leaving earlier
    artifacts in place.  Returns {stage: artifact path}.
    """
    out_dir = Path(config["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    write_resolved_config(config, out_dir)
    artifacts = {}
    for name in STAGES:
        log.info("running stage %s", name)
        artifacts[name] = run_stage(name, config, out_dir)
    return artifacts


def build_corpus(n_matches: int, config: dict | None = None,
                 out_dir=None) -> CorpusManifest:
    """Simulate and encode a corpus of n_matches seeded matches; returns
    the validated manifest."""
    if n_matches < 1:
        raise ValueError("n_matches must be >= 1")
    resolved = resolve_config(config)
    resolved["simulate"]["matches"] = int(n_matches)
    out = Path(out_dir if out_dir is not None else resolved["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    run_stage("simulate", resolved, out)
    manifest_path = run_stage("encode", resolved, out)
    manifest = load_manifest(manifest_path)
    manifest.validate(out)
    return manifest
