"""Tests for the file-based pipeline stages and the CLI wiring."""

import json
import logging
from pathlib import Path

import pytest

from matchdna import pipeline
from matchdna.classifier_system import population_from_csv
from matchdna.cli import main
from matchdna.mining import GOAL, THREAT
from matchdna.pipeline import (
    CorpusManifest,
    ManifestEntry,
    StageError,
    annotate_log,
    build_corpus,
    load_manifest,
    pipeline_run,
    resolve_config,
    run_stage,
    save_manifest,
)
from matchdna.simulator import (
    AWAY,
    HOME,
    FieldConfig,
    MatchEvent,
    MatchLog,
    load_match_log,
    run_match,
)

SMOKE = {
    "seed": 7,
    "simulate": {"matches": 1, "cycles": 200},
    "train_lcs": {"iters": 3000},
    "diagnose": {"generations": 3, "run_steps": 120, "trials": 3},
}


def smoke_config(out_dir) -> dict:
    config = json.loads(json.dumps(SMOKE))
    config["out_dir"] = str(out_dir)
    return resolve_config(config)


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    config = smoke_config(out)
    artifacts = pipeline_run(config)
    return out, config, artifacts


class TestResolveConfig:
    def test_defaults_fill_and_seeds_explicit(self):
        config = resolve_config()
        assert config["simulate"]["matches"] == 100
        assert config["simulate"]["cycles"] == 1000
        for path in (("simulate", "master_seed"), ("train_fmaca", "seed"),
                     ("train_lcs", "seed"), ("diagnose", "seed")):
            section, key = path
            assert config[section][key] is not None

    def test_file_values_override_defaults(self):
        config = resolve_config({"simulate": {"matches": 3}})
        assert config["simulate"]["matches"] == 3
        assert config["simulate"]["cycles"] == 1000

    def test_flags_override_file(self):
        config = resolve_config({"seed": 1}, {"seed": 9})
        assert config["seed"] == 9
        assert config["simulate"]["master_seed"] == 9

    def test_stage_seeds_differ_by_default(self):
        config = resolve_config({"seed": 5})
        seeds = {config["simulate"]["master_seed"],
                 config["train_fmaca"]["seed"],
                 config["train_lcs"]["seed"],
                 config["diagnose"]["seed"]}
        assert len(seeds) == 4

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config key"):
            resolve_config({"simulte": {}})

    def test_unknown_nested_key_rejected(self):
        with pytest.raises(ValueError, match="simulate.matchs"):
            resolve_config({"simulate": {"matchs": 2}})

    def test_bad_schema_version_rejected(self):
        with pytest.raises(ValueError, match="schema_version"):
            resolve_config({"schema_version": 99})

    def test_explicit_stage_seed_kept(self):
        config = resolve_config({"train_lcs": {"seed": 123}})
        assert config["train_lcs"]["seed"] == 123


class TestManifest:
    def entry(self, tmp_path, name="m000"):
        (tmp_path / "logs").mkdir(exist_ok=True)
        (tmp_path / f"logs/{name}.jsonl").write_text("{}\n")
        return ManifestEntry(match_id=name, log_path=f"logs/{name}.jsonl")

    def test_round_trip(self, tmp_path):
        manifest = CorpusManifest(window_cycles=10, created_at="t0",
                                  entries=[self.entry(tmp_path)])
        save_manifest(manifest, tmp_path / "manifest.json")
        back = load_manifest(tmp_path / "manifest.json")
        assert back.window_cycles == 10
        assert back.entries[0].match_id == "m000"
        back.validate(tmp_path)

    def test_duplicate_ids_rejected(self, tmp_path):
        e = self.entry(tmp_path)
        manifest = CorpusManifest(entries=[e, e])
        with pytest.raises(ValueError, match="unique"):
            manifest.validate(tmp_path)

    def test_missing_path_rejected(self, tmp_path):
        manifest = CorpusManifest(entries=[
            ManifestEntry(match_id="m0", log_path="logs/nope.jsonl")])
        with pytest.raises(FileNotFoundError):
            manifest.validate(tmp_path)

    def test_schema_version_checked(self, tmp_path):
        (tmp_path / "manifest.json").write_text(
            '{"schema_version": 99, "created_at": "", '
            '"window_cycles": null, "entries": []}')
        with pytest.raises(ValueError, match="schema_version"):
            load_manifest(tmp_path / "manifest.json")


class TestAnnotateLog:
    def run_small_match(self, seed=3):
        config = FieldConfig(cycle_count=150, rng_seed=seed)
        from matchdna.shooting import ShootingPolicy
        return run_match(ShootingPolicy(config, HOME),
                         ShootingPolicy(config, AWAY), config)

    def test_one_goal_annotation_per_goal_event(self):
        log = self.run_small_match()
        events = annotate_log(log, window_cycles=10)
        goals = [e for e in log.events if e.kind == "goal"]
        assert len([1 for _w, label in events if label == GOAL]) == len(goals)

    def test_goal_window_is_event_cycle_window(self):
        log = self.run_small_match()
        goal_cycles = [e.cycle for e in log.events if e.kind == "goal"]
        goal_windows = sorted(w for w, label in annotate_log(log, 10)
                              if label == GOAL)
        assert goal_windows == sorted(c // 10 for c in goal_cycles)

    def test_threat_requires_effective_kick_near_goal(self):
        config = FieldConfig(cycle_count=5, rng_seed=0)
        log = run_match(None, None, config)
        log.events = [MatchEvent(cycle=2, kind="kick", agent="a",
                                 effective=True)]
        agents, ball = log.per_cycle_states[2]
        ball.x = config.length / 2 - 5.0  # deep in the attacking third
        assert (0, THREAT) in annotate_log(log, 10)
        ball.x = 0.0  # midfield kick: no threat
        assert annotate_log(log, 10) == []

    def test_threat_windows_deduplicated(self):
        config = FieldConfig(cycle_count=5, rng_seed=0)
        log = run_match(None, None, config)
        log.events = [MatchEvent(cycle=1, kind="kick", agent="a", effective=True),
                      MatchEvent(cycle=2, kind="kick", agent="a", effective=True)]
        for cycle in (1, 2):
            log.per_cycle_states[cycle][1].x = config.length / 2 - 1.0
        events = annotate_log(log, 10)
        assert events == [(0, THREAT)]


class TestPipelineRun:
    def test_all_artifacts_exist(self, pipeline_dir):
        out, _config, artifacts = pipeline_dir
        assert set(artifacts) == set(pipeline.STAGES)
        for path in artifacts.values():
            assert Path(path).exists()
        assert (out / "config.resolved.json").exists()
        assert (out / "lcs" / "population.csv").exists()
        assert (out / "fmaca" / "metrics.json").exists()

    def test_artifacts_declare_schema_version(self, pipeline_dir):
        out, _config, _artifacts = pipeline_dir
        for rel in ("manifest.json", "annotations/m000.json",
                    "mining/report.json", "fmaca/tree.json",
                    "fmaca/metrics.json"):
            doc = json.loads((out / rel).read_text())
            assert doc["schema_version"] == 1, rel
        for rel in ("sequences/m000.fasta", "lcs/population.csv",
                    "lcs/curve.csv", "diagnostics/ga_diagnostics.csv"):
            first = (out / rel).read_text().splitlines()[0]
            assert first == "# schema_version=1", rel
        first = (out / "logs/m000.jsonl").read_text().splitlines()[0]
        assert json.loads(first)["schema_version"] == 1

    def test_manifest_complete_after_encode(self, pipeline_dir):
        out, _config, _artifacts = pipeline_dir
        manifest = load_manifest(out / "manifest.json")
        manifest.validate(out)
        entry = manifest.entries[0]
        assert entry.sequence_path and entry.annotations_path

    def test_rerun_is_deterministic_except_timestamps(self, pipeline_dir,
                                                      tmp_path):
        out, _config, _artifacts = pipeline_dir
        config = smoke_config(tmp_path)
        pipeline_run(config)
        for pa in sorted(out.rglob("*")):
            if pa.is_dir():
                continue
            rel = pa.relative_to(out)
            pb = tmp_path / rel
            if rel.name == "manifest.json":
                da = json.loads(pa.read_text())
                db = json.loads(pb.read_text())
                da.pop("created_at")
                db.pop("created_at")
                assert da == db
            elif rel.name == "config.resolved.json":
                da = json.loads(pa.read_text())
                db = json.loads(pb.read_text())
                da.pop("out_dir")
                db.pop("out_dir")
                assert da == db
            else:
                assert pa.read_bytes() == pb.read_bytes(), str(rel)

    def test_missing_corpus_fails_naming_mine(self, tmp_path):
        config = smoke_config(tmp_path / "empty")
        with pytest.raises(StageError) as err:
            run_stage("mine", config, tmp_path / "empty")
        assert err.value.stage == "mine"
        assert "mine" in str(err.value)

    def test_failed_stage_leaves_prior_artifacts(self, tmp_path):
        config = smoke_config(tmp_path)
        run_stage("simulate", config, tmp_path)
        log_bytes = (tmp_path / "logs/m000.jsonl").read_bytes()
        with pytest.raises(StageError):
            run_stage("mine", config, tmp_path)  # encode never ran
        assert (tmp_path / "logs/m000.jsonl").read_bytes() == log_bytes

    def test_mining_report_contents(self, pipeline_dir):
        out, _config, _artifacts = pipeline_dir
        doc = json.loads((out / "mining/report.json").read_text())
        assert doc["patterns"], "corpus should yield at least one pattern"
        for pattern, count in doc["patterns"]:
            assert count >= 1
            assert 2 <= len(pattern) <= 5
        assert len(doc["motif_rates"]) == 8

    def test_lcs_curve_parses(self, pipeline_dir):
        out, _config, _artifacts = pipeline_dir
        lines = (out / "lcs/curve.csv").read_text().splitlines()
        assert lines[1] == "iteration,proportion_correct"
        rows = [line.split(",") for line in lines[2:]]
        iterations = [int(r[0]) for r in rows]
        assert iterations == sorted(iterations)
        assert all(0.0 <= float(r[1]) <= 1.0 for r in rows)

    def test_all_idle_corpus_writes_untrained_population(self, tmp_path, caplog):
        # seed 10 at 200 cycles never gives any agent a window-majority of
        # possession, so every encoded sequence is pure idle
        config = resolve_config({
            "seed": 10, "out_dir": str(tmp_path),
            "simulate": {"matches": 1, "cycles": 200},
            "train_lcs": {"iters": 2000},
        })
        for stage in ("simulate", "encode", "mine"):
            run_stage(stage, config, tmp_path)
        with caplog.at_level(logging.WARNING, logger="matchdna.pipeline"):
            run_stage("train-lcs", config, tmp_path)
        assert "no usable context windows" in caplog.text
        curve_lines = (tmp_path / "lcs/curve.csv").read_text().splitlines()
        assert curve_lines == ["# schema_version=1",
                               "iteration,proportion_correct"]
        population = population_from_csv(
            (tmp_path / "lcs/population.csv").read_text())
        assert len(population) == config["train_lcs"]["population_size"]


class TestBuildCorpus:
    def test_single_match_manifest(self, tmp_path):
        manifest = build_corpus(1, {"seed": 3,
                                    "simulate": {"cycles": 120}},
                                out_dir=tmp_path)
        assert len(manifest.entries) == 1
        entry = manifest.entries[0]
        assert entry.match_id == "m000"
        for rel in (entry.log_path, entry.sequence_path,
                    entry.annotations_path):
            assert (tmp_path / rel).exists()

    def test_seeds_offset_from_master(self, tmp_path):
        build_corpus(2, {"seed": 11, "simulate": {"cycles": 60}},
                     out_dir=tmp_path)
        logs = [load_match_log(tmp_path / f"logs/m{i:03d}.jsonl")
                for i in range(2)]
        assert logs[0].config.rng_seed == 11
        assert logs[1].config.rng_seed == 12

    def test_rejects_zero_matches(self):
        with pytest.raises(ValueError):
            build_corpus(0)

    def test_annotation_count_matches_goal_events(self, tmp_path):
        build_corpus(1, {"seed": 7, "simulate": {"cycles": 200}},
                     out_dir=tmp_path)
        log = load_match_log(tmp_path / "logs/m000.jsonl")
        goals = [e for e in log.events if e.kind == "goal"]
        doc = json.loads((tmp_path / "annotations/m000.json").read_text())
        goal_events = [e for e in doc["events"] if e[1] == GOAL]
        assert len(goal_events) == len(goals)


class TestCli:
    def test_pipeline_subcommand_exit_zero(self, tmp_path, capsys):
        config_path = tmp_path / "cfg.json"
        config_path.write_text(json.dumps(
            {**SMOKE, "out_dir": str(tmp_path / "run")}))
        assert main(["pipeline", "--config", str(config_path)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == len(pipeline.STAGES)

    def test_stage_failure_names_stage_and_exits_nonzero(self, tmp_path,
                                                         capsys):
        code = main(["mine", "--out-dir", str(tmp_path / "nothing")])
        assert code == 1
        assert "mine" in capsys.readouterr().err

    def test_fca_run_prints_trajectory(self, capsys):
        code = main(["fca-run", "--rules", "238,254,238,252",
                     "--state", "0.8,0.2,0.2,0.0", "--deps"])
        assert code == 0
        out = capsys.readouterr().out
        assert "P(4) = (1.00, 1.00, 1.00, 1.00)" in out
        assert "fixed point at step 4" in out
        assert "1100" in out and "1110" in out and "0011" in out

    def test_motifs_lists_tables(self, capsys):
        assert main(["motifs"]) == 0
        out = capsys.readouterr().out
        assert "TCCCT" in out and "CCACC" in out

    def test_motifs_template_scan(self, capsys):
        assert main(["motifs", "--template", "xxCCT",
                     "--letters", "TCCCTA"]) == 0
        assert "1 match(es)" in capsys.readouterr().out

    def test_train_lcs_oracle_quick(self, tmp_path, capsys):
        code = main(["train-lcs", "--env", "oracle", "--iters", "2000",
                     "--seed", "11", "--out-dir", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "lcs/curve.csv").exists()
        assert "proportion_correct" in capsys.readouterr().out

    def test_feedback_on_trained_tree(self, pipeline_dir, capsys):
        out, _config, _artifacts = pipeline_dir
        code = main(["feedback", "--out-dir", str(out),
                     "--letters", "TCCCT"])
        assert code == 0
        verdict = capsys.readouterr().out.strip()
        assert verdict in ("proceed", "veto")

    def test_unknown_config_key_reported(self, tmp_path, capsys):
        config_path = tmp_path / "bad.json"
        config_path.write_text('{"nope": 1}')
        code = main(["pipeline", "--config", str(config_path)])
        assert code == 1
        assert "unknown config key" in capsys.readouterr().err

    def test_individual_stage_subcommands(self, tmp_path, capsys):
        out = str(tmp_path / "run")
        assert main(["simulate", "--matches", "1", "--cycles", "120",
                     "--seed", "5", "--out-dir", out]) == 0
        assert main(["encode", "--out-dir", out]) == 0
        assert main(["mine", "--out-dir", out]) == 0
        report = json.loads((tmp_path / "run/mining/report.json").read_text())
        assert report["schema_version"] == 1
