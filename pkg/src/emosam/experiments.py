"""Batch experiment harness: multi-seed runs, CSV/JSON outputs, and the
selection-by-trigger ablation grid.

A run writes one window CSV and one summary JSON per seed plus an aggregate
JSON; the ablation grid reuses the exact single-run helper per cell, so any
grid cell is reproducible standalone with the same seed list.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .engine import (
    EngineConfig,
    RunResult,
    SelectionStrategy,
    TriggerPolicy,
    run_sam_baseline,
    run_stream,
)
from .stream import BiasStreamConfig, Chunk, StreamManifest, generate_bias_stream, ingest

__all__ = [
    "DESK_PRESET",
    "ExperimentSpec",
    "apply_desk_preset",
    "load_chunks",
    "run_single",
    "run_experiment",
    "compare_ablations",
    "ABLATION_HEADER",
]

# Small-footprint settings for laptop-class smoke runs: shorter windows,
# tighter memories, and a lighter optimizer.
DESK_PRESET = {
    "window_size": 250,
    "stm_cap": 500,
    "ltm_cap": 500,
    "swarm_size": 20,
    "iterations": 5,
}

ABLATION_HEADER = [
    "selection",
    "trigger",
    "seeds",
    "mean_error",
    "mean_abs_discrimination",
    "mean_triggers",
    "mean_wall_time_ms",
]


def apply_desk_preset(config: EngineConfig, window_size: int | None = None) -> tuple[EngineConfig, int]:
    """Overlay the desk preset onto a config; returns (config, window_size)."""
    smpso = replace(
        config.smpso,
        swarm_size=DESK_PRESET["swarm_size"],
        iterations=DESK_PRESET["iterations"],
    )
    cfg = replace(
        config,
        stm_cap=DESK_PRESET["stm_cap"],
        ltm_cap=DESK_PRESET["ltm_cap"],
        smpso=smpso,
    )
    return cfg, (window_size if window_size is not None else DESK_PRESET["window_size"])


@dataclass
class ExperimentSpec:
    """What to run: one data source, one engine config, a list of seeds.

    Exactly one of ``manifest_path`` and ``generator_config_path`` must be
    set. ``window_size`` overrides the source's own window when given.
    """

    engine: EngineConfig = field(default_factory=EngineConfig)
    manifest_path: Path | None = None
    generator_config_path: Path | None = None
    seeds: tuple[int, ...] = tuple(range(30))
    output_dir: Path = Path("results")
    include_baseline: bool = False
    window_size: int | None = None

    def __post_init__(self) -> None:
        if self.manifest_path is not None:
            self.manifest_path = Path(self.manifest_path)
        if self.generator_config_path is not None:
            self.generator_config_path = Path(self.generator_config_path)
        self.output_dir = Path(self.output_dir)
        self.seeds = tuple(int(s) for s in self.seeds)

    def validate(self) -> None:
        have_manifest = self.manifest_path is not None
        have_generator = self.generator_config_path is not None
        if have_manifest == have_generator:
            raise ValueError("set exactly one of manifest_path and generator_config_path")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be unique")
        if self.window_size is not None and self.window_size < 10:
            raise ValueError("window_size must be at least 10")
        self.engine.validate()


def load_chunks(spec: ExperimentSpec) -> list[Chunk]:
    """Materialize the spec's stream as windows, honoring any window override."""
    if spec.manifest_path is not None:
        manifest = StreamManifest.from_json(spec.manifest_path)
        if spec.window_size is not None:
            manifest = replace(manifest, window_size=spec.window_size)
            manifest.validate()
        return ingest(manifest).chunks
    gen = BiasStreamConfig.from_json(spec.generator_config_path)
    if spec.window_size is not None:
        gen = replace(gen, window_size=spec.window_size)
    return generate_bias_stream(gen)


def run_single(chunks: Sequence[Chunk], config: EngineConfig, seed: int) -> RunResult:
    """One engine run with the given seed substituted into the config."""
    return run_stream(chunks, replace(config, seed=seed))


def _write_windows_csv(path: Path, result: RunResult) -> None:
    from .metrics import WINDOW_CSV_HEADER

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(WINDOW_CSV_HEADER)
        for record in result.records:
            writer.writerow(record.to_csv_row())


def _aggregate(summaries: list[dict]) -> dict:
    """Across-seed best/mean/std; std is the population standard deviation.

    "Best" means highest accuracy but lowest discrimination; for the other
    keys no direction is privileged and only the spread is reported.
    """
    keys = ("accuracy", "abs_discrimination", "triggers", "wall_time_ms")
    out: dict = {"seeds": [s["seed"] for s in summaries]}
    for key in keys:
        values = np.array([s[key] for s in summaries], dtype=np.float64)
        stats = {
            "mean": float(values.mean()),
            "std": float(values.std()),
            "min": float(values.min()),
            "max": float(values.max()),
        }
        if key == "accuracy":
            stats["best"] = stats["max"]
        elif key == "abs_discrimination":
            stats["best"] = stats["min"]
        out[key] = stats
    best = max(summaries, key=lambda s: s["accuracy"])
    out["best_seed_by_accuracy"] = best["seed"]
    return out


def run_experiment(spec: ExperimentSpec) -> dict:
    """Run every seed, write per-seed and aggregate outputs, return the aggregate."""
    spec.validate()
    chunks = load_chunks(spec)
    spec.output_dir.mkdir(parents=True, exist_ok=True)

    summaries: list[dict] = []
    baseline_summaries: list[dict] = []
    for seed in spec.seeds:
        result = run_single(chunks, spec.engine, seed)
        _write_windows_csv(spec.output_dir / f"windows_seed{seed:04d}.csv", result)
        summary = {"seed": seed, **result.summary.to_dict()}
        with open(spec.output_dir / f"summary_seed{seed:04d}.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
        summaries.append(summary)

        if spec.include_baseline:
            base = run_sam_baseline(
                chunks,
                k=spec.engine.k,
                stm_cap=spec.engine.stm_cap,
                ltm_cap=spec.engine.ltm_cap,
                min_stm_size=spec.engine.min_stm_size,
                tracker_decay=spec.engine.tracker_decay,
                seed=seed,
                tie_label=spec.engine.tie_label,
            )
            _write_windows_csv(spec.output_dir / f"baseline_windows_seed{seed:04d}.csv", base)
            base_summary = {"seed": seed, **base.summary.to_dict()}
            with open(
                spec.output_dir / f"baseline_summary_seed{seed:04d}.json", "w", encoding="utf-8"
            ) as fh:
                json.dump(base_summary, fh, indent=2)
                fh.write("\n")
            baseline_summaries.append(base_summary)

    aggregate = {"engine": _aggregate(summaries)}
    if baseline_summaries:
        aggregate["baseline"] = _aggregate(baseline_summaries)
    with open(spec.output_dir / "aggregate.json", "w", encoding="utf-8") as fh:
        json.dump(aggregate, fh, indent=2)
        fh.write("\n")
    return aggregate


def compare_ablations(
    chunks: Sequence[Chunk],
    config: EngineConfig,
    seeds: Sequence[int],
    output_path: Path | None = None,
) -> list[dict]:
    """Full 3x3 grid of selection strategies by trigger policies.

    Every cell runs the same seeds through :func:`run_single`, so a cell's
    numbers match a standalone run with that selection and trigger.
    """
    if not seeds:
        raise ValueError("need at least one seed")
    rows: list[dict] = []
    for selection in (SelectionStrategy.MAJORITY, SelectionStrategy.RANDOM, SelectionStrategy.KNEE):
        for trigger in (TriggerPolicy.HP, TriggerPolicy.EVERY, TriggerPolicy.PREVIOUS):
            cell_config = replace(config, selection=selection, trigger=trigger)
            errors = []
            discs = []
            trigger_counts = []
            walls = []
            for seed in seeds:
                result = run_single(chunks, cell_config, seed)
                errors.append(1.0 - result.summary.accuracy)
                discs.append(result.summary.abs_discrimination)
                trigger_counts.append(result.summary.triggers)
                walls.append(result.summary.wall_time_ms)
            rows.append(
                {
                    "selection": selection.value,
                    "trigger": trigger.value,
                    "seeds": len(seeds),
                    "mean_error": float(np.mean(errors)),
                    "mean_abs_discrimination": float(np.mean(discs)),
                    "mean_triggers": float(np.mean(trigger_counts)),
                    "mean_wall_time_ms": float(np.mean(walls)),
                }
            )
    if output_path is not None:
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(ABLATION_HEADER)
            for row in rows:
                writer.writerow(
                    [
                        row["selection"],
                        row["trigger"],
                        row["seeds"],
                        repr(row["mean_error"]),
                        repr(row["mean_abs_discrimination"]),
                        repr(row["mean_triggers"]),
                        repr(row["mean_wall_time_ms"]),
                    ]
                )
    return rows
