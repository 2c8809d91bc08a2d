#!/usr/bin/env python3
"""Run the bundled desk-scale benchmark and print the condition table.

Reproduces the committed suite measurement: the goal-seeker agent on the
50 bundled scenes under the bump-shaped degradation profile, comparing the
random-intensity baseline against the static attack and the static+dynamic
cascade. Deterministic; rerunning yields byte-identical record files.

    python3 scripts/run_benchmark.py [--out DIR] [--workers N]
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from lightattack.metrics import compute_asr, compute_el
from lightattack.pipeline import ExperimentConfig, load_config_scenes, run_condition, summarize
from lightattack.reporting import write_manifest, write_records, write_summary


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/benchmark")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    manifest = json.loads((REPO / "src" / "lightattack" / "data" / "suite_manifest.json").read_text())
    bench = manifest["benchmark_config"]
    config = ExperimentConfig(
        scenes="builtin:suite50", agent=bench["agent"], max_steps=bench["max_steps"],
        seeds=tuple(bench["seeds"]), degradation=bench["degradation"],
        attack="sila_dila", pipeline_mode=bench["pipeline_mode"],
        sila_alpha=bench["sila_alpha"], sila_iterations=bench["sila_iterations"],
        sila_epsilon=bench["sila_epsilon"], output_dir=args.out,
        workers=args.workers, task_id="benchmark")
    scenes = load_config_scenes(config)

    started = time.monotonic()
    records = {"clean": run_condition(scenes, config, "clean")}
    for condition in ("random_intensity", "sila", "sila_dila"):
        records[condition] = run_condition(scenes, config, condition)
    elapsed = time.monotonic() - started

    clean = records["clean"]
    print(f"{'condition':>18s} {'asr':>8s} {'el':>8s}")
    print(f"{'clean':>18s} {'-':>8s} {compute_el(clean):8.2f}")
    for condition in ("random_intensity", "sila", "sila_dila"):
        asr = compute_asr(clean, records[condition])
        print(f"{condition:>18s} {asr:8.2f} {compute_el(records[condition]):8.2f}")
    print(f"total runtime: {elapsed:.1f}s over {len(scenes)} scenes")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    flat = [r for recs in records.values() for r in recs]
    write_records(out / "records.jsonl", flat)
    write_summary(out / "summary.csv", summarize(flat))
    write_manifest(out / "manifest.json", config.to_dict(), list(config.seeds))
    print(f"wrote {out}/records.jsonl, summary.csv, manifest.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
