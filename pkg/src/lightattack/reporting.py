"""Result persistence: line-delimited records, summary tables, manifests.

Files are written in a canonical order with canonical JSON (sorted keys,
compact separators, repr floats), so a rerun with identical seeds produces
byte-identical outputs regardless of execution order or parallelism.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .episode import Trajectory
from .metrics import EpisodeRecord, EvalReport, RECORD_SCHEMA, SweepRow
from .scene import SCENE_SCHEMA

MANIFEST_SCHEMA = "manifest/v1"
REPORT_SCHEMA = "report/v1"


def canonical_json(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def record_to_dict(record: EpisodeRecord) -> dict:
    return {
        "schema": RECORD_SCHEMA,
        "episode_id": record.episode_id,
        "condition": record.condition,
        "success": record.success,
        "episode_length": record.episode_length,
        "final_intensity": record.final_intensity,
        "rollouts_used": record.rollouts_used,
        "seed": record.seed,
    }


def record_from_dict(obj: dict) -> EpisodeRecord:
    if obj.get("schema") != RECORD_SCHEMA:
        raise ValueError(f"expected record schema {RECORD_SCHEMA!r}, got {obj.get('schema')!r}")
    return EpisodeRecord(
        episode_id=obj["episode_id"],
        condition=obj["condition"],
        success=obj["success"],
        episode_length=obj["episode_length"],
        final_intensity=obj["final_intensity"],
        rollouts_used=obj["rollouts_used"],
        seed=obj["seed"],
    )


def write_records(path: str | Path, records: list[EpisodeRecord]) -> None:
    ordered = sorted(records, key=lambda r: (r.condition, r.episode_id))
    lines = [canonical_json(record_to_dict(r)) for r in ordered]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_records(path: str | Path) -> list[EpisodeRecord]:
    records = []
    for i, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(record_from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ValueError(f"{path}:{i}: bad record line: {exc}") from exc
    return records


def report_to_dict(report: EvalReport) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "task_id": report.task_id,
        "n_episodes": report.n_episodes,
        "n_clean_success": report.n_clean_success,
        "asr": report.asr,
        "el_clean": report.el_clean,
        "el_attack": report.el_attack,
        "records": [record_to_dict(r) for r in report.records],
    }


def report_from_dict(obj: dict) -> EvalReport:
    if obj.get("schema") != REPORT_SCHEMA:
        raise ValueError(f"expected report schema {REPORT_SCHEMA!r}, got {obj.get('schema')!r}")
    return EvalReport(
        task_id=obj["task_id"],
        n_episodes=obj["n_episodes"],
        n_clean_success=obj["n_clean_success"],
        asr=obj["asr"],
        el_clean=obj["el_clean"],
        el_attack=obj["el_attack"],
        records=tuple(record_from_dict(r) for r in obj["records"]),
    )


def write_report(path: str | Path, report: EvalReport) -> None:
    Path(path).write_text(canonical_json(report_to_dict(report)) + "\n")


def read_report(path: str | Path) -> EvalReport:
    return report_from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class SummaryRow:
    condition: str
    asr: float | None
    el: float
    n: int
    rollouts_mean: float


def write_summary(path: str | Path, rows: list[SummaryRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["condition", "asr", "el", "n", "rollouts_mean"])
        for row in sorted(rows, key=lambda r: r.condition):
            asr = "undefined" if row.asr is None else repr(row.asr)
            writer.writerow([row.condition, asr, repr(row.el), row.n, repr(row.rollouts_mean)])


def write_sweep(path: str | Path, rows: list[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["intensity", "success_rate"])
        for row in rows:
            writer.writerow([repr(row.intensity), repr(row.success_rate)])


def write_trajectory(path: str | Path, trajectory: Trajectory) -> None:
    """Plot-ready per-step dump: t, x, z, rot_y, applied intensity, action."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "z", "rot_y", "l_t", "action"])
        rows = zip(trajectory.poses, trajectory.actions, trajectory.applied_intensities)
        for t, (pose, action, level) in enumerate(rows, start=1):
            writer.writerow([t, repr(pose.x), repr(pose.z), repr(pose.rot_y),
                             repr(level), action.encode()])


def config_digest(config_obj: dict) -> str:
    return hashlib.sha256(canonical_json(config_obj).encode()).hexdigest()


def write_manifest(path: str | Path, config_obj: dict, seeds: list[int]) -> None:
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "config": config_obj,
        "config_sha256": config_digest(config_obj),
        "seeds": list(seeds),
        "versions": {
            "package": __version__,
            "record_schema": RECORD_SCHEMA,
            "report_schema": REPORT_SCHEMA,
            "scene_schema": SCENE_SCHEMA,
        },
    }
    Path(path).write_text(canonical_json(manifest) + "\n")
