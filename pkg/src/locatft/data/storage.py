"""On-disk corpus: one CSV per case, a JSON sidecar, and a manifest."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from ..csvio import read_csv, write_csv
from .generator import TransientCase
from .preprocess import NormStats

MANIFEST = "manifest.json"


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_case(case: TransientCase, directory) -> Path:
    directory = Path(directory)
    codes = case.signal_codes()
    cols = [case.time_s] + [case.signals[c] for c in codes]
    path = write_csv(directory / f"{case.case_id}.csv", ["time_s", *codes], zip(*[c.tolist() for c in cols]))
    _dump_json(
        directory / f"{case.case_id}.json",
        {
            "case_id": case.case_id,
            "break_location": case.break_location,
            "break_size_cm": case.break_size_cm,
            "sample_rate_hz": case.sample_rate_hz,
            "n_points": case.n_points,
        },
    )
    return path


def read_case(csv_path) -> TransientCase:
    csv_path = Path(csv_path)
    meta = json.loads(csv_path.with_suffix(".json").read_text())
    header, rows = read_csv(csv_path)
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    if header[0] != "time_s":
        raise ValueError(f"{csv_path}: first column must be time_s")
    return TransientCase(
        case_id=meta["case_id"],
        break_location=meta["break_location"],
        break_size_cm=float(meta["break_size_cm"]),
        sample_rate_hz=float(meta["sample_rate_hz"]),
        time_s=data[:, 0].copy(),
        signals={code: data[:, i + 1].copy() for i, code in enumerate(header[1:])},
    )


def write_manifest(
    directory,
    cases: Sequence[TransientCase],
    train_ids: Sequence[str],
    test_ids: Sequence[str],
    norm: NormStats,
    retained: Sequence[str],
    extra: dict | None = None,
) -> Path:
    train_set = set(train_ids)
    test_set = set(test_ids)
    entries = []
    for c in cases:
        role = "train" if c.case_id in train_set else "test" if c.case_id in test_set else "unused"
        entries.append({"case_id": c.case_id, "file": f"{c.case_id}.csv", "split": role})
    path = Path(directory) / MANIFEST
    _dump_json(path, {"cases": entries, "norm_stats": norm.to_dict(), "retained_signals": list(retained), **(extra or {})})
    return path


def read_manifest(directory) -> dict:
    path = Path(directory) / MANIFEST
    if not path.exists():
        raise FileNotFoundError(f"no corpus manifest at {path}")
    return json.loads(path.read_text())


def load_corpus(directory) -> tuple[dict, list[TransientCase]]:
    manifest = read_manifest(directory)
    cases = [read_case(Path(directory) / e["file"]) for e in manifest["cases"]]
    return manifest, cases
