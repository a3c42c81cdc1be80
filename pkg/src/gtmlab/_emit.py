"""Deterministic CSV/JSON writers shared by the CLI and the recipes.

Output files must be byte-identical across re-runs, so floats are
written with their shortest round-trip representation, JSON keys are
sorted, and nothing time- or path-dependent goes into data files.
"""

from __future__ import annotations

import json
from pathlib import Path

__all__ = ["format_value", "write_csv", "write_json"]


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)):
        return str(value)
    if hasattr(value, "item"):  # numpy scalars
        return format_value(value.item())
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, columns, rows, manifest_name: str | None = None) -> None:
    lines = []
    if manifest_name is not None:
        lines.append(f"# manifest: {manifest_name}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
