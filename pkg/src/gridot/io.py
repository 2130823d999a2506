"""File formats: measure CSV ingestion and the plan interchange format.

Measures are grayscale-image style CSV: R lines of C comma-separated
non-negative integers becoming an RxC grid. Plans are emitted as
`src_flat,tgt_flat,mass` lines under a two-line header identifying the
format version and both grid shapes.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .grid import DiscreteMeasure, GridShape
from .sparsity import TransportPlan

PLAN_HEADER = "# gridot-plan v1"


class MeasureFormatError(ValueError):
    """Malformed measure CSV; carries 1-based line/column when known."""

    def __init__(self, path, line: int | None = None, column: int | None = None, reason: str = ""):
        at = ""
        if line is not None:
            at = f" at line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{path}{at}: {reason}")
        self.line = line
        self.column = column


def load_csv_measure(path) -> DiscreteMeasure:
    """Parse an RxC integer CSV image into a measure (zeros allowed)."""
    path = Path(path)
    rows: list[list[int]] = []
    width: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                if width is None:
                    continue
                # blank line inside the grid only legal at EOF
                rest = fh.read().strip()
                if rest:
                    raise MeasureFormatError(path, ln, None, "blank line inside grid")
                break
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise MeasureFormatError(
                    path, ln, None, f"ragged row: {len(cells)} cells, expected {width}"
                )
            row = []
            for col, cell in enumerate(cells, start=1):
                text = cell.strip()
                if not re.fullmatch(r"[+]?\d+", text):
                    raise MeasureFormatError(
                        path, ln, col, f"not a non-negative integer: {text!r}"
                    )
                row.append(int(text))
            rows.append(row)
    if not rows:
        raise MeasureFormatError(path, None, None, "empty file")
    arr = np.asarray(rows, dtype=np.int64)
    return DiscreteMeasure(GridShape((arr.shape[0], arr.shape[1])), arr.ravel())


def _shape_token(shape: GridShape) -> str:
    return "x".join(str(n) for n in shape.dims)


def _parse_shape_token(token: str) -> GridShape:
    return GridShape(tuple(int(t) for t in token.split("x")))


def write_plan(path, plan: TransportPlan) -> None:
    """Emit a plan: version header, shapes line, then src,tgt,mass triples."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(PLAN_HEADER + "\n")
        fh.write(
            f"# source={_shape_token(plan.source_shape)} "
            f"target={_shape_token(plan.target_shape)}\n"
        )
        for s, t, m in plan.entries():
            fh.write(f"{s},{t},{m}\n")


def read_plan(path) -> TransportPlan:
    """Read back a plan written by :func:`write_plan`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != PLAN_HEADER:
            raise ValueError(f"{path}: not a plan file (header {header!r})")
        shapes = fh.readline().strip()
        m = re.fullmatch(r"# source=([0-9x]+) target=([0-9x]+)", shapes)
        if not m:
            raise ValueError(f"{path}: malformed shapes line {shapes!r}")
        source_shape = _parse_shape_token(m.group(1))
        target_shape = _parse_shape_token(m.group(2))
        entries = []
        for ln, raw in enumerate(fh, start=3):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"{path}: line {ln}: expected src,tgt,mass")
            entries.append((int(parts[0]), int(parts[1]), int(parts[2])))
    return TransportPlan.from_entries(source_shape, target_shape, entries)


def write_stats(path, payload: dict) -> None:
    """Dump solve telemetry as JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
