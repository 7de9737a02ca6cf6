"""Figure specifications and the CSV schemas they consume.

The renderer is strictly presentation: it reads the delimited files the
phonon-contrast CLI writes and knows nothing about how the numbers were made.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

FIGURE_IDS = ("fig3", "fig4", "fig5", "fig6a", "fig6b", "fig6c", "fig6d", "dipole")

REQUIRED_INPUTS = {
    "fig3": ("spin", "dia"),
    "fig4": ("spin", "dia"),
    "fig5": ("curves",),
    "fig6a": ("map", "overlay"),
    "fig6b": ("map", "overlay"),
    "fig6c": ("map", "overlay"),
    "fig6d": ("map", "overlay"),
    "dipole": ("estimate",),
}

SERIES_COLUMNS = ["t", "u_L", "udot_L", "u_R", "udot_R", "n_L", "n_R"]
CONTRAST_COLUMNS = [
    "channel", "M", "delta_x", "delta_t", "flight_fraction", "T",
    "neg_ln_c", "contrast", "modes_used", "fidelity",
]
OVERLAY_COLUMNS = ["kind", "segment", "x", "y"]
DIPOLE_COLUMNS = ["eta_e", "prefactor_sq", "neg_ln_c", "contrast"]


class SchemaError(ValueError):
    """An input CSV does not match its documented schema."""


@dataclass(frozen=True)
class FigureSpec:
    figure: str
    inputs: dict
    out: str
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.figure not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure!r}; expected one of {FIGURE_IDS}")
        missing = [k for k in REQUIRED_INPUTS[self.figure] if k not in self.inputs]
        if missing:
            raise ValueError(f"figure {self.figure!r} needs inputs {missing}")
        for key, path in self.inputs.items():
            if not Path(path).exists():
                raise ValueError(f"input {key!r} does not exist: {path}")


def spec_from_json(doc) -> FigureSpec:
    if isinstance(doc, (str, Path)):
        with open(doc) as fh:
            doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("figure spec must be a JSON object")
    unknown = set(doc) - {"figure", "inputs", "out", "style"}
    if unknown:
        raise ValueError(f"unknown spec fields: {sorted(unknown)}")
    try:
        return FigureSpec(
            figure=doc["figure"],
            inputs=dict(doc["inputs"]),
            out=doc["out"],
            style=dict(doc.get("style", {})),
        )
    except KeyError as exc:
        raise ValueError(f"figure spec is missing field {exc}") from exc


def read_csv(path, columns, numeric=None):
    """Read a delimited file, enforcing the documented column set.

    Returns a dict of lists keyed by column. Columns in `numeric` (default:
    everything except known string columns) are parsed as floats.
    """
    if numeric is None:
        numeric = [c for c in columns if c not in ("channel", "fidelity", "kind")]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file")
        if header != columns:
            offending = [c for c in header if c not in columns] + [
                c for c in columns if c not in header
            ]
            raise SchemaError(f"{path}: unexpected columns {offending}")
        out = {c: [] for c in columns}
        for row in reader:
            if len(row) != len(columns):
                raise SchemaError(f"{path}: row with {len(row)} fields, expected {len(columns)}")
            for c, value in zip(columns, row):
                out[c].append(float(value) if c in numeric else value)
    return out
