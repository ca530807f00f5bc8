"""CSV/JSON input and output, and the serializable run configuration.

Output column order per artifact:

=====================  ==============================================
artifact               columns
=====================  ==============================================
ProfileTable           setup, variant, designated, tau, mean, std
MultiscaleProfile      tau, entropy
EffectSizeReport       tau, baseline_g, mean_diff, ci_lo, ci_hi
PairedDiffSummary      mean_abs_diff, improved_count, positive_count
TimingTable            algorithm, channels, length, mean_seconds
=====================  ==============================================

Effect-size differences are ``variant g - baseline g`` with
``g = g(first group, second group)``; paired differences are
``state1 - state2``. Floats are written in their shortest exact
(round-trip) decimal form.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Sequence

import numpy as np

from .core import EntropyParams, MultiChannelSeries, MultiscaleProfile, StrataAllocation, Variant
from .errors import InputOutputError, ParseError, ValidationError
from .harness import ProfileTable, TimingTable
from .stats import EffectSizeReport, PairedDiffSummary

__all__ = [
    "load_multichannel_csv",
    "load_distributions",
    "load_pairs",
    "table_for",
    "write_outputs",
    "format_outputs",
    "read_outputs",
    "RunConfig",
    "load_config",
]

def _open(path, mode="r"):
    try:
        return open(path, mode, encoding="utf-8-sig" if "r" in mode else "utf-8", newline="")
    except OSError as exc:
        raise InputOutputError(f"cannot open {path}: {exc.strerror or exc}") from exc


def _read_numeric_table(path) -> tuple[list[str], np.ndarray]:
    with _open(path) as fh:
        try:
            rows = list(csv.reader(fh))
        except (csv.Error, UnicodeDecodeError) as exc:
            raise ParseError(f"{path}: unreadable CSV ({exc})") from exc
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if any(not h for h in header):
        raise ParseError(f"{path}: blank column name in header", row=0)
    if len(set(header)) != len(header):
        raise ParseError(f"{path}: duplicate column names in header", row=0)
    body = rows[1:]
    if not body:
        raise ParseError(f"{path}: table has a header but no rows", row=1)
    data = np.empty((len(body), len(header)))
    for r, row in enumerate(body, start=1):
        if len(row) != len(header):
            raise ParseError(
                f"{path}: row {r} has {len(row)} cells, expected {len(header)}", row=r
            )
        for k, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                value = math.nan
            if not math.isfinite(value):
                raise ParseError(
                    f"{path}: row {r}, column {header[k]}: not a finite number: {cell!r}",
                    row=r,
                    column=header[k],
                )
            data[r - 1, k] = value
    return header, data


def load_multichannel_csv(path) -> MultiChannelSeries:
    """Read a header-plus-rows CSV; each column becomes one channel."""
    header, data = _read_numeric_table(path)
    return MultiChannelSeries(data.T, tuple(header))


def load_distributions(path) -> dict[int, np.ndarray]:
    """Read per-scale distributions: one column per tau (header is the tau value)."""
    header, data = _read_numeric_table(path)
    out = {}
    for k, name in enumerate(header):
        try:
            tau = int(name)
        except ValueError:
            raise ParseError(f"{path}: column name {name!r} is not an integer scale", row=0, column=name) from None
        out[tau] = data[:, k]
    return out


def load_pairs(path) -> np.ndarray:
    """Read a two-column (state1, state2) CSV."""
    header, data = _read_numeric_table(path)
    if len(header) != 2:
        raise ParseError(f"{path}: expected 2 columns (state1, state2), got {len(header)}", row=0)
    return data


def table_for(obj) -> tuple[tuple[str, ...], list[tuple]]:
    """Column names and row tuples for any output artifact."""
    if isinstance(obj, ProfileTable):
        return ProfileTable.COLUMNS, [(r.setup, r.variant, r.designated, r.tau, r.mean, r.std) for r in obj]
    if isinstance(obj, TimingTable):
        return TimingTable.COLUMNS, [(r.algorithm, r.channels, r.length, r.mean_seconds) for r in obj]
    if isinstance(obj, MultiscaleProfile):
        return ("tau", "entropy"), [(tau, obj.values[tau]) for tau in obj.taus]
    if isinstance(obj, EffectSizeReport):
        return ("tau", "baseline_g", "mean_diff", "ci_lo", "ci_hi"), [
            (e.tau, e.baseline_g, e.mean_diff, e.ci_lo, e.ci_hi) for e in obj
        ]
    if isinstance(obj, PairedDiffSummary):
        return ("mean_abs_diff", "improved_count", "positive_count"), [
            (obj.mean_abs_diff, obj.improved_count, obj.positive_count)
        ]
    if isinstance(obj, tuple) and len(obj) == 2:
        columns, rows = obj
        return tuple(columns), [tuple(r) for r in rows]
    raise TypeError(f"don't know how to write {type(obj).__name__}")


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return "" if value is None else str(value)


def _text(value) -> str:
    value = _cell(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_outputs(obj, fmt: str = "csv") -> str:
    columns, rows = table_for(obj)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_text(v) for v in row])
        return buf.getvalue()
    if fmt == "json":
        doc = {"columns": list(columns), "rows": [dict(zip(columns, map(_cell, row))) for row in rows]}
        return json.dumps(doc, indent=2) + "\n"
    raise ValidationError(f"unknown output format {fmt!r}; use csv or json")


def write_outputs(obj, path, fmt: str | None = None) -> None:
    """Write an artifact as CSV or JSON (format defaults to the file extension)."""
    if fmt is None:
        fmt = "json" if str(path).lower().endswith(".json") else "csv"
    text = format_outputs(obj, fmt)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputOutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _parse_cell(text: str):
    for convert in (int, float):
        try:
            return convert(text)
        except ValueError:
            pass
    return text


def read_outputs(path, fmt: str | None = None) -> list[dict[str, Any]]:
    """Read back a file produced by :func:`write_outputs` as a list of row dicts."""
    if fmt is None:
        fmt = "json" if str(path).lower().endswith(".json") else "csv"
    with _open(path) as fh:
        if fmt == "json":
            return json.load(fh)["rows"]
        return [{k: _parse_cell(v) for k, v in row.items()} for row in csv.DictReader(fh)]


@dataclass
class RunConfig:
    """Every tunable of a CLI run, as a JSON-serializable document."""

    m: int = 2
    c: int = 5
    d: int = 1
    tau_max: int = 20
    variant: str = "mvmde"
    designated: list = field(default_factory=list)
    threshold: int = 1
    weight: float = 0.5
    seed: int = 0
    realizations: int = 40
    length: int = 15_000
    setups: list = field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    variants: list = field(default_factory=lambda: ["mvmde", "t", "st", "p"])
    bootstrap: int = 40
    reps: int = 20
    channels: list = field(default_factory=lambda: [2, 5, 8])
    lengths: list = field(default_factory=lambda: [1_000, 3_000, 10_000, 30_000, 100_000])
    out: str | None = None
    format: str | None = None

    def __post_init__(self):
        try:
            self._validate()
        except ValidationError:
            raise
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"invalid run configuration: {exc}") from exc

    def _validate(self):
        self.params()
        Variant.parse(self.variant)
        for v in self.variants:
            Variant.parse(v)
        if self.format not in (None, "csv", "json"):
            raise ValidationError(f"format must be csv or json, got {self.format!r}")
        if not 0.0 <= float(self.weight) <= 1.0:
            raise ValidationError(f"weight must lie in [0, 1], got {self.weight}")
        if int(self.threshold) < 1 or int(self.threshold) > self.m:
            raise ValidationError(f"threshold must lie in [1, m={self.m}], got {self.threshold}")
        for name in ("realizations", "bootstrap", "reps"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be >= 1")

    def params(self) -> EntropyParams:
        return EntropyParams(self.m, self.c, self.d, self.tau_max)

    def allocation(self, series: MultiChannelSeries, variant: str | None = None) -> StrataAllocation:
        """Build the allocation for ``series``, resolving designated channels by name."""
        variant = Variant.parse(variant or self.variant)
        if variant is Variant.MVMDE:
            return StrataAllocation.mvmde()
        if not self.designated:
            raise ValidationError(f"{variant.label} needs --designated channel name(s)")
        core = frozenset(series.index_of(str(name)) for name in self.designated)
        return StrataAllocation(variant, core, t=self.threshold, w=self.weight)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ValidationError(f"unknown config keys: {unknown}")
        return cls(**doc)


def load_config(path) -> RunConfig:
    with _open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc})", row=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: config must be a JSON object")
    return RunConfig.from_dict(doc)
