"""Measurement-log ingestion and dataset preparation.

Takes a scanner-style CSV (as produced by :mod:`coba.simulate`, or exported
from real logs in the same schema), harmonizes column names, imputes missing
values, splits stratified 70/15/15, standardizes with training statistics,
and builds overlapping fixed-length windows labeled by their final sample.

Column-name harmonization is deliberately permissive: names are case-folded,
separators collapse to underscores, and a documented alias table maps common
export variants (``SS-RSRP``, ``SSB Index`` ...) onto the canonical schema.
Wide per-cell member slots (``Mbr 1 PCI``, ``Mbr 2 PCI`` ...) are flattened
to one row per populated slot before any cleaning.
"""

from __future__ import annotations

import csv
import json
import os
import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PipelineError",
    "CANONICAL_FEATURES",
    "normalize_column_name",
    "ColumnTable",
    "ingest_csv",
    "flatten_member_slots",
    "segment_boundaries",
    "impute",
    "stratified_split",
    "SplitSpec",
    "make_windows",
    "class_weights",
    "sampler_probabilities",
    "standardize",
    "FeatureTable",
    "DatasetBundle",
    "prepare_dataset",
]

CANONICAL_FEATURES = ["pci", "ssb_idx", "rssi", "ssb_rssi", "ss_rsrp", "ss_sinr", "ss_rsrq"]
AUX_COLUMNS = ["timestamp", "x", "y", "h", "class"]

# Alias table applied after basic normalization (lowercase, separators -> _).
_ALIASES = {
    "ssb_index": "ssb_idx",
    "ssbidx": "ssb_idx",
    "ss_rsrp_dbm": "ss_rsrp",
    "rsrp": "ss_rsrp",
    "sinr": "ss_sinr",
    "rsrq": "ss_rsrq",
    "label": "class",
    "time": "timestamp",
    "altitude": "h",
    "height": "h",
}
# Redundant scanner export prefixes stripped if what remains is recognizable.
_STRIP_PREFIXES = ("nr_", "5g_", "ss_ssb_")


class PipelineError(ValueError):
    """Malformed input data or an invalid pipeline request."""


def normalize_column_name(raw: str) -> str:
    name = raw.strip().casefold()
    name = re.sub(r"[\s\-/]+", "_", name)
    name = re.sub(r"_+", "_", name).strip("_")
    for prefix in _STRIP_PREFIXES:
        if name.startswith(prefix):
            candidate = name[len(prefix):]
            if candidate in CANONICAL_FEATURES or candidate in _ALIASES:
                name = candidate
                break
    return _ALIASES.get(name, name)


def _parse_cell(text: str) -> float:
    text = text.strip()
    if not text:
        return np.nan
    try:
        return float(text)
    except ValueError:
        return np.nan


@dataclass
class ColumnTable:
    """Parsed CSV: one float column per harmonized name, NaN where missing."""

    names: list
    columns: dict
    n_rows: int

    def rows(self):
        for i in range(self.n_rows):
            yield {name: self.columns[name][i] for name in self.names}


_MBR_RE = re.compile(r"^mbr_?(\d+)_(.+)$")


def flatten_member_slots(names, raw_rows):
    """Expand wide ``mbr_<k>_<feature>`` columns into long format.

    Emits one row per populated member slot, carrying the non-slot columns
    along unchanged. Slot order is ascending k within each source row.
    """
    slot_cols = {}
    shared = []
    for name in names:
        m = _MBR_RE.match(name)
        if m:
            slot_cols.setdefault(int(m.group(1)), {})[m.group(2)] = name
        else:
            shared.append(name)
    if not slot_cols:
        return names, raw_rows

    feature_names = sorted({f for cols in slot_cols.values() for f in cols})
    out_names = shared + [f for f in feature_names if f not in shared]
    out_rows = []
    for row in raw_rows:
        for k in sorted(slot_cols):
            cols = slot_cols[k]
            values = {f: row.get(col, np.nan) for f, col in cols.items()}
            if all(np.isnan(v) for v in values.values()):
                continue
            new_row = {name: row.get(name, np.nan) for name in shared}
            for f in feature_names:
                new_row[f] = values.get(f, np.nan)
            out_rows.append(new_row)
    return out_names, out_rows


def ingest_csv(path, required=("class",)) -> ColumnTable:
    """Parse a measurement CSV with harmonized headers.

    Unparseable numeric cells become NaN (missing), never an error; a missing
    mandatory column raises naming it. Unknown columns are kept so callers can
    ignore them downstream.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PipelineError(f"{path}: empty file, header required") from None
        names = [normalize_column_name(c) for c in header]
        if len(set(names)) != len(names):
            raise PipelineError(f"{path}: duplicate column names after harmonization")
        raw_rows = []
        for row in reader:
            if not row:
                continue
            raw_rows.append({n: _parse_cell(c) for n, c in zip(names, row)})

    names, raw_rows = flatten_member_slots(names, raw_rows)

    for col in required:
        if col not in names:
            raise PipelineError(f"{path}: mandatory column '{col}' not found")

    n = len(raw_rows)
    columns = {
        name: np.array([r.get(name, np.nan) for r in raw_rows], dtype=float) for name in names
    }
    return ColumnTable(names=names, columns=columns, n_rows=n)


def segment_boundaries(timestamps) -> np.ndarray:
    """Start indices of contiguous flight segments.

    A new segment opens where the timestamp gap exceeds 5x the median
    sampling interval. Without timestamps the whole table is one segment.
    """
    if timestamps is None:
        return np.array([0])
    t = np.asarray(timestamps, dtype=float)
    if len(t) < 3:
        return np.array([0])
    dt = np.diff(t)
    finite = dt[np.isfinite(dt)]
    if len(finite) == 0:
        return np.array([0])
    threshold = 5.0 * np.median(finite)
    breaks = np.where(~np.isfinite(dt) | (dt > threshold))[0] + 1
    return np.concatenate([[0], breaks])


def _interpolate_segment(values: np.ndarray) -> np.ndarray:
    """Fill interior NaN runs of one segment by linear interpolation over row
    index; leading/trailing gaps stay NaN."""
    out = values.copy()
    ok = np.isfinite(values)
    if ok.sum() < 2:
        return out
    idx = np.arange(len(values))
    first, last = idx[ok][0], idx[ok][-1]
    interior = ~ok & (idx > first) & (idx < last)
    if interior.any():
        out[interior] = np.interp(idx[interior], idx[ok], values[ok])
    return out


def impute(features: np.ndarray, train_indices, timestamps=None, feature_names=None):
    """Two-stage imputation: per-segment linear interpolation, then median.

    Medians come from the raw (pre-interpolation) non-missing values of
    training rows only. Non-missing entries are returned bit-identical.
    """
    x = np.array(features, dtype=float)
    n, f = x.shape
    names = feature_names if feature_names is not None else [f"f{j}" for j in range(f)]
    train_indices = np.asarray(train_indices)

    medians = np.empty(f)
    for j in range(f):
        train_vals = x[train_indices, j]
        train_vals = train_vals[np.isfinite(train_vals)]
        if len(train_vals) == 0:
            raise PipelineError(f"column '{names[j]}' has no observed training values")
        medians[j] = np.median(train_vals)

    starts = segment_boundaries(timestamps)
    bounds = list(starts) + [n]
    for j in range(f):
        for s, e in zip(bounds[:-1], bounds[1:]):
            x[s:e, j] = _interpolate_segment(x[s:e, j])
        still = ~np.isfinite(x[:, j])
        x[still, j] = medians[j]
    return x, medians


@dataclass
class SplitSpec:
    train_frac: float = 0.70
    val_frac: float = 0.15
    test_frac: float = 0.15
    seed: int = 0

    def __post_init__(self):
        total = self.train_frac + self.val_frac + self.test_frac
        if abs(total - 1.0) > 1e-9:
            raise PipelineError("split fractions must sum to 1")


def stratified_split(labels, spec: SplitSpec):
    """Disjoint covering (train, val, test) index arrays preserving per-class
    proportions within one sample. Deterministic per seed; index arrays come
    back sorted so windows keep time order inside each split."""
    y = np.asarray(labels).astype(int)
    classes = np.unique(y)
    if len(classes) < 2:
        raise PipelineError("insufficient samples to stratify: need both classes")
    rng = np.random.default_rng(spec.seed)
    train, val, test = [], [], []
    for c in classes:
        idx = np.where(y == c)[0]
        if len(idx) < 3:
            raise PipelineError(f"insufficient samples to stratify: class {c} has {len(idx)}")
        idx = rng.permutation(idx)
        n_c = len(idx)
        n_val = int(round(spec.val_frac * n_c))
        n_test = int(round(spec.test_frac * n_c))
        n_train = n_c - n_val - n_test
        train.append(idx[:n_train])
        val.append(idx[n_train:n_train + n_val])
        test.append(idx[n_train + n_val:])
    return (
        np.sort(np.concatenate(train)),
        np.sort(np.concatenate(val)),
        np.sort(np.concatenate(test)),
    )


def make_windows(features: np.ndarray, labels, window_len: int):
    """Overlapping stride-1 windows; window i covers rows i..i+L-1 and takes
    the label of its final row. Exactly N-L+1 windows."""
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels).astype(int)
    n = len(x)
    if n < window_len:
        raise PipelineError(f"split shorter than window: {n} rows < L={window_len}")
    m = n - window_len + 1
    idx = np.arange(m)[:, None] + np.arange(window_len)[None, :]
    return x[idx], y[window_len - 1:]


def class_weights(labels) -> np.ndarray:
    """Inverse-frequency weights w_c = N / (2 * N_c) for the binary classes."""
    y = np.asarray(labels).astype(int)
    n = len(y)
    counts = np.array([(y == 0).sum(), (y == 1).sum()])
    if (counts == 0).any():
        raise PipelineError("class weights need both classes present")
    return n / (2.0 * counts)


def sampler_probabilities(window_labels, weights) -> np.ndarray:
    """Per-window draw probability proportional to its class weight; the
    expected class draw ratio comes out 1:1."""
    y = np.asarray(window_labels).astype(int)
    if len(np.unique(y)) < 2:
        raise PipelineError("sampler needs both classes among training windows")
    w = np.asarray(weights, dtype=float)[y]
    return w / w.sum()


STD_FLOOR = 1e-8


def standardize(features: np.ndarray, mean, std) -> np.ndarray:
    """Z-score with provided (training) statistics; stds are floored so
    constant columns map to zero."""
    std = np.maximum(np.asarray(std, dtype=float), STD_FLOOR)
    return (np.asarray(features, dtype=float) - np.asarray(mean, dtype=float)) / std


@dataclass
class FeatureTable:
    """Numeric feature matrix plus labels and optional side columns."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: list
    timestamps: np.ndarray = None
    positions: np.ndarray = None  # (N, 3) x, y, h when available

    def __len__(self):
        return len(self.labels)


@dataclass
class DatasetBundle:
    """Prepared splits (already imputed and standardized) plus the statistics
    needed to reproduce or invert the preparation."""

    splits: dict                 # name -> FeatureTable
    feature_names: list
    mean: np.ndarray
    std: np.ndarray
    medians: np.ndarray
    standardized: bool

    def windows(self, split: str, window_len: int):
        table = self.splits[split]
        return make_windows(table.features, table.labels, window_len)

    def stats_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "mean": [float(v) for v in self.mean],
            "std": [float(v) for v in self.std],
            "median": [float(v) for v in self.medians],
            "standardized": self.standardized,
            "rows": {name: int(len(t)) for name, t in self.splits.items()},
            "class_counts": {
                name: [int((t.labels == 0).sum()), int((t.labels == 1).sum())]
                for name, t in self.splits.items()
            },
        }

    def save(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        for name, table in self.splits.items():
            path = os.path.join(out_dir, f"{name}.csv")
            has_pos = table.positions is not None
            has_t = table.timestamps is not None
            header = (
                (["timestamp"] if has_t else [])
                + (["x", "y", "h"] if has_pos else [])
                + list(self.feature_names)
                + ["class"]
            )
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(header)
                for i in range(len(table)):
                    row = []
                    if has_t:
                        row.append(repr(float(table.timestamps[i])))
                    if has_pos:
                        row.extend(repr(float(v)) for v in table.positions[i])
                    row.extend(repr(float(v)) for v in table.features[i])
                    row.append(int(table.labels[i]))
                    writer.writerow(row)
        with open(os.path.join(out_dir, "stats.json"), "w") as fh:
            json.dump(self.stats_dict(), fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, in_dir) -> "DatasetBundle":
        with open(os.path.join(in_dir, "stats.json")) as fh:
            stats = json.load(fh)
        names = stats["feature_names"]
        splits = {}
        for split in ("train", "val", "test"):
            table = ingest_csv(os.path.join(in_dir, f"{split}.csv"), required=tuple(names) + ("class",))
            features = np.column_stack([table.columns[n] for n in names])
            positions = None
            if all(k in table.columns for k in ("x", "y", "h")):
                positions = np.column_stack([table.columns[k] for k in ("x", "y", "h")])
            splits[split] = FeatureTable(
                features=features,
                labels=table.columns["class"].astype(int),
                feature_names=names,
                timestamps=table.columns.get("timestamp"),
                positions=positions,
            )
        return cls(
            splits=splits,
            feature_names=names,
            mean=np.array(stats["mean"]),
            std=np.array(stats["std"]),
            medians=np.array(stats["median"]),
            standardized=stats["standardized"],
        )


def prepare_dataset(
    table: ColumnTable,
    feature_names=None,
    split: SplitSpec = None,
    apply_standardize: bool = True,
    min_altitude: float = None,
) -> DatasetBundle:
    """Full preparation: select features, filter, split, impute, standardize.

    ``min_altitude`` drops rows below the given height (take-off/landing
    removal) when an ``h`` column exists.
    """
    split = split or SplitSpec()
    names = list(feature_names) if feature_names else list(CANONICAL_FEATURES)
    for col in names + ["class"]:
        if col not in table.columns:
            raise PipelineError(f"mandatory column '{col}' not found")

    keep = np.ones(table.n_rows, dtype=bool)
    if min_altitude is not None and "h" in table.columns:
        keep &= table.columns["h"] >= min_altitude

    labels_raw = table.columns["class"][keep]
    if not np.isfinite(labels_raw).all():
        raise PipelineError("class column contains missing values")
    labels = labels_raw.astype(int)
    if not np.isin(labels, (0, 1)).all():
        raise PipelineError("class column must be binary 0/1")

    features = np.column_stack([table.columns[n][keep] for n in names])
    timestamps = table.columns["timestamp"][keep] if "timestamp" in table.columns else None
    positions = None
    if all(k in table.columns for k in ("x", "y", "h")):
        positions = np.column_stack([table.columns[k][keep] for k in ("x", "y", "h")])

    train_idx, val_idx, test_idx = stratified_split(labels, split)
    features, medians = impute(features, train_idx, timestamps=timestamps, feature_names=names)

    mean = features[train_idx].mean(axis=0)
    std = features[train_idx].std(axis=0)
    if apply_standardize:
        features = standardize(features, mean, std)

    splits = {}
    for name, idx in (("train", train_idx), ("val", val_idx), ("test", test_idx)):
        splits[name] = FeatureTable(
            features=features[idx],
            labels=labels[idx],
            feature_names=names,
            timestamps=timestamps[idx] if timestamps is not None else None,
            positions=positions[idx] if positions is not None else None,
        )
    return DatasetBundle(
        splits=splits,
        feature_names=names,
        mean=mean,
        std=std,
        medians=medians,
        standardized=apply_standardize,
    )
