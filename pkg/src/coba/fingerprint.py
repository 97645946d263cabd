"""Voxel fingerprint benchmark: label 10 m cells from training positions,
classify queries by nearest labeled voxel center.

Purely geometric (positions in, labels out) and RNG-free: it gives the
learning models a deterministic spatial reference to beat.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .training import Metrics

__all__ = ["VoxelMap", "voxel_of", "build_map", "classify_point", "classify_points", "evaluate_fp"]


class FingerprintError(ValueError):
    pass


def voxel_of(point, origin, cell_size: float):
    """Integer cell index per axis: floor((p - origin) / cell_size).

    Points on a face boundary belong to the upper cell; negative indices are
    fine.
    """
    if cell_size <= 0:
        raise FingerprintError("cell_size must be positive")
    p = np.asarray(point, dtype=float)
    o = np.asarray(origin, dtype=float)
    return tuple(int(v) for v in np.floor((p - o) / cell_size))


@dataclass
class VoxelMap:
    """Labeled 3D grid. ``cells`` maps index triple -> (label, [n0, n1])."""

    cell_size: float
    origin: np.ndarray
    cells: dict = field(default_factory=dict)

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)

    def center(self, index) -> np.ndarray:
        return self.origin + (np.asarray(index, dtype=float) + 0.5) * self.cell_size

    def sorted_entries(self):
        """(indices (M,3), centers (M,3), labels (M,)) in index order, so
        argmin tie-breaks resolve to the lexicographically smallest index."""
        indices = sorted(self.cells)
        centers = np.array([self.center(i) for i in indices])
        labels = np.array([self.cells[i][0] for i in indices])
        return indices, centers, labels

    def to_json(self) -> str:
        return json.dumps(
            {
                "cell_size": self.cell_size,
                "origin": list(self.origin),
                "cells": [
                    {"index": list(idx), "label": int(lab), "counts": [int(c) for c in counts]}
                    for idx, (lab, counts) in sorted(self.cells.items())
                ],
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "VoxelMap":
        doc = json.loads(text)
        cells = {
            tuple(entry["index"]): (int(entry["label"]), list(entry["counts"]))
            for entry in doc["cells"]
        }
        return cls(cell_size=float(doc["cell_size"]), origin=doc["origin"], cells=cells)


def build_map(train_points, train_labels, cell_size: float = 10.0, origin=(0.0, 0.0, 0.0)) -> VoxelMap:
    """Majority-label each populated voxel; ties label restricted (1)."""
    pts = np.asarray(train_points, dtype=float)
    labs = np.asarray(train_labels).astype(int)
    if pts.size == 0:
        raise FingerprintError("cannot build a voxel map from no training points")
    counts = {}
    for p, y in zip(pts, labs):
        idx = voxel_of(p, origin, cell_size)
        c = counts.setdefault(idx, [0, 0])
        c[y] += 1
    cells = {}
    for idx, (n0, n1) in counts.items():
        label = 1 if n1 >= n0 else 0
        cells[idx] = (label, [n0, n1])
    return VoxelMap(cell_size=cell_size, origin=origin, cells=cells)


def classify_points(points, vmap: VoxelMap) -> np.ndarray:
    """Label of the nearest populated voxel center (3D Euclidean), for each
    query row; exact distance ties go to the smallest voxel index."""
    if not vmap.cells:
        raise FingerprintError("voxel map is empty")
    _, centers, labels = vmap.sorted_entries()
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(pts), dtype=int)
    for i, p in enumerate(pts):
        d2 = np.sum((centers - p) ** 2, axis=1)
        out[i] = labels[np.argmin(d2)]
    return out


def classify_point(point, vmap: VoxelMap) -> int:
    return int(classify_points(np.asarray(point, dtype=float)[None, :], vmap)[0])


def evaluate_fp(train_points, train_labels, test_points, test_labels,
                cell_size: float = 10.0, origin=(0.0, 0.0, 0.0)) -> Metrics:
    """Build the map from the training set, score nearest-voxel labels on the
    test set with the shared metric code."""
    if len(np.atleast_2d(test_points)) == 0:
        raise FingerprintError("empty test set")
    vmap = build_map(train_points, train_labels, cell_size=cell_size, origin=origin)
    preds = classify_points(test_points, vmap)
    return Metrics.from_predictions(np.asarray(test_labels).astype(int), preds)
