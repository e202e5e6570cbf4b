"""Supervised entropy discretization with the MDL stopping rule.

Numeric features (f1, f2, f5) are split recursively at the boundary that
minimizes class entropy; a split is kept only when its information gain pays
for the extra description length (Fayyad & Irani). Binary features pass
through unchanged.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from typing import Sequence

import numpy as np

from knnesa.errors import DegenerateTrainingSet, KnnEsaError

NUMERIC_FEATURES = {"f1": 0, "f2": 1, "f5": 4}
BINARY_FEATURES = {"f3": 2, "f4": 3, "f6": 5}
N_FEATURES = 6


def _xlog2x(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    m = x > 0
    out[m] = x[m] * np.log2(x[m])
    return out


def binary_entropy(pos, total) -> np.ndarray:
    """Binary class entropy in bits, elementwise."""
    pos = np.atleast_1d(np.asarray(pos, dtype=np.float64))
    total = np.atleast_1d(np.asarray(total, dtype=np.float64))
    p = np.divide(pos, total, out=np.zeros_like(pos), where=total > 0)
    return -(_xlog2x(p) + _xlog2x(1.0 - p))


def _n_classes(pos: float, total: float) -> int:
    return int(pos > 0) + int(total - pos > 0)


def mdl_cut_points(values: Sequence[float], classes: Sequence[int]) -> list[float]:
    values = np.asarray(values, dtype=np.float64)
    classes = np.asarray(classes, dtype=np.int64)
    order = np.argsort(values, kind="stable")
    cuts: list[float] = []
    _split(values[order], classes[order], cuts)
    return sorted(cuts)


def _split(v: np.ndarray, y: np.ndarray, cuts: list[float]) -> None:
    n = len(v)
    if n < 2:
        return
    boundaries = np.flatnonzero(v[1:] != v[:-1]) + 1  # left part is v[:i]
    if len(boundaries) == 0:
        return
    cum = np.cumsum(y)
    total_pos = float(cum[-1])
    left_pos = cum[boundaries - 1].astype(np.float64)
    left_n = boundaries.astype(np.float64)
    right_pos = total_pos - left_pos
    right_n = n - left_n
    h_l = binary_entropy(left_pos, left_n)
    h_r = binary_entropy(right_pos, right_n)
    weighted = (left_n * h_l + right_n * h_r) / n
    best = int(np.argmin(weighted))
    i = int(boundaries[best])
    h_all = float(binary_entropy(total_pos, n)[0])
    h_left, h_right = float(h_l[best]), float(h_r[best])
    gain = h_all - float(weighted[best])
    k = _n_classes(total_pos, n)
    k1 = _n_classes(left_pos[best], left_n[best])
    k2 = _n_classes(right_pos[best], right_n[best])
    delta = math.log2(3**k - 2) - (k * h_all - k1 * h_left - k2 * h_right)
    if gain <= (math.log2(n - 1) + delta) / n:
        return
    cuts.append(float((v[i - 1] + v[i]) / 2.0))
    _split(v[:i], y[:i], cuts)
    _split(v[i:], y[i:], cuts)


def discretize_fit(instances) -> dict[str, list[float]]:
    """Cut points for each numeric feature, learned from training instances.

    ``instances`` are :class:`TrainingInstance` objects or ``(features, cls)`` pairs.
    """
    rows, classes = _unpack(instances)
    if len(rows) < 2 or len(set(classes)) < 2:
        raise DegenerateTrainingSet("degenerate training set: need both classes present")
    X = np.asarray(rows, dtype=np.float64)
    return {name: mdl_cut_points(X[:, j], classes) for name, j in NUMERIC_FEATURES.items()}


def _bin(cuts: Sequence[float], value: float) -> int:
    return bisect_left(cuts, value)


def discretize_apply(cut_map: dict[str, list[float]], features: Sequence) -> tuple[int, ...]:
    if len(features) != N_FEATURES:
        raise KnnEsaError(f"expected {N_FEATURES} feature values, got {len(features)}")
    out = [0] * N_FEATURES
    for name, j in NUMERIC_FEATURES.items():
        out[j] = _bin(cut_map[name], float(features[j]))
    for name, j in BINARY_FEATURES.items():
        if features[j] not in (0, 1):
            raise KnnEsaError(f"binary feature {name} must be 0 or 1, got {features[j]!r}")
        out[j] = int(features[j])
    return tuple(out)


def cardinalities(cut_map: dict[str, list[float]]) -> tuple[int, ...]:
    card = [2] * N_FEATURES
    for name, j in NUMERIC_FEATURES.items():
        card[j] = len(cut_map[name]) + 1
    return tuple(card)


def _unpack(instances):
    rows, classes = [], []
    for inst in instances:
        if hasattr(inst, "features"):
            rows.append(inst.features)
            classes.append(int(inst.cls))
        else:
            feats, cls = inst
            rows.append(feats)
            classes.append(int(cls))
    return rows, classes
