"""Label-relevance learners over discretized candidate features.

All three learners see nominal rows (one small integer per feature) and output
P(class=1 | row). Training collapses identical rows into weighted counts, which
keeps tree growth cheap even for large training sets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from knnesa.errors import DegenerateTrainingSet, FormatError, KnnEsaError
from knnesa.knn.discretize import (
    N_FEATURES,
    _unpack,
    binary_entropy,
    cardinalities,
    discretize_apply,
    discretize_fit,
)
from knnesa.parallel import ordered_map

MAGIC = "knnesa/ranker-model"
FORMAT_VERSION = 1

ALGORITHMS = {
    "nb": "NaiveBayes",
    "dt": "DecisionTree",
    "rf": "RandomForest",
    "naivebayes": "NaiveBayes",
    "decisiontree": "DecisionTree",
    "randomforest": "RandomForest",
}

DEFAULT_TREES = 100
MIN_SPLIT_WEIGHT = 2.0


def canonical_algorithm(name: str) -> str:
    try:
        return ALGORITHMS[name.lower()]
    except (KeyError, AttributeError):
        raise KnnEsaError(f"unknown algorithm {name!r}; choose nb, dt or rf") from None


# -- naive Bayes ---------------------------------------------------------------


def _fit_nb(rows: np.ndarray, y: np.ndarray, card: Sequence[int]) -> dict:
    counts = []
    for j, c in enumerate(card):
        table = [np.bincount(rows[y == cls, j], minlength=c).tolist() for cls in (0, 1)]
        counts.append(table)
    return {"class_counts": [int((y == 0).sum()), int((y == 1).sum())], "counts": counts}


def _nb_joint(params: dict, card: Sequence[int], row: Sequence[int]) -> tuple[float, float]:
    n0, n1 = params["class_counts"]
    n = n0 + n1
    joint = []
    for cls, nc in ((0, n0), (1, n1)):
        p = (nc + 1) / (n + 2)
        for j, v in enumerate(row):
            p *= (params["counts"][j][cls][v] + 1) / (nc + card[j])
        joint.append(p)
    return joint[0], joint[1]


def nb_posteriors(params: dict, card: Sequence[int], row: Sequence[int]) -> tuple[float, float]:
    j0, j1 = _nb_joint(params, card, row)
    z = j0 + j1
    return j0 / z, j1 / z


# -- decision trees ------------------------------------------------------------


def _gain(col: np.ndarray, wpos: np.ndarray, wneg: np.ndarray, card: int) -> float:
    pos_v = np.bincount(col, weights=wpos, minlength=card)
    neg_v = np.bincount(col, weights=wneg, minlength=card)
    tot_v = pos_v + neg_v
    total = tot_v.sum()
    parent = binary_entropy(pos_v.sum(), total)[0]
    child = float((tot_v * binary_entropy(pos_v, tot_v)).sum() / total)
    return float(parent - child)


def _grow(X, wpos, wneg, card, idx, rng, n_try):
    pos, neg = float(wpos[idx].sum()), float(wneg[idx].sum())
    node = {"pos": pos, "neg": neg}
    if pos == 0 or neg == 0 or pos + neg < MIN_SPLIT_WEIGHT:
        return node
    order = list(range(X.shape[1])) if rng is None else rng.permutation(X.shape[1]).tolist()
    best_j, best_gain = None, 1e-12
    # Past the first n_try features, keep looking only until some split gains.
    for tried, j in enumerate(order):
        if tried >= n_try and best_j is not None:
            break
        g = _gain(X[idx, j], wpos[idx], wneg[idx], card[j])
        if g > best_gain or (best_j is not None and g == best_gain and j < best_j):
            best_j, best_gain = j, g
    if best_j is None:
        return node
    col = X[idx, best_j]
    children = {}
    for v in np.unique(col):
        sub = idx[col == v]
        if wpos[sub].sum() + wneg[sub].sum() > 0:
            children[int(v)] = _grow(X, wpos, wneg, card, sub, rng, n_try)
    node["feature"] = int(best_j)
    node["children"] = children
    return node


def tree_probability(node: dict, row: Sequence[int]) -> float:
    while "feature" in node:
        child = node["children"].get(row[node["feature"]])
        if child is None:
            break
        node = child
    return (node["pos"] + 1.0) / (node["pos"] + node["neg"] + 2.0)


def _compress(rows: np.ndarray, y: np.ndarray, weights: np.ndarray):
    uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    wpos = np.bincount(inverse, weights=weights * (y == 1), minlength=len(uniq))
    wneg = np.bincount(inverse, weights=weights * (y == 0), minlength=len(uniq))
    keep = (wpos + wneg) > 0
    return uniq[keep], wpos[keep], wneg[keep]


def grow_tree(rows, y, card, weights=None, rng=None, n_try=None) -> dict:
    """Information-gain tree with multiway splits on nominal features."""
    weights = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=np.float64)
    X, wpos, wneg = _compress(rows, y, weights)
    n_try = X.shape[1] if n_try is None else n_try
    return _grow(X, wpos, wneg, card, np.arange(len(X)), rng, n_try)


# -- model ----------------------------------------------------------------------


@dataclass
class RankerModel:
    algorithm: str
    seed: int
    cuts: dict[str, list[float]]
    params: dict
    meta: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def card(self) -> tuple[int, ...]:
        return cardinalities(self.cuts)

    def _check_row(self, row) -> tuple[int, ...]:
        if len(row) != N_FEATURES:
            raise KnnEsaError(f"expected {N_FEATURES} feature values, got {len(row)}")
        out = []
        for j, (v, c) in enumerate(zip(row, self.card)):
            if isinstance(v, (bool, np.bool_)) or not float(v).is_integer() or not 0 <= v < c:
                raise KnnEsaError(
                    f"feature {j + 1} value {v!r} is not a discretized bin index (0..{c - 1})"
                )
            out.append(int(v))
        return tuple(out)

    def posteriors(self, row: Sequence[int]) -> tuple[float, float]:
        """(P(class=0), P(class=1)) for one nominal row."""
        row = self._check_row(row)
        hit = self._cache.get(row)
        if hit is not None:
            return hit
        if self.algorithm == "NaiveBayes":
            out = nb_posteriors(self.params, self.card, row)
        else:
            trees = self.params["trees"]
            p1 = sum(tree_probability(t, row) for t in trees) / len(trees)
            out = (1.0 - p1, p1)
        self._cache[row] = out
        return out

    def predict_proba(self, row: Sequence[int]) -> float:
        return self.posteriors(row)[1]

    def score_features(self, features: Sequence) -> float:
        return self.predict_proba(discretize_apply(self.cuts, features))

    def to_json(self) -> dict:
        return {
            "magic": MAGIC,
            "version": FORMAT_VERSION,
            "algorithm": self.algorithm,
            "seed": self.seed,
            "cuts": self.cuts,
            "params": _jsonable(self.params),
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RankerModel":
        if not isinstance(data, dict) or data.get("magic") != MAGIC:
            raise FormatError("not a ranker model file")
        if data.get("version") != FORMAT_VERSION:
            raise FormatError(f"model format version {data.get('version')!r} is not supported")
        params = data["params"]
        if "trees" in params:
            params = {**params, "trees": [_restore_tree(t) for t in params["trees"]]}
        return cls(
            canonical_algorithm(data["algorithm"]),
            int(data["seed"]),
            {k: [float(x) for x in v] for k, v in data["cuts"].items()},
            params,
            data.get("meta", {}),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "RankerModel":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: invalid model file ({exc.msg})") from exc
        return cls.from_json(data)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _restore_tree(node: dict) -> dict:
    out = {"pos": float(node["pos"]), "neg": float(node["neg"])}
    if "feature" in node:
        out["feature"] = int(node["feature"])
        out["children"] = {int(v): _restore_tree(c) for v, c in node["children"].items()}
    return out


def train(
    instances,
    algorithm: str = "rf",
    seed: int = 0,
    n_trees: int = DEFAULT_TREES,
    max_features: int | None = None,
    bootstrap: bool = True,
    threads: int = 1,
) -> RankerModel:
    algorithm = canonical_algorithm(algorithm)
    feats, classes = _unpack(instances)
    if not feats:
        raise DegenerateTrainingSet("degenerate training set: no instances")
    if len(set(classes)) < 2:
        raise DegenerateTrainingSet("degenerate training set: need both classes present")
    cuts = discretize_fit(list(zip(feats, classes)))
    card = cardinalities(cuts)
    rows = np.array([discretize_apply(cuts, f) for f in feats], dtype=np.int64)
    y = np.asarray(classes, dtype=np.int64)
    meta = {"n_instances": len(y), "n_positive": int(y.sum())}

    if algorithm == "NaiveBayes":
        return RankerModel(algorithm, seed, cuts, _fit_nb(rows, y, card), meta)
    if algorithm == "DecisionTree":
        tree = grow_tree(rows, y, card)
        return RankerModel(algorithm, seed, cuts, {"trees": [tree]}, meta)

    m = max_features or math.ceil(math.sqrt(N_FEATURES))
    n = len(y)
    seeds = np.random.SeedSequence(seed).spawn(n_trees)

    def one_tree(ss):
        rng = np.random.default_rng(ss)
        w = np.bincount(rng.integers(0, n, n), minlength=n) if bootstrap else np.ones(n)
        return grow_tree(rows, y, card, weights=w, rng=rng, n_try=m)

    trees = ordered_map(one_tree, seeds, threads)
    meta.update({"n_trees": n_trees, "max_features": m, "bootstrap": bootstrap})
    return RankerModel(algorithm, seed, cuts, {"trees": trees}, meta)
