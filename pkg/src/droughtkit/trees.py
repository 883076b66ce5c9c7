"""Persistence baseline, CART regression trees, random forest, and
squared-error gradient boosting with per-variable feature importance.

Multi-week horizons are handled with one independent model per horizon
step. All randomness flows from a master seed through mix_seed, so a
(seed, data) pair reproduces models bit for bit.
"""

import ast
from dataclasses import dataclass

import numpy as np

from ._kernels import best_split
from .errors import DimensionMismatch, EmptyTraining, UntrainedModel
from .windowing import FEATURE_NAMES


def mix_seed(master, unit):
    """Deterministic child seed: SplitMix64 of (master, unit)."""
    mask = (1 << 64) - 1
    z = (master ^ (unit * 0x9E3779B97F4A7C15)) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


@dataclass
class ForestConfig:
    n_trees: int = 300
    max_depth: int = 4
    bootstrap_fraction: float = 1.0
    feature_fraction: float = 1.0 / 3.0
    min_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 0:
            raise ValueError(f"invalid forest config {self}")


@dataclass
class BoostConfig:
    n_estimators: int = 100
    max_depth: int = 3
    learning_rate: float = 0.15
    min_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.learning_rate <= 1 or self.n_estimators < 1:
            raise ValueError(f"invalid boosting config {self}")


@dataclass
class RegressionTree:
    """Flat array CART: node i is a leaf iff feature[i] < 0."""
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray

    def predict(self, X):
        out = np.empty(len(X))
        stack = [(0, np.arange(len(X)))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            f = self.feature[node]
            if f < 0:
                out[idx] = self.value[node]
                continue
            go_left = X[idx, f] <= self.threshold[node]
            stack.append((self.left[node], idx[go_left]))
            stack.append((self.right[node], idx[~go_left]))
        return out

    @property
    def n_nodes(self):
        return len(self.feature)


def presort(X):
    """Per-feature argsort table shared by every node scan over X."""
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable"), dtype=np.int32)


class _TreeBuilder:
    def __init__(self, X, y, sort_idx, max_depth, min_leaf,
                 feature_fraction=1.0, rng=None):
        self.X = X
        self.y = y
        self.sort_idx = sort_idx
        self.max_depth = max_depth
        self.min_leaf = float(min_leaf)
        self.feature_fraction = feature_fraction
        self.rng = rng
        self.n_features = X.shape[1]
        self.nodes = {k: [] for k in
                      ("feature", "threshold", "left", "right", "value", "gain")}

    def _pick_features(self):
        if self.feature_fraction >= 1.0 or self.rng is None:
            return np.arange(self.n_features, dtype=np.int64)
        k = max(1, int(round(self.feature_fraction * self.n_features)))
        chosen = self.rng.choice(self.n_features, size=k, replace=False)
        return np.sort(chosen).astype(np.int64)

    def _add_node(self, feature=-1, threshold=np.nan, value=0.0, gain=0.0):
        i = len(self.nodes["feature"])
        self.nodes["feature"].append(feature)
        self.nodes["threshold"].append(threshold)
        self.nodes["left"].append(-1)
        self.nodes["right"].append(-1)
        self.nodes["value"].append(value)
        self.nodes["gain"].append(gain)
        return i

    def build(self, w, depth=0):
        total = w.sum()
        mean = float(np.dot(w, self.y) / total)
        if depth >= self.max_depth:
            return self._add_node(value=mean)
        feats = self._pick_features()
        f, thr, gain = best_split(self.X, self.y, w, self.sort_idx,
                                  feats, self.min_leaf)
        if f < 0 or gain <= 0:
            return self._add_node(value=mean)
        node = self._add_node(feature=f, threshold=thr, value=mean, gain=gain)
        go_left = self.X[:, f] <= thr
        wl = np.where(go_left, w, 0.0)
        wr = np.where(go_left, 0.0, w)
        self.nodes["left"][node] = self.build(wl, depth + 1)
        self.nodes["right"][node] = self.build(wr, depth + 1)
        return node

    def finish(self):
        n = self.nodes
        return RegressionTree(
            feature=np.asarray(n["feature"], dtype=np.int64),
            threshold=np.asarray(n["threshold"]),
            left=np.asarray(n["left"], dtype=np.int64),
            right=np.asarray(n["right"], dtype=np.int64),
            value=np.asarray(n["value"]),
            gain=np.asarray(n["gain"]),
        )


def fit_tree(X, y, max_depth, min_leaf=1, sample_weight=None,
             feature_fraction=1.0, rng=None, sort_idx=None):
    """Fit one CART by greedy variance reduction.

    Ties between equally good splits break toward the lowest feature
    index, then the lowest threshold. Leaves predict the (weighted)
    target mean.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if len(X) == 0 or len(y) == 0:
        raise EmptyTraining("cannot fit a tree on no samples")
    if sort_idx is None:
        sort_idx = presort(X)
    if sample_weight is None:
        sample_weight = np.ones(len(X))
    builder = _TreeBuilder(X, y, sort_idx, max_depth, min_leaf,
                           feature_fraction, rng)
    builder.build(np.ascontiguousarray(sample_weight, dtype=np.float64))
    return builder.finish()


def persistence_forecast(sample, n=None):
    """Skill-free baseline: mean raw window score repeated n times."""
    if sample.window_scores is None:
        raise ValueError("sample carries no raw window scores")
    if n is None:
        n = len(sample.labels)
    return np.full(n, float(np.mean(sample.window_scores)))


class PersistenceModel:
    """Uniform-contract wrapper around persistence_forecast."""

    kind = "persistence"

    def __init__(self, horizon):
        self.horizon = horizon

    def predict_samples(self, samples):
        return np.stack([persistence_forecast(s, self.horizon) for s in samples])


class RandomForestModel:
    """One independent forest of bagged CARTs per horizon step."""

    kind = "random_forest"

    def __init__(self, config=None):
        self.config = config or ForestConfig()
        self.forests = None  # [step][tree] -> RegressionTree
        self.n_features_in = None

    def fit(self, X, Y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64).T).T
        if len(X) == 0:
            raise EmptyTraining("empty training set")
        cfg = self.config
        n = len(X)
        sort_idx = presort(X)
        n_boot = max(1, int(round(cfg.bootstrap_fraction * n)))
        self.forests = []
        for k in range(Y.shape[1]):
            trees = []
            for t in range(cfg.n_trees):
                rng = np.random.default_rng(
                    mix_seed(cfg.seed, k * cfg.n_trees + t))
                counts = np.bincount(rng.integers(0, n, size=n_boot),
                                     minlength=n).astype(np.float64)
                trees.append(fit_tree(
                    X, Y[:, k], cfg.max_depth, cfg.min_leaf,
                    sample_weight=counts,
                    feature_fraction=cfg.feature_fraction,
                    rng=rng, sort_idx=sort_idx))
            self.forests.append(trees)
        self.n_features_in = X.shape[1]
        return self

    def predict(self, X):
        if self.forests is None:
            raise UntrainedModel("forest not fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in:
            raise DimensionMismatch(
                f"expected {self.n_features_in} features, got {X.shape[1]}")
        cols = [np.mean([tree.predict(X) for tree in trees], axis=0)
                for trees in self.forests]
        return np.stack(cols, axis=1)


class GradientBoostModel:
    """Stagewise squared-error boosting, one chain per horizon step."""

    kind = "gradient_boost"

    def __init__(self, config=None):
        self.config = config or BoostConfig()
        self.base = None         # (n_steps,) initial constants
        self.chains = None       # [step][tree]
        self.train_mse = None    # [step][tree+1] training MSE after each stage
        self.n_features_in = None

    def fit(self, X, Y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64).T).T
        if len(X) == 0:
            raise EmptyTraining("empty training set")
        cfg = self.config
        sort_idx = presort(X)
        self.base = Y.mean(axis=0)
        self.chains = []
        self.train_mse = []
        for k in range(Y.shape[1]):
            y = Y[:, k]
            pred = np.full(len(y), self.base[k])
            chain = []
            mse = [float(np.mean((y - pred) ** 2))]
            for t in range(cfg.n_estimators):
                tree = fit_tree(X, y - pred, cfg.max_depth, cfg.min_leaf,
                                sort_idx=sort_idx)
                pred = pred + cfg.learning_rate * tree.predict(X)
                chain.append(tree)
                mse.append(float(np.mean((y - pred) ** 2)))
            self.chains.append(chain)
            self.train_mse.append(mse)
        self.n_features_in = X.shape[1]
        return self

    def predict(self, X):
        if self.chains is None:
            raise UntrainedModel("boosting model not fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in:
            raise DimensionMismatch(
                f"expected {self.n_features_in} features, got {X.shape[1]}")
        cols = []
        for k, chain in enumerate(self.chains):
            pred = np.full(len(X), self.base[k])
            for tree in chain:
                pred = pred + self.config.learning_rate * tree.predict(X)
            cols.append(pred)
        return np.stack(cols, axis=1)


def _iter_trees(model):
    if isinstance(model, RandomForestModel):
        if model.forests is None:
            raise UntrainedModel("model not fitted")
        groups = model.forests
    elif isinstance(model, GradientBoostModel):
        if model.chains is None:
            raise UntrainedModel("model not fitted")
        groups = model.chains
    else:
        raise TypeError(f"no trees in {type(model).__name__}")
    for group in groups:
        yield from group


def feature_importance(model, feature_names=FEATURE_NAMES):
    """Gain-based importance aggregated onto the original variables.

    Flat feature j of the windowed layout is lag position j // F of
    variable j % F; gains from all lags and all horizon-step models
    collapse onto the variable. Weights are normalized to sum to 1.
    """
    n_vars = len(feature_names)
    weights = np.zeros(n_vars)
    for tree in _iter_trees(model):
        internal = tree.feature >= 0
        np.add.at(weights, tree.feature[internal] % n_vars, tree.gain[internal])
    total = weights.sum()
    if total > 0:
        weights = weights / total
    order = np.argsort(-weights, kind="stable")
    return {feature_names[i]: float(weights[i]) for i in order}


def boost_feature_importance(model):
    return feature_importance(model)


# --- text serialization -------------------------------------------------

FORMAT_VERSION = "droughtkit-model v1"


def _write_tree(fh, tree):
    fh.write(f"tree nodes={tree.n_nodes}\n")
    for i in range(tree.n_nodes):
        fh.write(f"{i} {tree.feature[i]} {float(tree.threshold[i])!r} "
                 f"{tree.left[i]} {tree.right[i]} {float(tree.value[i])!r} "
                 f"{float(tree.gain[i])!r}\n")


def _read_tree(lines):
    head = next(lines)
    n = int(head.split("=", 1)[1])
    cols = {k: [] for k in ("feature", "threshold", "left", "right", "value", "gain")}
    for _ in range(n):
        _, f, thr, l, r, v, g = next(lines).split()
        cols["feature"].append(int(f))
        cols["threshold"].append(float(thr))
        cols["left"].append(int(l))
        cols["right"].append(int(r))
        cols["value"].append(float(v))
        cols["gain"].append(float(g))
    return RegressionTree(
        feature=np.asarray(cols["feature"], dtype=np.int64),
        threshold=np.asarray(cols["threshold"]),
        left=np.asarray(cols["left"], dtype=np.int64),
        right=np.asarray(cols["right"], dtype=np.int64),
        value=np.asarray(cols["value"]),
        gain=np.asarray(cols["gain"]),
    )


def save_model(model, path):
    """Versioned text dump: config echo, seed, then per-step node lists."""
    with open(path, "w") as fh:
        fh.write(FORMAT_VERSION + "\n")
        fh.write(f"kind={model.kind}\n")
        if model.kind == "persistence":
            fh.write(f"horizon={model.horizon}\n")
            return
        cfg = model.config
        for key, val in vars(cfg).items():
            fh.write(f"{key}={val!r}\n")
        fh.write(f"n_features_in={model.n_features_in}\n")
        if model.kind == "gradient_boost":
            fh.write("base=" + " ".join(repr(float(b)) for b in model.base) + "\n")
            groups = model.chains
        else:
            groups = model.forests
        fh.write(f"steps={len(groups)}\n")
        for trees in groups:
            fh.write(f"step trees={len(trees)}\n")
            for tree in trees:
                _write_tree(fh, tree)


def load_model(path):
    with open(path) as fh:
        lines = iter(fh.read().splitlines())
    if next(lines) != FORMAT_VERSION:
        raise ValueError(f"{path} is not a {FORMAT_VERSION} file")
    kind = next(lines).split("=", 1)[1]
    if kind == "persistence":
        return PersistenceModel(int(next(lines).split("=", 1)[1]))

    header = {}
    base = None
    for line in lines:
        key, val = line.split("=", 1)
        if key == "steps":
            n_steps = int(val)
            break
        if key == "base":
            base = np.asarray([float(v) for v in val.split()])
        else:
            header[key] = val
    n_features_in = int(header.pop("n_features_in"))
    fields = {k: ast.literal_eval(v) for k, v in header.items()}

    groups = []
    for _ in range(n_steps):
        n_trees = int(next(lines).split("=", 1)[1])
        groups.append([_read_tree(lines) for _ in range(n_trees)])

    if kind == "gradient_boost":
        model = GradientBoostModel(BoostConfig(**fields))
        model.base = base
        model.chains = groups
    elif kind == "random_forest":
        model = RandomForestModel(ForestConfig(**fields))
        model.forests = groups
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    model.n_features_in = n_features_in
    return model
