"""NumPy fallback for the best-split scan used by the tree models.

Semantics are identical to the compiled kernel: among all (feature,
threshold) candidates, pick the split with the largest reduction in
weighted sum of squared errors. Ties break toward the lowest feature
index, then the lowest threshold, which the ascending scan gives for
free with a strict ``>`` comparison.
"""

import numpy as np

BACKEND = "pure"


def best_split(X, y, w, sort_idx, feature_ids, min_leaf):
    """Find the best variance-reducing split over the given features.

    X: (N, P) float64 feature matrix, shared by every node.
    y: (N,) float64 targets.
    w: (N,) float64 per-sample weights; 0 means "not in this node",
       bootstrap multiplicities are >= 1.
    sort_idx: (N, P) int32, column f = argsort of X[:, f], computed once
       per training matrix and reused by every node of every tree.
    feature_ids: sorted int64 array of candidate feature columns.
    min_leaf: minimum weighted sample count on each side.

    Returns (feature, threshold, gain); feature == -1 when no valid
    split exists. Thresholds are midpoints between consecutive distinct
    values, and samples go left when x <= threshold.
    """
    best_feat = -1
    best_thr = np.nan
    best_gain = 0.0

    for f in feature_ids:
        order = sort_idx[:, f]
        wo = w[order]
        active = wo > 0
        if not active.any():
            continue
        o = order[active]
        wo = wo[active]
        xs = X[o, f]
        ys = y[o]

        cw = np.cumsum(wo)
        cs = np.cumsum(wo * ys)
        css = np.cumsum(wo * ys * ys)
        n_tot = cw[-1]
        s_tot = cs[-1]

        # split allowed only between distinct consecutive values
        cut = np.nonzero(xs[:-1] < xs[1:])[0]
        if cut.size == 0:
            continue
        nl = cw[cut]
        nr = n_tot - nl
        valid = (nl >= min_leaf) & (nr >= min_leaf)
        if not valid.any():
            continue
        cut = cut[valid]
        nl = nl[valid]
        nr = nr[valid]
        sl = cs[cut]
        sr = s_tot - sl
        gain = sl * sl / nl + sr * sr / nr - s_tot * s_tot / n_tot

        k = int(np.argmax(gain))
        if gain[k] > best_gain:
            best_gain = float(gain[k])
            best_feat = int(f)
            i = cut[k]
            best_thr = 0.5 * (xs[i] + xs[i + 1])

    return best_feat, best_thr, best_gain
