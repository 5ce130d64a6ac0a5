"""
Array-based CART regression/classification trees shared by the forests and boosting.

Split search sorts each candidate column once per node and scans all cut points with
cumulative sums, so a node costs O(n log n) per candidate feature. Trees are stored as
flat arrays (feature, threshold, left, right, value); ``feature == -1`` marks a leaf.
"""
from dataclasses import dataclass

import numpy as np

_leaf = -1


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    node_size: np.ndarray
    importance: np.ndarray

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    @property
    def depth(self):
        depth = np.zeros(self.n_nodes, dtype=int)
        for node in range(self.n_nodes):
            if self.feature[node] != _leaf:
                depth[self.left[node]] = depth[node] + 1
                depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def apply(self, x):
        """Leaf index reached by every row of x."""
        node = np.zeros(x.shape[0], dtype=int)
        active = np.flatnonzero(self.feature[node] != _leaf)
        while active.size:
            current = node[active]
            go_left = x[active, self.feature[current]] <= self.threshold[current]
            node[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[self.feature[node[active]] != _leaf]
        return node

    def predict(self, x):
        return self.value[self.apply(x)]


def _impurity(count, total, total_sq, criterion):
    """Node impurity times node size: SSE for "variance", n * Gini for "gini" (0/1 outcome)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        if criterion == "gini":
            out = 2.0 * total * (count - total) / count
        else:
            out = total_sq - total * total / count
    return np.where(count > 0, out, 0.0)


def _best_split(xcol, y, min_leaf, criterion):
    """Best cut of one column. Returns (gain, threshold) or (0.0, None)."""
    order = np.argsort(xcol, kind="stable")
    xs = xcol[order]
    ys = y[order]
    n = ys.shape[0]
    csum = np.cumsum(ys)
    csum_sq = np.cumsum(ys * ys)
    n_left = np.arange(1, n)
    sum_left = csum[:-1]
    sq_left = csum_sq[:-1]
    n_right = n - n_left
    sum_right = csum[-1] - sum_left
    sq_right = csum_sq[-1] - sq_left
    valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not np.any(valid):
        return 0.0, None
    parent = _impurity(np.array([n]), csum[-1:], csum_sq[-1:], criterion)[0]
    children = _impurity(n_left, sum_left, sq_left, criterion) + _impurity(n_right, sum_right, sq_right, criterion)
    gain = np.where(valid, parent - children, -np.inf)
    cut = int(np.argmax(gain))
    return float(gain[cut]), 0.5 * (xs[cut] + xs[cut + 1])


def grow_tree(
    x,
    y,
    rng,
    criterion="variance",
    min_split=2,
    min_leaf=1,
    max_depth=None,
    mtry=None,
    gradient=None,
    hessian=None,
):
    """
    Grow one tree greedily.

    Args:
        x (numpy.ndarray): covariates, n x p
        y (numpy.ndarray): split target (outcome, or negative gradient for boosting)
        rng (numpy.random.Generator): draws the mtry candidate columns per node
        criterion (str): "variance" or "gini" (0/1 targets)
        min_split (int): nodes smaller than this become leaves
        min_leaf (int): minimum observations in each child
        max_depth (int, optional): maximum depth, unlimited by default
        mtry (int, optional): candidate columns per split, all columns by default
        gradient, hessian (numpy.ndarray, optional): when given, leaf value is
            sum(gradient) / sum(hessian) (one Newton step) instead of mean(y)

    Returns:
        Tree: the fitted tree with per-feature impurity decrease in ``importance``
    """
    n, p = x.shape
    mtry = p if mtry is None else max(1, min(int(mtry), p))
    feature, threshold, left, right, value, node_size = [], [], [], [], [], []
    importance = np.zeros(p)

    def new_node(rows):
        feature.append(_leaf)
        threshold.append(0.0)
        left.append(_leaf)
        right.append(_leaf)
        if hessian is not None:
            denom = float(np.sum(hessian[rows]))
            value.append(float(np.sum(gradient[rows])) / denom if denom > 1e-12 else 0.0)
        else:
            value.append(float(np.mean(y[rows])))
        node_size.append(rows.shape[0])
        return len(feature) - 1

    stack = [(new_node(np.arange(n)), np.arange(n), 0)]
    while stack:
        node, rows, depth = stack.pop()
        ys = y[rows]
        if rows.shape[0] < min_split or rows.shape[0] < 2 * min_leaf:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        if np.all(ys == ys[0]):
            continue
        candidates = rng.choice(p, size=mtry, replace=False) if mtry < p else np.arange(p)
        best_gain, best_feature, best_threshold = 0.0, None, None
        for j in candidates:
            gain, cut = _best_split(x[rows, j], ys, min_leaf, criterion)
            if cut is not None and gain > best_gain:
                best_gain, best_feature, best_threshold = gain, int(j), cut
        if best_feature is None:
            continue
        go_left = x[rows, best_feature] <= best_threshold
        left_rows, right_rows = rows[go_left], rows[~go_left]
        feature[node] = best_feature
        threshold[node] = best_threshold
        importance[best_feature] += best_gain
        left[node] = new_node(left_rows)
        right[node] = new_node(right_rows)
        stack.append((right[node], right_rows, depth + 1))
        stack.append((left[node], left_rows, depth + 1))

    return Tree(
        feature=np.asarray(feature, dtype=int),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=int),
        right=np.asarray(right, dtype=int),
        value=np.asarray(value, dtype=float),
        node_size=np.asarray(node_size, dtype=int),
        importance=importance,
    )
