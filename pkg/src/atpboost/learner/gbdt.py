"""Gradient-boosted regression trees for binary relevance.

Second-order boosting of the logistic loss with L2-regularised leaf
weights and exact greedy split search.  Examples are sparse count vectors;
an absent column is *missing*, and every split learns which branch the
missing examples take.

Split candidates for a column are the midpoints between consecutive
distinct values present at a node, plus the midpoint between the implicit
zero of absent entries and the smallest present value.  The latter lets a
split separate "feature present" from "feature absent" even for columns
that only ever hold a single count.

Trees are grown one level at a time.  Every node's split depends only on
its own examples, so this yields exactly the tree a depth-first grower
would build, but lets all nodes of a level share vectorised work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

FORMAT_HEADER = "atpboost-gbdt 1"


@dataclass(frozen=True)
class ModelParams:
    n_trees: int = 2000
    max_depth: int = 10
    eta: float = 0.2
    lam: float = 1.0
    min_child_weight: float = 1.0
    seed: int = 0
    base_score: float | None = None  # None: log(pos/neg)

    def __post_init__(self):
        if self.n_trees < 0:
            raise ValueError("n_trees must be >= 0")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if not 0 < self.eta <= 1:
            raise ValueError("eta must be in (0, 1]")
        if self.lam < 0 or self.min_child_weight < 0:
            raise ValueError("lam and min_child_weight must be >= 0")


def sigmoid(x):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


def logistic_grad_hess(pred, label):
    """Gradient and hessian of the log-loss with respect to the log-odds."""
    p = sigmoid(pred)
    g = p - label
    h = p * (1.0 - p)
    if np.ndim(g) == 0:
        return float(g), float(h)
    return g, h


def split_gain(GL, HL, GR, HR, lam):
    G, H = GL + GR, HL + HR
    return 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - G * G / (H + lam))


class Split(NamedTuple):
    column: int
    threshold: float
    default_left: bool
    gain: float


@dataclass
class Tree:
    feature: np.ndarray  # -1 marks a leaf
    threshold: np.ndarray
    default_left: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def __len__(self):
        return len(self.feature)

    def depth(self) -> int:
        def d(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(d(self.left[i]), d(self.right[i]))

        return d(0)

    def leaf_of(self, indices, values) -> int:
        """Leaf reached by one sparse example."""
        lookup = dict(zip(indices.tolist(), values.tolist()))
        i = 0
        while self.feature[i] >= 0:
            x = lookup.get(int(self.feature[i]))
            if x is None:
                go_left = bool(self.default_left[i])
            else:
                go_left = x < self.threshold[i]
            i = self.left[i] if go_left else self.right[i]
        return i

    def preorder(self):
        stack = [0]
        while stack:
            i = stack.pop()
            yield i
            if self.feature[i] >= 0:
                stack.append(self.right[i])
                stack.append(self.left[i])


@dataclass
class Model:
    trees: list = field(default_factory=list)
    base_score: float = 0.0
    eta: float = 0.2
    dim: int = 0

    def raw(self, v) -> float:
        """Log-odds for one sparse example."""
        if v.dim != self.dim:
            raise ValueError(f"dimension mismatch: model {self.dim}, vector {v.dim}")
        acc = self.base_score
        for tree in self.trees:
            acc += self.eta * tree.value[tree.leaf_of(v.indices, v.values)]
        return acc

    def predict(self, v) -> float:
        return float(sigmoid(self.raw(v)))

    def used_columns(self) -> np.ndarray:
        cols = [t.feature[t.feature >= 0] for t in self.trees]
        return np.unique(np.concatenate(cols)) if cols else np.zeros(0, dtype=np.int64)

    def compile(self) -> "CompiledForest":
        return CompiledForest(self)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps(self))


def predict(model: Model, v) -> float:
    return model.predict(v)


class CompiledForest:
    """All trees padded into arrays for batch prediction on dense blocks.

    Columns are renumbered to ``used_columns`` so callers only materialise
    the features the forest actually tests.
    """

    def __init__(self, model: Model):
        self.model = model
        self.columns = model.used_columns()
        remap = {c: i for i, c in enumerate(self.columns.tolist())}
        n = len(model.trees)
        width = max((len(t) for t in model.trees), default=1)
        self.feature = np.full((n, width), -1, dtype=np.int64)
        self.threshold = np.zeros((n, width))
        self.default_left = np.zeros((n, width), dtype=bool)
        self.left = np.zeros((n, width), dtype=np.int64)
        self.right = np.zeros((n, width), dtype=np.int64)
        self.value = np.zeros((n, width))
        self.max_depth = 0
        for k, t in enumerate(model.trees):
            m = len(t)
            self.feature[k, :m] = [remap[c] if c >= 0 else -1 for c in t.feature.tolist()]
            self.threshold[k, :m] = t.threshold
            self.default_left[k, :m] = t.default_left
            self.left[k, :m] = t.left
            self.right[k, :m] = t.right
            self.value[k, :m] = t.value
            self.max_depth = max(self.max_depth, t.depth())

    def raw(self, X: np.ndarray) -> np.ndarray:
        """Log-odds for rows of ``X`` (columns ordered as ``self.columns``)."""
        X = np.asarray(X, dtype=np.float64)
        rows = X.shape[0]
        acc = np.full(rows, self.model.base_score)
        n = len(self.model.trees)
        if n == 0 or rows == 0:
            return acc
        tree_ix = np.arange(n)[None, :]
        row_ix = np.arange(rows)[:, None]
        node = np.zeros((rows, n), dtype=np.int64)
        for _ in range(self.max_depth):
            feat = self.feature[tree_ix, node]
            inner = feat >= 0
            x = X[row_ix, np.where(inner, feat, 0)]
            present = x > 0
            go_left = np.where(present, x < self.threshold[tree_ix, node],
                               self.default_left[tree_ix, node])
            nxt = np.where(go_left, self.left[tree_ix, node], self.right[tree_ix, node])
            node = np.where(inner, nxt, node)
        leaf_values = self.value[tree_ix, node]
        eta = self.model.eta
        for k in range(n):
            acc += eta * leaf_values[:, k]
        return acc

    def predict(self, X) -> np.ndarray:
        return sigmoid(self.raw(X))


# -- split search --------------------------------------------------------------


def _find_splits(e_row, e_col, e_val, e_node, node_G, node_H, node_C, g, h, lam, mcw):
    """Best split per node.

    Entries must be ordered by (node, column, value).  Returns arrays
    ``found, column, threshold, default_left, gain`` indexed by node.
    """
    k = len(node_G)
    found = np.zeros(k, dtype=bool)
    col = np.zeros(k, dtype=np.int64)
    thr = np.zeros(k)
    dleft = np.zeros(k, dtype=bool)
    best = np.full(k, -np.inf)
    m = len(e_row)
    if m == 0:
        return found, col, thr, dleft, best

    eg, eh = g[e_row], h[e_row]
    seg_start = np.ones(m, dtype=bool)
    seg_start[1:] = (e_node[1:] != e_node[:-1]) | (e_col[1:] != e_col[:-1])
    change = seg_start.copy()
    change[1:] |= e_val[1:] != e_val[:-1]

    starts = np.flatnonzero(seg_start)
    seg_id = np.cumsum(seg_start) - 1
    seg_G = np.add.reduceat(eg, starts)
    seg_H = np.add.reduceat(eh, starts)
    seg_C = np.diff(np.append(starts, m))
    cg = np.cumsum(eg) - eg
    chh = np.cumsum(eh) - eh

    ci = np.flatnonzero(change)
    s = seg_id[ci]
    nd = e_node[ci]
    first = seg_start[ci]
    prev = np.where(first, 0.0, e_val[ci - 1])
    cand_thr = (prev + e_val[ci]) / 2.0
    GLp = cg[ci] - cg[starts[s]]
    HLp = chh[ci] - chh[starts[s]]
    CLp = ci - starts[s]
    GRp = seg_G[s] - GLp
    HRp = seg_H[s] - HLp
    CRp = seg_C[s] - CLp
    Gn, Hn, Cn = node_G[nd], node_H[nd], node_C[nd]
    Gm, Hm, Cm = Gn - seg_G[s], Hn - seg_H[s], Cn - seg_C[s]

    with np.errstate(divide="ignore", invalid="ignore"):
        # missing examples to the left
        GL, HL = GLp + Gm, HLp + Hm
        gain_l = 0.5 * (GL * GL / (HL + lam) + GRp * GRp / (HRp + lam) - Gn * Gn / (Hn + lam))
        ok_l = (CLp + Cm > 0) & (CRp > 0) & (HL >= mcw) & (HRp >= mcw)
        # missing examples to the right
        GR, HR = GRp + Gm, HRp + Hm
        gain_r = 0.5 * (GLp * GLp / (HLp + lam) + GR * GR / (HR + lam) - Gn * Gn / (Hn + lam))
        ok_r = (CLp > 0) & (CRp + Cm > 0) & (HLp >= mcw) & (HR >= mcw)

    gains = np.stack([gain_l, gain_r], axis=1).ravel()
    ok = np.stack([ok_l, ok_r], axis=1).ravel() & np.isfinite(gains) & (gains > 0)
    nodes = np.repeat(nd, 2)
    gains = np.where(ok, gains, -np.inf)
    np.maximum.at(best, nodes, gains)
    hit = np.flatnonzero(ok & (gains == best[nodes]))
    if len(hit) == 0:
        return found, col, thr, dleft, best
    # candidates are laid out in (node, column, threshold, left-then-right)
    # order, so the first hit per node is the tie-break winner
    winners_nodes, first_ix = np.unique(nodes[hit], return_index=True)
    w = hit[first_ix]
    cand = w // 2
    found[winners_nodes] = True
    col[winners_nodes] = e_col[ci[cand]]
    thr[winners_nodes] = cand_thr[cand]
    dleft[winners_nodes] = (w % 2) == 0
    return found, col, thr, dleft, best


def _entries(indptr, indices, data):
    rows = np.repeat(np.arange(len(indptr) - 1, dtype=np.int64), np.diff(indptr))
    order = np.lexsort((data, indices))
    return rows[order], np.asarray(indices, dtype=np.int64)[order], np.asarray(data, np.float64)[order]


def best_split(indptr, indices, data, g, h, lam=1.0, min_child_weight=1.0):
    """Best split of all rows of a CSR matrix, or ``None``.

    Ties go to the lowest column, then the lowest threshold, then to
    sending missing values left.
    """
    g = np.asarray(g, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    n = len(indptr) - 1
    if n < 2:
        return None
    e_row, e_col, e_val = _entries(indptr, indices, data)
    found, col, thr, dleft, gain = _find_splits(
        e_row, e_col, e_val, np.zeros(len(e_row), dtype=np.int64),
        np.array([g.sum()]), np.array([h.sum()]), np.array([n]),
        g, h, lam, min_child_weight,
    )
    if not found[0]:
        return None
    return Split(int(col[0]), float(thr[0]), bool(dleft[0]), float(gain[0]))


def _grow(entries, n_rows, g, h, params: ModelParams):
    e_row, e_col, e_val = entries
    lam, mcw = params.lam, params.min_child_weight
    feature, threshold, default_left, left, right, value = [], [], [], [], [], []

    def new_node():
        for lst, v in ((feature, -1), (threshold, 0.0), (default_left, False),
                       (left, -1), (right, -1), (value, 0.0)):
            lst.append(v)
        return len(feature) - 1

    active = np.array([new_node()])
    row_node = np.zeros(n_rows, dtype=np.int64)
    leaf_of_row = np.zeros(n_rows, dtype=np.int64)
    depth = 0
    while len(active):
        k = len(active)
        live = row_node >= 0
        rn = row_node[live]
        node_G = np.bincount(rn, weights=g[live], minlength=k)
        node_H = np.bincount(rn, weights=h[live], minlength=k)
        node_C = np.bincount(rn, minlength=k)
        if depth < params.max_depth:
            e_node = row_node[e_row]
            found, col, thr, dl, _ = _find_splits(
                e_row, e_col, e_val, e_node, node_G, node_H, node_C, g, h, lam, mcw
            )
            found &= node_C >= 2
        else:
            found = np.zeros(k, dtype=bool)

        denom = node_H + lam
        with np.errstate(divide="ignore", invalid="ignore"):
            leaf_w = np.where(denom > 0, -node_G / denom, 0.0)
        for j in np.flatnonzero(~found):
            value[active[j]] = float(leaf_w[j])
        finished = live.copy()
        finished[live] = ~found[rn]
        leaf_of_row[finished] = active[row_node[finished]]

        split_j = np.flatnonzero(found)
        if len(split_j) == 0:
            break
        children = []
        for j in split_j:
            a = active[j]
            lc, rc = new_node(), new_node()
            feature[a], threshold[a], default_left[a] = int(col[j]), float(thr[j]), bool(dl[j])
            left[a], right[a] = lc, rc
            children += [lc, rc]
        rank = np.full(k, -1, dtype=np.int64)
        rank[split_j] = np.arange(len(split_j))

        # route rows of split nodes
        moving = live.copy()
        moving[live] = found[rn]
        e_node = row_node[e_row]
        e_ok = e_node >= 0
        on_split = np.zeros(len(e_row), dtype=bool)
        on_split[e_ok] = found[e_node[e_ok]] & (e_col[e_ok] == col[e_node[e_ok]])
        present = np.zeros(n_rows, dtype=bool)
        pval = np.zeros(n_rows)
        present[e_row[on_split]] = True
        pval[e_row[on_split]] = e_val[on_split]
        mv = np.flatnonzero(moving)
        mnode = row_node[mv]
        go_left = np.where(present[mv], pval[mv] < thr[mnode], dl[mnode])
        new_row_node = np.full(n_rows, -1, dtype=np.int64)
        new_row_node[mv] = 2 * rank[mnode] + (~go_left)

        keep = new_row_node[e_row] >= 0
        e_row, e_col, e_val = e_row[keep], e_col[keep], e_val[keep]
        key = new_row_node[e_row]
        key = key.astype(np.uint16 if len(children) < 2 ** 16 else np.uint32)
        order = np.argsort(key, kind="stable")
        e_row, e_col, e_val = e_row[order], e_col[order], e_val[order]
        row_node = new_row_node
        active = np.array(children)
        depth += 1

    tree = Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(default_left, dtype=bool),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.float64),
    )
    return tree, leaf_of_row


def initial_score(labels) -> float:
    pos = int(np.sum(labels == 1))
    neg = len(labels) - pos
    if pos == 0:
        return -10.0
    if neg == 0:
        return 10.0
    return float(min(10.0, max(-10.0, math.log(pos / neg))))


def log_loss(raw, labels) -> float:
    raw = np.asarray(raw, dtype=np.float64)
    # log(1 + exp(-raw)) for positives, log(1 + exp(raw)) for negatives
    return float(np.mean(np.logaddexp(0.0, np.where(labels == 1, -raw, raw))))


def train_gbdt(ts, params: ModelParams, callback=None) -> Model:
    """Fit a boosted forest to a :class:`~atpboost.dataset.TrainingSet`.

    ``callback(round, raw_predictions)`` is called after every tree.
    """
    labels = np.asarray(ts.labels, dtype=np.float64)
    if len(labels) == 0:
        raise ValueError("cannot train on an empty training set")
    forced = params.base_score is not None
    base = float(params.base_score) if forced else initial_score(ts.labels)
    model = Model([], base, params.eta, ts.dim)
    single_class = labels.min() == labels.max()
    if single_class and not forced:
        return model
    entries = _entries(ts.indptr, ts.indices, ts.data)
    raw = np.full(len(labels), base)
    for r in range(params.n_trees):
        g, h = logistic_grad_hess(raw, labels)
        tree, leaf = _grow(entries, len(labels), g, h, params)
        model.trees.append(tree)
        raw += params.eta * tree.value[leaf]
        if callback is not None:
            callback(r, raw)
    return model


# -- persistence -----------------------------------------------------------------


def dumps(model: Model) -> str:
    lines = [
        FORMAT_HEADER,
        f"dim {model.dim}",
        f"base_score {model.base_score!r}",
        f"eta {model.eta!r}",
        f"trees {len(model.trees)}",
    ]
    for t in model.trees:
        lines.append("tree")
        for i in t.preorder():
            if t.feature[i] < 0:
                lines.append(f"leaf {float(t.value[i])!r}")
            else:
                side = "left" if t.default_left[i] else "right"
                lines.append(f"node {int(t.feature[i])} {float(t.threshold[i])!r} {side}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> Model:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != FORMAT_HEADER:
        raise ValueError("not a model file (bad header)")
    head = dict(ln.split(" ", 1) for ln in lines[1:5])
    model = Model([], float(head["base_score"]), float(head["eta"]), int(head["dim"]))
    n_trees = int(head["trees"])
    body = iter(lines[5:])
    for line in body:
        if line != "tree":
            raise ValueError(f"expected 'tree', got {line!r}")
        model.trees.append(_read_tree(body))
    if len(model.trees) != n_trees:
        raise ValueError("tree count does not match header")
    return model


def _read_tree(lines) -> Tree:
    feature, threshold, dleft, left, right, value = [], [], [], [], [], []

    def read():
        parts = next(lines).split()
        i = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        dleft.append(False)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        if parts[0] == "leaf":
            value[i] = float(parts[1])
        elif parts[0] == "node":
            feature[i], threshold[i] = int(parts[1]), float(parts[2])
            dleft[i] = parts[3] == "left"
            left[i] = read()
            right[i] = read()
        else:
            raise ValueError(f"bad tree line {' '.join(parts)!r}")
        return i

    read()
    return Tree(np.array(feature, dtype=np.int64), np.array(threshold), np.array(dleft, dtype=bool),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64), np.array(value))


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
