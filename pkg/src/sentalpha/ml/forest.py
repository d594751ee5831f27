"""Random forest on Gini impurity with content-addressed determinism.

Feature subsampling at each node must commute with column permutation: if the
caller permutes the columns of X, the importance vector must permute the same
way, bit for bit. Positional RNG draws would break that, so each node orders
its candidate features by a 64-bit content hash of the feature's values over
the node's rows, then draws the mtry-subset and breaks gain ties in that
canonical order. Identical columns hash equal and fall back to index order;
that is the one degeneracy the guarantee excludes.

The growing loop is jitted; every random number it consumes is drawn up
front from a named substream, so tree t of a forest is a pure function of
(data, seed, t).
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import LengthMismatch, SingleClass
from ..rng import substream

_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)
_HASH_MASK = np.uint64(0x7FFFFFFFFFFFFFFF)


@njit(cache=True, nogil=True)
def _grow(X, Xbits, y01, rows, mtry, min_split, pool,
          feat, thr, left, right, leaf, imp):
    n = rows.shape[0]
    n_feat = X.shape[1]
    work = rows.copy()
    tmp = np.empty(n, np.int64)
    hashes = np.empty(n_feat, np.int64)
    max_nodes = feat.shape[0]
    st_lo = np.empty(max_nodes, np.int64)
    st_hi = np.empty(max_nodes, np.int64)
    st_id = np.empty(max_nodes, np.int64)
    st_lo[0] = 0
    st_hi[0] = n
    st_id[0] = 0
    sp = 1
    node_count = 1
    pp = 0
    while sp > 0:
        sp -= 1
        lo = st_lo[sp]
        hi = st_hi[sp]
        node = st_id[sp]
        m = hi - lo
        pos = 0
        for r in range(lo, hi):
            pos += y01[work[r]]
        if pos == 0 or pos == m or m < min_split:
            feat[node] = -1
            leaf[node] = 1.0 if 2 * pos >= m else -1.0
            continue

        for fcol in range(n_feat):
            h = _FNV_OFFSET
            for r in range(lo, hi):
                h = (h ^ Xbits[work[r], fcol]) * _FNV_PRIME
            hashes[fcol] = np.int64(h & _HASH_MASK)
        order = np.argsort(hashes, kind="mergesort")

        k_try = mtry if mtry < n_feat else n_feat
        for k in range(k_try):
            span = n_feat - k
            off = int(pool[pp] * span)
            pp += 1
            if off >= span:
                off = span - 1
            swap = k + off
            t0 = order[k]
            order[k] = order[swap]
            order[swap] = t0

        p_parent = pos / m
        gini_parent = 1.0 - p_parent * p_parent - (1.0 - p_parent) * (1.0 - p_parent)
        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        vals = np.empty(m)
        for k in range(k_try):
            fcol = order[k]
            for r in range(m):
                vals[r] = X[work[lo + r], fcol]
            sidx = np.argsort(vals)
            lp = 0
            for r in range(m - 1):
                lp += y01[work[lo + sidx[r]]]
                va = vals[sidx[r]]
                vb = vals[sidx[r + 1]]
                if va < vb:
                    lc = r + 1
                    rc = m - lc
                    rp = pos - lp
                    pl = lp / lc
                    pr = rp / rc
                    gl = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl)
                    gr = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr)
                    gain = gini_parent - (lc * gl + rc * gr) / m
                    if gain > best_gain:
                        best_gain = gain
                        best_feat = fcol
                        best_thr = (va + vb) / 2.0
        if best_feat < 0 or best_gain <= 1e-15:
            feat[node] = -1
            leaf[node] = 1.0 if 2 * pos >= m else -1.0
            continue

        imp[best_feat] += (m / n) * best_gain
        nl = 0
        for r in range(lo, hi):
            if X[work[r], best_feat] <= best_thr:
                tmp[nl] = work[r]
                nl += 1
        nr = nl
        for r in range(lo, hi):
            if X[work[r], best_feat] > best_thr:
                tmp[nr] = work[r]
                nr += 1
        for r in range(m):
            work[lo + r] = tmp[r]

        feat[node] = best_feat
        thr[node] = best_thr
        left[node] = node_count
        right[node] = node_count + 1
        st_lo[sp] = lo + nl
        st_hi[sp] = hi
        st_id[sp] = node_count + 1
        sp += 1
        st_lo[sp] = lo
        st_hi[sp] = lo + nl
        st_id[sp] = node_count
        sp += 1
        node_count += 2
    return node_count


@njit(cache=True, nogil=True)
def _tree_votes(X, feat, thr, left, right, leaf, votes):
    for i in range(X.shape[0]):
        node = 0
        while feat[node] >= 0:
            if X[i, feat[node]] <= thr[node]:
                node = left[node]
            else:
                node = right[node]
        votes[i] += leaf[node]


@dataclass(frozen=True)
class ForestModel:
    trees: tuple
    importances: np.ndarray
    n_features: int
    n_trees: int
    mtry: int


def _resolve_mtry(max_features, n_feat: int) -> int:
    if max_features == "sqrt":
        return max(1, int(round(math.sqrt(n_feat))))
    if max_features == "all":
        return n_feat
    mtry = int(max_features)
    if mtry < 1 or mtry > n_feat:
        raise ValueError(f"max_features {max_features!r} out of range")
    return mtry


def forest_train(X, y, n_trees: int, seed: int,
                 max_features="sqrt", min_samples_split: int = 2) -> ForestModel:
    """Fit n_trees bootstrap trees and average normalized importances.

    Args:
        X: (n, p) features.
        y: labels in {-1, +1}.
        n_trees: ensemble size, >= 1.
        seed: run seed; tree t draws only from substream (seed, "tree", t).
        max_features: "sqrt", "all", or an int per-node candidate count.
        min_samples_split: smallest node size eligible for a split.

    Returns:
        ForestModel whose importances are non-negative and sum to 1 (uniform
        if no tree found any split).

    Raises:
        SingleClass: one label only.
        LengthMismatch: X and y row counts differ.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise LengthMismatch(f"X rows {X.shape} vs y {y.shape}")
    if not np.isin(y, (-1, 1)).all():
        raise ValueError("labels must be -1 or +1")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    if np.unique(y).size < 2:
        raise SingleClass("training labels are all identical")
    n, n_feat = X.shape
    mtry = _resolve_mtry(max_features, n_feat)
    y01 = (y == 1).astype(np.int64)
    Xbits = X.view(np.uint64)
    imp_sum = np.zeros(n_feat)
    trees = []
    max_nodes = 2 * n + 1
    for t in range(n_trees):
        rng = substream(seed, "tree", t)
        rows = rng.integers(0, n, size=n).astype(np.int64)
        pool = rng.random((n + 2) * mtry)
        feat = np.full(max_nodes, -1, np.int64)
        thr = np.zeros(max_nodes)
        left = np.zeros(max_nodes, np.int64)
        right = np.zeros(max_nodes, np.int64)
        leaf = np.zeros(max_nodes)
        imp = np.zeros(n_feat)
        count = _grow(X, Xbits, y01, rows, mtry, min_samples_split, pool,
                      feat, thr, left, right, leaf, imp)
        # fsum: normalization must not depend on column order
        total = math.fsum(imp)
        if total > 0.0:
            imp_sum += imp / total
        trees.append((feat[:count], thr[:count], left[:count],
                      right[:count], leaf[:count]))
    importances = imp_sum / n_trees
    grand = math.fsum(importances)
    if grand > 0.0:
        importances = importances / grand
    else:
        importances = np.full(n_feat, 1.0 / n_feat)
    return ForestModel(trees=tuple(trees), importances=importances,
                       n_features=n_feat, n_trees=n_trees, mtry=mtry)


def forest_predict(model: ForestModel, X) -> np.ndarray:
    """Majority vote over trees; a tied vote sum maps to +1."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise LengthMismatch(
            f"expected {model.n_features} columns, got {X.shape}"
        )
    votes = np.zeros(X.shape[0])
    for feat, thr, left, right, leaf in model.trees:
        _tree_votes(X, feat, thr, left, right, leaf, votes)
    return np.where(votes >= 0.0, 1, -1).astype(np.int64)


def forest_importances(model: ForestModel) -> np.ndarray:
    return model.importances.copy()
