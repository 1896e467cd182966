"""Greedy CART regression tree on (u, psi) pairs and its dyadic partition.

The growth rule follows the usual rpart defaults: a node is split only if it
holds at least ``min_split`` samples, both children keep ``min_bucket``
samples, the depth limit is not reached, and the SSE reduction is at least
``cp`` times the root SSE. No cross-validated pruning is done.

Samples on a split threshold go to the left child (``u[axis] <= t``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


class LabeledSample(NamedTuple):
    u: np.ndarray
    psi: float


@dataclass(frozen=True)
class TreeConfig:
    min_split: int = 20
    min_bucket: int = 7
    cp: float = 0.01
    max_depth: int = 30

    def __post_init__(self):
        if self.min_bucket < 1:
            raise ValueError("min_bucket must be >= 1")
        if not 0.0 <= self.cp <= 1.0:
            raise ValueError("cp must lie in [0, 1]")
        if self.max_depth < 0 or self.min_split < 1:
            raise ValueError("max_depth must be >= 0 and min_split >= 1")


@dataclass
class Node:
    members: np.ndarray
    mean: float
    sse: float
    depth: int
    axis: int | None = None
    threshold: float | None = None
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.axis is None


@dataclass
class RegressionTree:
    root: Node
    n_samples: int
    dim: int

    def leaves(self) -> list[Node]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.extend([node.right, node.left])
        return out

    @property
    def depth(self) -> int:
        return max(leaf.depth for leaf in self.leaves())

    def predict(self, u) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        out = np.empty(u.shape[0])
        for k, row in enumerate(u):
            node = self.root
            while not node.is_leaf:
                node = node.left if row[node.axis] <= node.threshold else node.right
            out[k] = node.mean
        return out


@dataclass
class Cell:
    lower: np.ndarray
    upper: np.ndarray
    members: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    leaf_mean: float = float("nan")

    @property
    def edges(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def log_volume(self) -> float:
        e = self.edges
        if np.any(e <= 0):
            raise ValueError("cell has a non-positive edge length")
        return float(np.sum(np.log(e)))

    @property
    def volume(self) -> float:
        return float(np.prod(self.edges))

    def contains(self, u) -> np.ndarray:
        u = np.atleast_2d(u)
        return np.all((u >= self.lower) & (u <= self.upper), axis=1)


@dataclass
class DyadicPartition:
    box: Cell
    cells: list[Cell]

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    def membership(self, n_samples: int) -> np.ndarray:
        """Cell index of every input sample."""
        owner = np.full(n_samples, -1, dtype=int)
        for k, cell in enumerate(self.cells):
            owner[cell.members] = k
        return owner

    def dump(self) -> str:
        """One line per cell: ``a1 b1 a2 b2 ... count mean``."""
        lines = []
        for cell in self.cells:
            bounds = " ".join(f"{a!r} {b!r}" for a, b in zip(cell.lower, cell.upper))
            lines.append(f"{bounds} {cell.members.size} {cell.leaf_mean!r}")
        return "\n".join(lines) + "\n"


def _as_arrays(samples, psi=None) -> tuple[np.ndarray, np.ndarray]:
    if psi is None:
        u = np.array([np.asarray(s.u, dtype=float).ravel() for s in samples])
        y = np.array([float(s.psi) for s in samples])
    else:
        u = np.asarray(samples, dtype=float)
        if u.ndim == 1:
            u = u[:, None]
        y = np.asarray(psi, dtype=float).ravel()
    if u.shape[0] != y.size:
        raise ValueError("number of points and psi values differ")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(y))):
        raise ValueError("samples and psi values must be finite")
    return u, y


def bounding_box(u) -> Cell:
    """Per-axis ``[min, max]`` of the sample coordinates."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[0] < 2:
        raise ValueError("bounding box needs at least 2 samples")
    lo, hi = u.min(axis=0), u.max(axis=0)
    flat = np.flatnonzero(hi <= lo)
    if flat.size:
        raise ValueError(f"degenerate bounding box: axis {int(flat[0])} has zero range")
    return Cell(lo, hi)


def _best_split(u: np.ndarray, y: np.ndarray, min_bucket: int):
    """Lowest two-child SSE split as ``(sse, axis, threshold)`` or None."""
    n, d = u.shape
    if n < 2 * min_bucket:
        return None
    yc = y - y.mean()
    left_n = np.arange(1, n)
    size_ok = (left_n >= min_bucket) & (n - left_n >= min_bucket)
    best = None
    for axis in range(d):
        order = np.argsort(u[:, axis], kind="stable")
        xs = u[order, axis]
        ys = yc[order]
        csum = np.cumsum(ys)[:-1]
        csq_total = np.dot(ys, ys)
        rsum = -csum  # children sums; yc has zero total
        sse = csq_total - csum ** 2 / left_n - rsum ** 2 / (n - left_n)
        ok = size_ok & (xs[1:] > xs[:-1])
        if not np.any(ok):
            continue
        cand = np.where(ok, sse, np.inf)
        k = int(np.argmin(cand))
        if best is None or cand[k] < best[0]:
            lo, hi = xs[k], xs[k + 1]
            t = 0.5 * (lo + hi)
            if not lo <= t < hi:
                t = lo
            best = (float(max(cand[k], 0.0)), axis, float(t))
    return best


def fit_regression_tree(samples, psi=None, config: TreeConfig = TreeConfig()) -> RegressionTree:
    """Grow a least-squares regression tree of ``psi`` on ``u``.

    ``samples`` is either an ``(n, d)`` array with ``psi`` given separately,
    or a sequence of :class:`LabeledSample`.
    """
    u, y = _as_arrays(samples, psi)
    n = y.size
    if n < 1:
        raise ValueError("need at least one sample")

    def node_for(idx, depth):
        vals = y[idx]
        m = float(vals.mean())
        return Node(members=idx, mean=m, sse=float(np.sum((vals - m) ** 2)), depth=depth)

    root = node_for(np.arange(n), 0)
    alpha = config.cp * root.sse
    stack = [root]
    while stack:
        node = stack.pop()
        if node.members.size < config.min_split or node.depth >= config.max_depth or node.sse <= 0:
            continue
        found = _best_split(u[node.members], y[node.members], config.min_bucket)
        if found is None:
            continue
        child_sse, axis, t = found
        gain = node.sse - child_sse
        if gain <= 0 or gain < alpha:
            continue
        go_left = u[node.members, axis] <= t
        node.axis, node.threshold = axis, t
        node.left = node_for(node.members[go_left], node.depth + 1)
        node.right = node_for(node.members[~go_left], node.depth + 1)
        stack.extend([node.right, node.left])
    return RegressionTree(root=root, n_samples=n, dim=u.shape[1])


def extract_partition(tree: RegressionTree, box: Cell) -> DyadicPartition:
    """Clip ``box`` along the tree's split hyperplanes, one cell per leaf."""
    cells: list[Cell] = []

    def walk(node: Node, lo: np.ndarray, hi: np.ndarray):
        if node.is_leaf:
            cells.append(Cell(lo, hi, node.members, node.mean))
            return
        a, t = node.axis, node.threshold
        assert lo[a] <= t < hi[a], "split threshold outside its cell"
        left_hi = hi.copy()
        left_hi[a] = t
        right_lo = lo.copy()
        right_lo[a] = t
        walk(node.left, lo, left_hi)
        walk(node.right, right_lo, hi)

    walk(tree.root, np.array(box.lower, dtype=float), np.array(box.upper, dtype=float))
    return DyadicPartition(box=Cell(np.array(box.lower), np.array(box.upper)), cells=cells)
