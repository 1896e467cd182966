"""Decomposable (chordal) undirected graphs.

Vertices are zero-based internally; the edge-list file format is one-based:
the first line holds the vertex count, each following line one edge ``i j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path


class NotDecomposableError(ValueError):
    pass


def _neighbors(d: int, edges) -> list[set[int]]:
    nbrs = [set() for _ in range(d)]
    for i, j in edges:
        nbrs[i].add(j)
        nbrs[j].add(i)
    return nbrs


def _is_perfect_elimination(order: list[int], nbrs: list[set[int]]) -> bool:
    pos = {v: k for k, v in enumerate(order)}
    for v in order:
        later = [w for w in nbrs[v] if pos[w] > pos[v]]
        for a in range(len(later)):
            for b in range(a + 1, len(later)):
                if later[b] not in nbrs[later[a]]:
                    return False
    return True


def _max_cardinality_search(d: int, nbrs: list[set[int]]) -> list[int]:
    # Reverse of the MCS visiting order is a perfect elimination order
    # whenever the graph is chordal. Ties go to the lowest vertex label.
    weight = [0] * d
    visited: list[int] = []
    remaining = set(range(d))
    while remaining:
        v = min(remaining, key=lambda x: (-weight[x], x))
        visited.append(v)
        remaining.remove(v)
        for w in nbrs[v]:
            if w in remaining:
                weight[w] += 1
    return visited[::-1]


def _junction_order(cliques: list[frozenset]) -> list[frozenset]:
    # Prim's algorithm on the clique graph weighted by overlap size. The
    # maximum spanning tree is a junction tree, and adding cliques in Prim
    # order keeps the running intersection property. Ties go to list order.
    if not cliques:
        return []
    out = [cliques[0]]
    rest = list(cliques[1:])
    best = [len(c & cliques[0]) for c in rest]
    while rest:
        k = max(range(len(rest)), key=lambda i: (best[i], -i))
        c = rest.pop(k)
        best.pop(k)
        out.append(c)
        best = [max(b, len(r & c)) for b, r in zip(best, rest)]
    return out


@dataclass(frozen=True)
class DecomposableGraph:
    """Chordal graph with a perfect elimination order, cliques and separators.

    ``order[k]`` is the vertex eliminated k-th. ``nu[k]`` counts neighbours of
    ``order[k]`` eliminated after it. ``cliques`` satisfy the running
    intersection property in list order and ``separators[k]`` is the overlap of
    ``cliques[k]`` with the union of earlier cliques (empty for ``k = 0``).
    """

    d: int
    edges: tuple[tuple[int, int], ...]
    order: tuple[int, ...] = field(init=False)
    nu: tuple[int, ...] = field(init=False)
    cliques: tuple[tuple[int, ...], ...] = field(init=False)
    separators: tuple[tuple[int, ...], ...] = field(init=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("graph needs at least one vertex")
        canon = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j or not (0 <= i < self.d and 0 <= j < self.d):
                raise ValueError(f"invalid edge ({i}, {j}) for d={self.d}")
            canon.add((min(i, j), max(i, j)))
        edges = tuple(sorted(canon))
        object.__setattr__(self, "edges", edges)
        nbrs = _neighbors(self.d, edges)

        natural = list(range(self.d))
        order = natural if _is_perfect_elimination(natural, nbrs) else _max_cardinality_search(self.d, nbrs)
        if not _is_perfect_elimination(order, nbrs):
            raise NotDecomposableError("graph is not decomposable (no perfect elimination order)")
        pos = {v: k for k, v in enumerate(order)}
        nu = tuple(sum(1 for w in nbrs[v] if pos[w] > pos[v]) for v in order)

        # C(v) = {v} + later neighbours; the maximal ones are the cliques.
        candidates = [frozenset([v, *(w for w in nbrs[v] if pos[w] > pos[v])]) for v in order]
        maximal = []
        for k in range(self.d - 1, -1, -1):
            c = candidates[k]
            if not any(c < other for other in candidates) and c not in maximal:
                maximal.append(c)
        ordered = _junction_order(maximal)
        seen: set[int] = set()
        seps = []
        for k, c in enumerate(ordered):
            s = c & seen
            if k > 0 and s and not any(s <= prev for prev in ordered[:k]):
                raise NotDecomposableError("running intersection property violated")
            seps.append(tuple(sorted(s)))
            seen |= c
        maximal = ordered
        object.__setattr__(self, "order", tuple(order))
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "cliques", tuple(tuple(sorted(c)) for c in maximal))
        object.__setattr__(self, "separators", tuple(seps))

    @classmethod
    def complete(cls, d: int) -> "DecomposableGraph":
        return cls(d, tuple((i, j) for i in range(d) for j in range(i + 1, d)))

    @classmethod
    def empty(cls, d: int) -> "DecomposableGraph":
        return cls(d, ())

    @classmethod
    def from_edge_list(cls, text: str) -> "DecomposableGraph":
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines:
            raise ValueError("empty edge-list file")
        d = int(lines[0])
        edges = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise ValueError(f"bad edge line: {ln!r}")
            edges.append((int(parts[0]) - 1, int(parts[1]) - 1))
        return cls(d, tuple(edges))

    @classmethod
    def load(cls, path) -> "DecomposableGraph":
        return cls.from_edge_list(Path(path).read_text())

    def to_edge_list(self) -> str:
        return "\n".join([str(self.d), *(f"{i + 1} {j + 1}" for i, j in self.edges)]) + "\n"

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in set(self.edges)

    def is_natural_order(self) -> bool:
        return self.order == tuple(range(self.d))

    def relabeled(self) -> "DecomposableGraph":
        """Same graph with vertex ``order[k]`` renamed ``k``."""
        pos = {v: k for k, v in enumerate(self.order)}
        return DecomposableGraph(self.d, tuple((pos[i], pos[j]) for i, j in self.edges))
