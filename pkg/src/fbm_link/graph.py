"""Undirected simple graphs, edge-list I/O and the density primitives."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np


class EdgeListError(ValueError):
    """Raised for malformed edge-list input; carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None, source: str | None = None):
        self.lineno = lineno
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class InvalidPartitionError(ValueError):
    """Node sets that should be disjoint overlap, or do not cover the graph."""


def _canon(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


class Graph:
    """Immutable undirected simple graph over dense node indices ``0..n-1``.

    ``labels[i]`` is the original (string) identifier of node ``i``.
    """

    __slots__ = ("_labels", "_index", "_adj", "_edges", "_edge_array")

    def __init__(self, labels: Sequence[str], edges: Iterable[tuple[int, int]]):
        labels = tuple(str(x) for x in labels)
        n = len(labels)
        adj: list[set[int]] = [set() for _ in range(n)]
        canon: set[tuple[int, int]] = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop on node {labels[i]!r}")
            if not (0 <= i < n and 0 <= j < n):
                raise IndexError(f"edge ({i}, {j}) outside 0..{n - 1}")
            canon.add(_canon(i, j))
            adj[i].add(j)
            adj[j].add(i)
        index = {lab: k for k, lab in enumerate(labels)}
        if len(index) != n:
            raise ValueError("duplicate node labels")
        self._labels = labels
        self._index = index
        self._adj = tuple(frozenset(a) for a in adj)
        self._edges = frozenset(canon)
        arr = np.array(sorted(canon), dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        self._edge_array = arr

    # -- basic accessors ---------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._labels)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        """Edges as ``(i, j)`` pairs with ``i < j``."""
        return self._edges

    @property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        return self._adj

    @property
    def edge_array(self) -> np.ndarray:
        """Sorted ``(|E|, 2)`` read-only array of edges, ``i < j`` per row."""
        return self._edge_array

    def index_of(self, label) -> int:
        return self._index[str(label)]

    def neighbors(self, i: int) -> frozenset[int]:
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self._adj), dtype=np.int64, count=self.node_count)

    def has_edge(self, i: int, j: int) -> bool:
        return j in self._adj[i]

    def __len__(self) -> int:
        return self.node_count

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._labels == other._labels and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self._labels, self._edges))

    def __repr__(self) -> str:
        return f"Graph(nodes={self.node_count}, edges={self.edge_count})"

    # -- derived graphs ----------------------------------------------------

    def without_edges(self, removed: Iterable[tuple[int, int]]) -> "Graph":
        """Same node set, with the given edges dropped."""
        drop = {_canon(i, j) for i, j in removed}
        return Graph(self._labels, (e for e in sorted(self._edges) if e not in drop))

    def induced(self, nodes: Iterable[int]) -> "Graph":
        """Induced subgraph, re-indexed in increasing original-index order."""
        keep = sorted(set(nodes))
        remap = {old: new for new, old in enumerate(keep)}
        edges = [(remap[i], remap[j]) for i, j in sorted(self._edges) if i in remap and j in remap]
        return Graph([self._labels[k] for k in keep], edges)

    def non_edges(self) -> np.ndarray:
        """All unordered non-adjacent pairs as an ``(N, 2)`` array, lexicographic order."""
        n = self.node_count
        if n < 2:
            return np.empty((0, 2), dtype=np.int64)
        iu, ju = np.triu_indices(n, k=1)
        mask = np.ones(iu.shape[0], dtype=bool)
        if self.edge_count:
            e = self._edge_array
            # position of (i, j), i < j, in row-major upper-triangular order
            pos = e[:, 0] * (2 * n - e[:, 0] - 1) // 2 + (e[:, 1] - e[:, 0] - 1)
            mask[pos] = False
        return np.stack([iu[mask], ju[mask]], axis=1).astype(np.int64)

    # -- serialization -----------------------------------------------------

    def to_edge_list(self) -> str:
        lines = [f"{self._labels[i]} {self._labels[j]}" for i, j in sorted(self._edges)]
        return "\n".join(lines) + ("\n" if lines else "")


def _iter_lines(text: str | TextIO) -> Iterator[str]:
    if isinstance(text, str):
        yield from text.splitlines()
    else:
        for line in text:
            yield line.rstrip("\n")


def parse_edge_list(text: str | TextIO, source: str | None = None) -> Graph:
    """Parse whitespace-separated ``u v`` lines into a :class:`Graph`.

    Blank lines and lines starting with ``#`` are skipped. Labels are indexed
    in order of first appearance; repeated and reversed edges collapse.
    """
    index: dict[str, int] = {}
    labels: list[str] = []
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(_iter_lines(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListError(f"expected 2 node labels, got {len(tokens)}", lineno, source)
        a, b = tokens
        if a == b:
            raise EdgeListError(f"self-loop on node {a!r}", lineno, source)
        for tok in (a, b):
            if tok not in index:
                index[tok] = len(labels)
                labels.append(tok)
        edges.append((index[a], index[b]))
    return Graph(labels, edges)


def read_edge_list(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh, source=str(path))


def load_bundled(name: str) -> Graph:
    """Load one of the edge lists shipped in ``fbm_link/data`` (``karate``, ``ring6``, ...)."""
    fname = name if name.endswith(".txt") else f"{name}.txt"
    ref = resources.files("fbm_link").joinpath("data", fname)
    if not ref.is_file():
        raise FileNotFoundError(f"no bundled dataset {name!r}")
    return parse_edge_list(ref.read_text(encoding="utf-8"), source=fname)


def connected_components(g: Graph) -> list[list[int]]:
    seen = [False] * g.node_count
    comps = []
    for s in range(g.node_count):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in g.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    queue.append(v)
        comps.append(sorted(comp))
    return comps


def giant_component(g: Graph) -> Graph:
    """Largest connected component; ties go to the component holding the smallest index."""
    if g.node_count == 0:
        return g
    comps = connected_components(g)
    # components come out ordered by their minimum index, so max() keeps the first tie
    best = max(comps, key=len)
    if len(best) == g.node_count:
        return g
    return g.induced(best)


# -- densities ---------------------------------------------------------------


def count_intra_edges(g: Graph, nodes: Iterable[int]) -> int:
    s = set(nodes)
    return sum(len(g.adjacency[u] & s) for u in s) // 2


def count_cross_edges(g: Graph, a: Iterable[int], b: Iterable[int]) -> int:
    sb = set(b)
    return sum(len(g.adjacency[u] & sb) for u in set(a))


def block_density(g: Graph, nodes: Iterable[int]) -> float:
    """Fraction of the ``|V|(|V|-1)/2`` possible links present inside ``nodes``.

    Blocks with fewer than two nodes are treated as complete and return 1.0.
    """
    s = set(nodes)
    k = len(s)
    if k < 2:
        return 1.0
    return count_intra_edges(g, s) / (k * (k - 1) / 2)


def cross_density(g: Graph, a: Iterable[int], b: Iterable[int]) -> float:
    """Fraction of the ``|a||b|`` possible links present between two disjoint sets."""
    sa, sb = set(a), set(b)
    if not sa or not sb:
        raise InvalidPartitionError("cross density needs two non-empty node sets")
    if sa & sb:
        raise InvalidPartitionError(f"node sets overlap on {sorted(sa & sb)[:5]}")
    return count_cross_edges(g, sa, sb) / (len(sa) * len(sb))


# -- statistics --------------------------------------------------------------


@dataclass(frozen=True)
class GraphStats:
    node_count: int
    edge_count: int
    density: float
    clustering_coefficient: float
    average_degree: float
    average_shortest_distance: float

    def to_json_dict(self) -> dict:
        return {
            "nodes": self.node_count,
            "edges": self.edge_count,
            "density": self.density,
            "clustering": self.clustering_coefficient,
            "avg_degree": self.average_degree,
            "avg_distance": self.average_shortest_distance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def local_clustering(g: Graph, i: int) -> float:
    nbrs = g.adjacency[i]
    k = len(nbrs)
    if k < 2:
        return 0.0
    links = sum(len(g.adjacency[u] & nbrs) for u in nbrs) // 2
    return 2.0 * links / (k * (k - 1))


def _bfs_distances(g: Graph, source: int) -> list[int]:
    dist = [-1] * g.node_count
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def graph_stats(g: Graph, include_low_degree: bool = False) -> GraphStats:
    """Table-style summary statistics of a (connected) graph.

    Clustering is the mean local coefficient over nodes of degree >= 2 (the
    convention that gives C = 0.588 for the karate club); pass
    ``include_low_degree=True`` to average over all nodes with the others
    counted as 0. The distance is averaged over unordered pairs that can
    reach each other.
    """
    n, m = g.node_count, g.edge_count
    density = block_density(g, range(n)) if n >= 2 else 0.0
    counted = [i for i in range(n) if include_low_degree or g.degree(i) >= 2]
    clustering = sum(local_clustering(g, i) for i in counted) / len(counted) if counted else 0.0
    total = 0
    pairs = 0
    for s in range(n):
        for t, d in enumerate(_bfs_distances(g, s)):
            if t > s and d > 0:
                total += d
                pairs += 1
    return GraphStats(
        node_count=n,
        edge_count=m,
        density=density,
        clustering_coefficient=clustering,
        average_degree=2.0 * m / n if n else 0.0,
        average_shortest_distance=total / pairs if pairs else 0.0,
    )
