"""Greedy density-threshold partitioning and the independent-sample driver."""

from __future__ import annotations

import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph, InvalidPartitionError
from .seeding import derive_seed

COMMUNITY = "community"
RESIDUAL = "residual"


@dataclass(frozen=True)
class Block:
    nodes: tuple[int, ...]
    intra_edges: int
    kind: str

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def pair_count(self) -> int:
        k = len(self.nodes)
        return k * (k - 1) // 2

    @property
    def density(self) -> float:
        n = self.pair_count
        return self.intra_edges / n if n else 1.0


@dataclass(frozen=True)
class Partition:
    """Disjoint blocks covering every node; ``block_of[v]`` is the index of v's block."""

    blocks: tuple[Block, ...]
    block_of: tuple[int, ...]
    seed: int
    threshold: float

    def __len__(self) -> int:
        return len(self.blocks)

    def block_index_array(self) -> np.ndarray:
        return np.asarray(self.block_of, dtype=np.int64)

    def validate(self, g: Graph) -> None:
        """Raise :class:`InvalidPartitionError` if any partition invariant fails on ``g``."""
        n = g.node_count
        if len(self.block_of) != n:
            raise InvalidPartitionError(f"partition covers {len(self.block_of)} nodes, graph has {n}")
        seen = [False] * n
        for b, block in enumerate(self.blocks):
            for v in block.nodes:
                if seen[v]:
                    raise InvalidPartitionError(f"node {v} in more than one block")
                seen[v] = True
                if self.block_of[v] != b:
                    raise InvalidPartitionError(f"block_of[{v}] disagrees with block {b}")
            s = set(block.nodes)
            m = sum(len(g.adjacency[u] & s) for u in s) // 2
            if m != block.intra_edges:
                raise InvalidPartitionError(f"block {b} records {block.intra_edges} edges, has {m}")
            if block.kind == COMMUNITY:
                if block.size < 2 or m < 1 or m / block.pair_count < self.threshold:
                    raise InvalidPartitionError(f"community block {b} below threshold")
            elif block.kind == RESIDUAL:
                if m != 0:
                    raise InvalidPartitionError(f"residual block {b} has inner links")
            else:
                raise InvalidPartitionError(f"unknown block kind {block.kind!r}")
        if not all(seen):
            raise InvalidPartitionError("partition does not cover every node")

    def to_json_dict(self, g: Graph) -> dict:
        return {
            "seed": self.seed,
            "threshold": self.threshold,
            "blocks": [
                {
                    "nodes": [g.labels[v] for v in b.nodes],
                    "kind": b.kind,
                    "m": b.intra_edges,
                    "n": b.pair_count,
                }
                for b in self.blocks
            ],
        }

    def to_json(self, g: Graph) -> str:
        return json.dumps(self.to_json_dict(g), indent=2)


def random_bipartition(g: Graph, rng: random.Random) -> tuple[list[int], list[int]]:
    """Send each node to one of two sides by a fair coin; repair an empty side."""
    n = g.node_count
    if n < 2:
        raise ValueError("bipartition needs at least two nodes")
    flags = [rng.getrandbits(1) for _ in range(n)]
    side1 = [v for v in range(n) if flags[v]]
    side2 = [v for v in range(n) if not flags[v]]
    if not side1:
        v = side2.pop(rng.randrange(len(side2)))
        side1.append(v)
    elif not side2:
        v = side1.pop(rng.randrange(len(side1)))
        side2.append(v)
    return side1, side2


class _DegreeBuckets:
    """Nodes bucketed by current degree; O(1) update and uniform pick of a minimum."""

    def __init__(self, degree: dict[int, int]):
        maxd = max(degree.values(), default=0)
        self.buckets: list[list[int]] = [[] for _ in range(maxd + 1)]
        self.pos: dict[int, int] = {}
        self.degree = degree
        for v, d in degree.items():
            self.pos[v] = len(self.buckets[d])
            self.buckets[d].append(v)
        self.low = 0

    def _detach(self, v: int) -> None:
        bucket = self.buckets[self.degree[v]]
        i = self.pos[v]
        last = bucket.pop()
        if last != v:
            bucket[i] = last
            self.pos[last] = i

    def decrement(self, v: int) -> None:
        self._detach(v)
        d = self.degree[v] - 1
        self.degree[v] = d
        self.pos[v] = len(self.buckets[d])
        self.buckets[d].append(v)
        if d < self.low:
            self.low = d

    def pop_min(self, rng: random.Random) -> int:
        while not self.buckets[self.low]:
            self.low += 1
        bucket = self.buckets[self.low]
        v = bucket[rng.randrange(len(bucket))] if len(bucket) > 1 else bucket[0]
        self._detach(v)
        del self.degree[v]
        del self.pos[v]
        return v


def _peel(adj: Sequence[frozenset[int] | set[int]], alive: set[int], edges: int,
          threshold: float, rng: random.Random, removed: list[int] | None = None) -> set[int]:
    degree = {v: len(adj[v] & alive) for v in sorted(alive)}
    working = set(alive)
    n = len(working)
    m = edges
    buckets = _DegreeBuckets(degree)
    # same float expression as block_density, so accepted blocks pass it exactly
    while n >= 2 and m / (n * (n - 1) / 2) < threshold:
        v = buckets.pop_min(rng)
        working.discard(v)
        if removed is not None:
            removed.append(v)
        for u in adj[v]:
            if u in working:
                buckets.decrement(u)
                m -= 1
        n -= 1
    return working


def community_find(g_sub: Graph, threshold: float, rng: random.Random,
                   removed: list[int] | None = None) -> set[int]:
    """Peel minimum-degree nodes off ``g_sub`` until its density reaches ``threshold``.

    Degrees are recomputed in the shrinking working graph; ties between nodes of
    equal minimum degree are broken uniformly with ``rng``. Returns the surviving
    node indices of ``g_sub``; peeled nodes are appended to ``removed`` in order
    when a list is given.
    """
    if g_sub.edge_count == 0:
        raise ValueError("community_find needs a graph with at least one edge")
    return _peel(g_sub.adjacency, set(range(g_sub.node_count)), g_sub.edge_count, threshold, rng, removed)


def _extract_side(g: Graph, side: Iterable[int], threshold: float,
                  rng: random.Random) -> tuple[list[tuple[int, ...]], list[int]]:
    adj = g.adjacency
    alive = set(side)
    edges = sum(len(adj[v] & alive) for v in alive) // 2
    communities = []
    while edges > 0:
        found = _peel(adj, alive, edges, threshold, rng)
        inner = sum(len(adj[v] & found) for v in found) // 2
        communities.append(tuple(sorted(found)))
        alive -= found
        edges -= inner + sum(len(adj[v] & alive) for v in found)
    return communities, sorted(alive)


def partition_once(g: Graph, threshold: float, seed: int) -> Partition:
    """One FBM partition sample.

    The node set is split into two random sides. Each side repeatedly yields a
    dense community via :func:`community_find` which is then removed with its
    links, until no link is left; the leftover nodes of each side form one
    residual block.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    rng = random.Random(seed)
    n = g.node_count
    if n == 0:
        return Partition((), (), seed, threshold)
    if n == 1:
        sides = [[0]]
    else:
        sides = list(random_bipartition(g, rng))

    adj = g.adjacency
    blocks: list[Block] = []
    for side in sides:
        communities, leftover = _extract_side(g, side, threshold, rng)
        for nodes in communities:
            s = set(nodes)
            m = sum(len(adj[v] & s) for v in nodes) // 2
            blocks.append(Block(nodes, m, COMMUNITY))
        if leftover:
            blocks.append(Block(tuple(leftover), 0, RESIDUAL))

    block_of = [0] * n
    for b, block in enumerate(blocks):
        for v in block.nodes:
            block_of[v] = b
    return Partition(tuple(blocks), tuple(block_of), seed, threshold)


def _partition_job(args):
    g, threshold, seed = args
    return partition_once(g, threshold, seed)


def sample_partitions(g: Graph, threshold: float, count: int, master_seed: int,
                      workers: int = 1) -> list[Partition]:
    """``count`` independent partitions; sample ``k`` uses ``derive_seed(master_seed, k)``.

    The result does not depend on ``workers``.
    """
    if count < 1:
        raise ValueError("need at least one sample")
    seeds = [derive_seed(master_seed, k) for k in range(count)]
    if workers <= 1 or count == 1:
        return [partition_once(g, threshold, s) for s in seeds]
    chunk = max(1, count // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_partition_job, [(g, threshold, s) for s in seeds], chunksize=chunk))


def block_edge_counts(g: Graph, p: Partition) -> np.ndarray:
    """``k x k`` symmetric matrix: intra-edge counts on the diagonal, crossing counts off it."""
    k = len(p.blocks)
    counts = np.zeros((k, k), dtype=np.int64)
    if g.edge_count:
        b = p.block_index_array()
        e = g.edge_array
        bu, bv = b[e[:, 0]], b[e[:, 1]]
        np.add.at(counts, (bu, bv), 1)
        off = bu != bv
        np.add.at(counts, (bv[off], bu[off]), 1)
    return counts


def partition_density_matrix(g: Graph, p: Partition) -> np.ndarray:
    """Link-density matrix of a partition: block densities on the diagonal, cross densities off it."""
    sizes = np.array([b.size for b in p.blocks], dtype=np.float64)
    counts = block_edge_counts(g, p).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = counts / np.outer(sizes, sizes)
    pairs = sizes * (sizes - 1) / 2
    diag = np.where(pairs > 0, np.diag(counts) / np.where(pairs > 0, pairs, 1), 1.0)
    np.fill_diagonal(dens, diag)
    return dens


def density_matrix_csv(matrix: np.ndarray) -> str:
    k = matrix.shape[0]
    lines = [",".join(["block"] + [str(j) for j in range(k)])]
    for i in range(k):
        lines.append(",".join([str(i)] + [repr(float(x)) for x in matrix[i]]))
    return "\n".join(lines) + "\n"


__all__ = [
    "Block",
    "Partition",
    "COMMUNITY",
    "RESIDUAL",
    "random_bipartition",
    "community_find",
    "partition_once",
    "sample_partitions",
    "block_edge_counts",
    "partition_density_matrix",
    "density_matrix_csv",
]
