"""Link probabilities from sampled partitions, accumulated in log space.

For one partition, a candidate pair ``(i, j)`` contributes a numerator and a
denominator that are both Beta integrals over the link probability ``p``:

* pair inside a community block with ``n`` pairs and ``m`` links
  (dense regime): ``B(n + 2, n - m + 1)`` over ``B(n + 1, n - m + 1)``;
* pair across blocks with ``n`` possible and ``m`` actual crossing links,
  or inside a residual block (sparse regime): ``B(m + 2, n + 1)`` over
  ``B(m + 1, n + 1)``.

The final score of a pair is the sum of its numerators over all samples
divided by the sum of its denominators.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.special import betaln

from .graph import Graph, InvalidPartitionError
from .partition import COMMUNITY, Partition, block_edge_counts, sample_partitions


@dataclass(frozen=True)
class PairTerms:
    log_numerator: float
    log_denominator: float

    @property
    def ratio(self) -> float:
        return float(np.exp(self.log_numerator - self.log_denominator))


def _beta_pair(a, b):
    # B(a + 1, b) = B(a, b) * a / (a + b); deriving the numerator from the
    # denominator keeps the ratio accurate to ~1e-13 where two independent
    # betaln calls would drift to ~1e-12.
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    log_den = betaln(a, b)
    log_num = log_den + np.log(a / (a + b))
    return log_num, log_den


def dense_log_terms(n_pairs, m_edges):
    """Vectorised intra-community terms; see :func:`intra_terms`."""
    n = np.asarray(n_pairs, dtype=np.float64)
    m = np.asarray(m_edges, dtype=np.float64)
    return _beta_pair(n + 1.0, n - m + 1.0)


def sparse_log_terms(n_cross, m_cross):
    """Vectorised cross-block terms; see :func:`inter_terms`."""
    n = np.asarray(n_cross, dtype=np.float64)
    m = np.asarray(m_cross, dtype=np.float64)
    return _beta_pair(m + 1.0, n + 1.0)


def intra_terms(n_pairs: int, m_edges: int) -> PairTerms:
    """Log Beta integrals for a pair inside a dense block.

    ``log_numerator = log B(n + 2, n - m + 1)`` and
    ``log_denominator = log B(n + 1, n - m + 1)``, so the per-sample
    probability is ``(n + 1) / (2n - m + 2)``.
    """
    if n_pairs < 1:
        raise ValueError(f"block needs at least one node pair, got n={n_pairs}")
    if not 0 <= m_edges <= n_pairs:
        raise ValueError(f"block statistics corrupt: m={m_edges} outside [0, {n_pairs}]")
    num, den = dense_log_terms(n_pairs, m_edges)
    return PairTerms(float(num), float(den))


def inter_terms(n_cross: int, m_cross: int) -> PairTerms:
    """Log Beta integrals for a pair in a sparse region (between blocks, or residual).

    ``log_numerator = log B(m + 2, n + 1)``, ``log_denominator = log B(m + 1, n + 1)``;
    per-sample probability ``(m + 1) / (n + m + 2)``.
    """
    if n_cross < 1:
        raise ValueError(f"need at least one possible crossing pair, got n={n_cross}")
    if m_cross < 0:
        raise ValueError(f"negative crossing-link count {m_cross}")
    num, den = sparse_log_terms(n_cross, m_cross)
    return PairTerms(float(num), float(den))


def block_term_matrices(g: Graph, p: Partition) -> tuple[np.ndarray, np.ndarray]:
    """``k x k`` matrices of (log numerator, log denominator) for every block pair.

    Diagonal entries apply to non-adjacent pairs inside a block: the dense
    estimator for community blocks, the sparse one (``m = 0``) for residual blocks.
    Entries for single-node blocks are filler and never indexed.
    """
    sizes = np.array([b.size for b in p.blocks], dtype=np.float64)
    counts = block_edge_counts(g, p)
    log_num, log_den = sparse_log_terms(np.outer(sizes, sizes), counts)

    pairs = sizes * (sizes - 1.0) / 2.0
    intra = np.diag(counts).astype(np.float64)
    is_comm = np.array([b.kind == COMMUNITY for b in p.blocks], dtype=bool)
    d_num, d_den = dense_log_terms(pairs, intra)
    s_num, s_den = sparse_log_terms(pairs, intra)
    np.fill_diagonal(log_num, np.where(is_comm, d_num, s_num))
    np.fill_diagonal(log_den, np.where(is_comm, d_den, s_den))
    return log_num, log_den


class PairAccumulator:
    """Running log-sums of numerators and denominators over samples, per candidate pair.

    Candidate pairs are the non-adjacent pairs of the graph the accumulator was
    built for, stored as flat arrays in lexicographic ``(i, j)``, ``i < j`` order.
    """

    def __init__(self, g: Graph, pairs: np.ndarray | None = None):
        self.graph = g
        self.pairs = g.non_edges() if pairs is None else np.asarray(pairs, dtype=np.int64)
        size = self.pairs.shape[0]
        self.log_num = np.full(size, -np.inf)
        self.log_den = np.full(size, -np.inf)
        self.sample_count = 0

    def __len__(self) -> int:
        return self.pairs.shape[0]

    def add_terms(self, log_num: np.ndarray, log_den: np.ndarray) -> None:
        np.logaddexp(self.log_num, log_num, out=self.log_num)
        np.logaddexp(self.log_den, log_den, out=self.log_den)
        self.sample_count += 1

    def merge(self, other: "PairAccumulator") -> "PairAccumulator":
        """Fold in another accumulator over the same pairs (e.g. a worker's shard)."""
        if not np.array_equal(self.pairs, other.pairs):
            raise ValueError("accumulators cover different candidate pairs")
        np.logaddexp(self.log_num, other.log_num, out=self.log_num)
        np.logaddexp(self.log_den, other.log_den, out=self.log_den)
        self.sample_count += other.sample_count
        return self


def accumulate(acc: PairAccumulator, p: Partition, g: Graph) -> PairAccumulator:
    """Add one partition sample's terms for every candidate pair of ``acc``."""
    if len(p.block_of) != g.node_count:
        raise InvalidPartitionError(
            f"partition covers {len(p.block_of)} nodes but graph has {g.node_count}")
    if len(acc) == 0:
        acc.sample_count += 1
        return acc
    log_num, log_den = block_term_matrices(g, p)
    b = p.block_index_array()
    bi, bj = b[acc.pairs[:, 0]], b[acc.pairs[:, 1]]
    acc.add_terms(log_num[bi, bj], log_den[bi, bj])
    return acc


@dataclass(frozen=True)
class ScoreTable:
    """Scores for unordered node pairs, with run metadata.

    ``pairs`` holds dense indices (``i < j``) into ``labels``.
    """

    labels: tuple[str, ...]
    pairs: np.ndarray
    scores: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.pairs.shape[0]

    def _lookup(self) -> dict[tuple[int, int], int]:
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = {(int(i), int(j)): k for k, (i, j) in enumerate(self.pairs)}
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    def score_index(self, i: int, j: int) -> float:
        key = (i, j) if i < j else (j, i)
        return float(self.scores[self._lookup()[key]])

    def score(self, a, b) -> float:
        """Score of the pair with original labels ``a`` and ``b`` (order irrelevant)."""
        idx = self.__dict__.get("_label_index")
        if idx is None:
            idx = {lab: k for k, lab in enumerate(self.labels)}
            object.__setattr__(self, "_label_index", idx)
        return self.score_index(idx[str(a)], idx[str(b)])

    def scores_for(self, pairs: Iterable[tuple[int, int]]) -> np.ndarray:
        lookup = self._lookup()
        idx = [lookup[(i, j) if i < j else (j, i)] for i, j in pairs]
        return self.scores[np.asarray(idx, dtype=np.int64)] if idx else np.empty(0)

    def ranking(self) -> np.ndarray:
        """Row order by descending score; equal scores keep pair order."""
        return np.argsort(-self.scores, kind="stable")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["node_a", "node_b", "score"])
        for k in self.ranking():
            i, j = self.pairs[k]
            writer.writerow([self.labels[i], self.labels[j], repr(float(self.scores[k]))])
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        order = self.ranking()
        return {
            "metadata": self.metadata,
            "scores": [
                {"node_a": self.labels[self.pairs[k, 0]], "node_b": self.labels[self.pairs[k, 1]],
                 "score": float(self.scores[k])}
                for k in order
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def finalize(acc: PairAccumulator, metadata: dict | None = None) -> ScoreTable:
    """Score every candidate pair as ``exp(logsum numerators - logsum denominators)``."""
    if acc.sample_count < 1:
        raise ValueError("accumulator holds no samples")
    scores = np.exp(acc.log_num - acc.log_den)
    scores.setflags(write=False)
    pairs = acc.pairs.copy()
    pairs.setflags(write=False)
    return ScoreTable(acc.graph.labels, pairs, scores, dict(metadata or {}))


def predict(g: Graph, threshold: float = 1.0, samples: int = 50, master_seed: int = 0,
            workers: int = 1) -> ScoreTable:
    """Full FBM pipeline: sample partitions, accumulate in sample order, finalize."""
    if g.node_count == 0:
        raise ValueError("cannot predict on an empty graph")
    acc = PairAccumulator(g)
    for p in sample_partitions(g, threshold, samples, master_seed, workers=workers):
        accumulate(acc, p, g)
    meta = {"method": "fbm", "threshold": threshold, "samples": samples, "master_seed": master_seed}
    return finalize(acc, meta)
