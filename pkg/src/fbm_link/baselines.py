"""Local similarity indices used as reference predictors."""

from __future__ import annotations

import enum
import math

import numpy as np

from .estimator import ScoreTable
from .graph import Graph


class BaselineMethod(str, enum.Enum):
    COMMON_NEIGHBORS = "common_neighbors"
    JACCARD = "jaccard"
    ADAMIC_ADAR = "adamic_adar"
    RESOURCE_ALLOCATION = "resource_allocation"

    @classmethod
    def parse(cls, name: str) -> "BaselineMethod":
        key = name.strip().lower().replace("-", "_")
        return _ALIASES.get(key) or cls(key)


_ALIASES = {
    "cn": BaselineMethod.COMMON_NEIGHBORS,
    "jc": BaselineMethod.JACCARD,
    "aa": BaselineMethod.ADAMIC_ADAR,
    "ra": BaselineMethod.RESOURCE_ALLOCATION,
}


def _pair_score(g: Graph, i: int, j: int, method: BaselineMethod) -> float:
    ni, nj = g.adjacency[i], g.adjacency[j]
    common = ni & nj
    if method is BaselineMethod.COMMON_NEIGHBORS:
        return float(len(common))
    if method is BaselineMethod.JACCARD:
        union = len(ni | nj)
        return len(common) / union if union else 0.0
    if method is BaselineMethod.ADAMIC_ADAR:
        total = 0.0
        for z in sorted(common):
            k = g.degree(z)
            assert k >= 2, "a common neighbour has degree >= 2"
            total += 1.0 / math.log(k)
        return total
    return sum(1.0 / g.degree(z) for z in sorted(common))


def score_baseline(g: Graph, method: BaselineMethod | str = BaselineMethod.COMMON_NEIGHBORS) -> ScoreTable:
    """Score every non-adjacent pair of ``g`` with a neighbourhood similarity index."""
    if g.node_count == 0:
        raise ValueError("cannot score an empty graph")
    if isinstance(method, str):
        method = BaselineMethod.parse(method)
    pairs = g.non_edges()
    scores = np.fromiter((_pair_score(g, int(i), int(j), method) for i, j in pairs),
                         dtype=np.float64, count=pairs.shape[0])
    scores.setflags(write=False)
    pairs.setflags(write=False)
    return ScoreTable(g.labels, pairs, scores, {"method": method.value})
