"""Train/probe splits, AUC and the experiment drivers."""

from __future__ import annotations

import csv
import io
import json
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Iterable, Sequence

import numpy as np

from .baselines import BaselineMethod, score_baseline
from .estimator import ScoreTable, predict
from .graph import Graph, load_bundled
from .partition import COMMUNITY, partition_once
from .seeding import derive_seed

EXACT_AUC_LIMIT = 10**8
MC_AUC_SAMPLES = 10**6


class LeakError(AssertionError):
    """A probe edge reached the graph handed to a predictor."""


@dataclass(frozen=True)
class EvaluationSplit:
    original: Graph
    train_graph: Graph
    probe_edges: frozenset[tuple[int, int]]
    fraction: float
    seed: int

    def check(self) -> None:
        """Raise :class:`LeakError` if train and probe are not a clean split of the original."""
        leaked = self.probe_edges & self.train_graph.edges
        if leaked:
            raise LeakError(f"probe edges present in training graph: {sorted(leaked)[:5]}")
        if self.probe_edges | self.train_graph.edges != self.original.edges:
            raise LeakError("train and probe edges do not reassemble the original graph")


def probe_count(total: int, fraction: float) -> int:
    """``round(fraction * total)`` with halves rounded up."""
    return int(math.floor(fraction * total + 0.5))


def _check_fraction(fraction: float) -> None:
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")


def _draw_probe(pool: Sequence[tuple[int, int]], fraction: float,
                rng: random.Random) -> frozenset[tuple[int, int]]:
    k = probe_count(len(pool), fraction)
    if k == 0:
        raise ValueError(f"fraction {fraction} of {len(pool)} edges leaves an empty probe set")
    return frozenset(rng.sample(list(pool), k))


def split_edges(g: Graph, fraction: float, seed: int) -> EvaluationSplit:
    """Hold out a uniformly random ``fraction`` of the edges as the probe set."""
    _check_fraction(fraction)
    if g.edge_count < 2:
        raise ValueError("need at least two edges to split")
    probe = _draw_probe(sorted(g.edges), fraction, random.Random(seed))
    split = EvaluationSplit(g, g.without_edges(probe), probe, fraction, seed)
    split.check()
    return split


def intra_community_edges(g: Graph, threshold: float, seed: int) -> list[tuple[int, int]]:
    p = partition_once(g, threshold, seed)
    comm = [b.kind == COMMUNITY for b in p.blocks]
    return [(i, j) for i, j in sorted(g.edges)
            if p.block_of[i] == p.block_of[j] and comm[p.block_of[i]]]


def split_intra_community(g: Graph, threshold: float, fraction: float, seed: int) -> EvaluationSplit:
    """Probe edges drawn uniformly from links inside the communities of one partition.

    The partition uses ``seed`` itself; the probe draw uses ``derive_seed(seed, 1)``.
    """
    _check_fraction(fraction)
    pool = intra_community_edges(g, threshold, seed)
    if not pool:
        raise ValueError("partition has no intra-community edges to probe")
    probe = _draw_probe(pool, fraction, random.Random(derive_seed(seed, 1)))
    split = EvaluationSplit(g, g.without_edges(probe), probe, fraction, seed)
    split.check()
    return split


def auc_from_scores(pos: np.ndarray, neg: np.ndarray, seed: int = 0,
                    exact_limit: int = EXACT_AUC_LIMIT, mc_samples: int = MC_AUC_SAMPLES) -> float:
    """Mann-Whitney AUC: P(pos > neg) + 0.5 P(pos == neg).

    Exact (via sorted ranks) up to ``exact_limit`` comparisons, seeded Monte Carlo above.
    """
    pos = np.asarray(pos, dtype=np.float64)
    neg = np.asarray(neg, dtype=np.float64)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("AUC needs at least one probe and one non-existent pair")
    if pos.size * neg.size <= exact_limit:
        neg_sorted = np.sort(neg)
        below = np.searchsorted(neg_sorted, pos, side="left")
        upto = np.searchsorted(neg_sorted, pos, side="right")
        wins2 = int(np.sum(below + upto, dtype=np.int64))  # 2*wins + ties
        return wins2 / (2 * pos.size * neg.size)
    rng = np.random.default_rng(seed)
    a = pos[rng.integers(0, pos.size, mc_samples)]
    b = neg[rng.integers(0, neg.size, mc_samples)]
    return float(np.mean((a > b) + 0.5 * (a == b)))


def auc(scores: ScoreTable, probe: Iterable[tuple[int, int]], non_edges: Iterable[tuple[int, int]] | np.ndarray,
        seed: int = 0) -> float:
    """AUC of ``scores`` separating probe edges from non-existent pairs."""
    probe = list(probe)
    non_edges = [tuple(map(int, e)) for e in non_edges]
    if not probe or not non_edges:
        raise ValueError("AUC needs non-empty probe and non-edge sets")
    return auc_from_scores(scores.scores_for(probe), scores.scores_for(non_edges), seed=seed)


@dataclass
class ExperimentReport:
    method: str
    protocol: str
    threshold: float
    samples: int
    fraction: float
    repeats: int
    master_seed: int
    auc_mean: float
    auc_std: float
    aucs: list[float] = field(default_factory=list)
    split_seeds: list[int] = field(default_factory=list)
    wall_time_seconds: float = 0.0

    def to_json_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def _normalize_method(method) -> str:
    if isinstance(method, BaselineMethod):
        return method.value
    if str(method).lower() == "fbm":
        return "fbm"
    return BaselineMethod.parse(str(method)).value


def score_graph(g: Graph, method: str, threshold: float, samples: int, seed: int) -> ScoreTable:
    if method == "fbm":
        return predict(g, threshold, samples, seed)
    return score_baseline(g, method)


def _one_repeat(args) -> float:
    g, method, threshold, samples, fraction, split_seed, intra, non_edges = args
    if intra:
        split = split_intra_community(g, threshold, fraction, split_seed)
    else:
        split = split_edges(g, fraction, split_seed)
    split.check()
    scores = score_graph(split.train_graph, method, threshold, samples, derive_seed(split_seed, 2))
    return auc_from_scores(scores.scores_for(sorted(split.probe_edges)),
                           scores.scores_for(non_edges), seed=derive_seed(split_seed, 3))


def run_experiment(g: Graph, method="fbm", threshold: float = 1.0, samples: int = 50,
                   fraction: float = 0.1, repeats: int = 100, master_seed: int = 0,
                   intra: bool = False, workers: int = 1) -> ExperimentReport:
    """Repeat split -> train -> score -> AUC, ``repeats`` times.

    Repeat ``r`` uses split seed ``derive_seed(master_seed, r)``. Non-existent
    pairs are those non-adjacent in the original ``g``. With ``intra`` the probe
    set comes from :func:`split_intra_community` at ``threshold``.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    _check_fraction(fraction)
    method = _normalize_method(method)
    start = time.perf_counter()
    non_edges = [(int(i), int(j)) for i, j in g.non_edges()]
    seeds = [derive_seed(master_seed, r) for r in range(repeats)]
    jobs = [(g, method, threshold, samples, fraction, s, intra, non_edges) for s in seeds]
    if workers > 1 and repeats > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            aucs = list(pool.map(_one_repeat, jobs))
    else:
        aucs = [_one_repeat(job) for job in jobs]
    values = np.array(aucs)
    return ExperimentReport(
        method=method,
        protocol="intra_community" if intra else "uniform",
        threshold=threshold,
        samples=samples,
        fraction=fraction,
        repeats=repeats,
        master_seed=master_seed,
        auc_mean=float(values.mean()),
        auc_std=float(values.std(ddof=1)) if repeats > 1 else 0.0,
        aucs=[float(a) for a in aucs],
        split_seeds=seeds,
        wall_time_seconds=time.perf_counter() - start,
    )


@dataclass(frozen=True)
class SweepPoint:
    threshold: float
    auc_mean: float
    auc_std: float


def threshold_sweep(g: Graph, thresholds: Sequence[float], samples: int = 50, fraction: float = 0.1,
                    repeats: int = 100, master_seed: int = 0, workers: int = 1) -> list[SweepPoint]:
    """AUC against density threshold; every threshold sees the same train/probe splits."""
    for t in thresholds:
        if not 0.0 < t <= 1.0:
            raise ValueError(f"threshold must lie in (0, 1], got {t}")
    curve = []
    for t in thresholds:
        rep = run_experiment(g, "fbm", t, samples, fraction, repeats, master_seed, workers=workers)
        curve.append(SweepPoint(t, rep.auc_mean, rep.auc_std))
    return curve


def curve_csv(curve: Sequence[SweepPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["threshold", "auc_mean", "auc_std"])
    for pt in curve:
        writer.writerow([repr(pt.threshold), repr(pt.auc_mean), repr(pt.auc_std)])
    return buf.getvalue()


# -- toy networks -------------------------------------------------------------


@dataclass(frozen=True)
class MechanismCase:
    name: str
    dataset: str
    numerator_pair: tuple[str, str]
    denominator_pair: tuple[str, str]
    expected: float
    tolerance: float | None  # None: informational only


MECHANISM_CASES = (
    MechanismCase("a", "ring6", ("3", "6"), ("1", "3"), 0.5, 0.1),
    MechanismCase("b", "mechanism_b", ("1", "3"), ("3", "5"), 0.75, 0.1),
    MechanismCase("c", "mechanism_c", ("3", "5"), ("1", "3"), 1.5, None),
)


@dataclass(frozen=True)
class MechanismResult:
    case: MechanismCase
    numerator_score: float
    denominator_score: float

    @property
    def ratio(self) -> float:
        return self.numerator_score / self.denominator_score

    @property
    def asserted(self) -> bool:
        return self.case.tolerance is not None

    @property
    def passed(self) -> bool | None:
        if not self.asserted:
            return None
        return abs(self.ratio - self.case.expected) <= self.case.tolerance

    def to_json_dict(self) -> dict:
        c = self.case
        return {
            "network": c.name,
            "dataset": c.dataset,
            "pair": list(c.numerator_pair),
            "reference_pair": list(c.denominator_pair),
            "score": self.numerator_score,
            "reference_score": self.denominator_score,
            "ratio": self.ratio,
            "expected": c.expected,
            "tolerance": c.tolerance,
            "passed": self.passed,
        }


def mechanism_ratios(samples: int = 10_000, master_seed: int = 0, threshold: float = 1.0,
                     workers: int = 1) -> list[MechanismResult]:
    """Score ratios of the designated pairs on the bundled toy networks."""
    if samples < 1000:
        raise ValueError("mechanism ratios need at least 1000 samples")
    results = []
    for case in MECHANISM_CASES:
        g = load_bundled(case.dataset)
        table = predict(g, threshold, samples, master_seed, workers=workers)
        results.append(MechanismResult(case, table.score(*case.numerator_pair),
                                       table.score(*case.denominator_pair)))
    return results
