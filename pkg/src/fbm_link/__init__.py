"""Fast block probabilistic model (FBM) for missing-link prediction."""

from .baselines import BaselineMethod, score_baseline
from .estimator import (PairAccumulator, PairTerms, ScoreTable, accumulate, finalize, inter_terms,
                        intra_terms, predict)
from .evaluation import (EvaluationSplit, ExperimentReport, auc, mechanism_ratios, run_experiment,
                         split_edges, split_intra_community, threshold_sweep)
from .graph import (Graph, GraphStats, block_density, cross_density, giant_component, graph_stats,
                    load_bundled, parse_edge_list, read_edge_list)
from .partition import (Block, Partition, community_find, partition_density_matrix, partition_once,
                        random_bipartition, sample_partitions)
from .seeding import derive_seed

__version__ = "0.1.0"
