"""Command-line interface: ``fbm-link {partition,predict,evaluate,mechanism,stats}``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .evaluation import (LeakError, curve_csv, mechanism_ratios, run_experiment,
                         threshold_sweep)
from .estimator import predict
from .baselines import BaselineMethod, score_baseline
from .graph import EdgeListError, Graph, giant_component, graph_stats, load_bundled, read_edge_list
from .partition import density_matrix_csv, partition_density_matrix, partition_once

DEFAULT_SEED = 2013
DEFAULT_SWEEP = tuple(round(0.1 * k, 1) for k in range(1, 11))
METHODS = ("fbm", "cn", "common_neighbors", "jaccard", "adamic_adar", "resource_allocation", "aa", "ra")


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str | None
    threshold: float = 1.0
    samples: int | None = None
    fraction: float = 0.1
    repeats: int = 100
    seed: int = DEFAULT_SEED
    method: str = "fbm"
    output: str | None = None
    format: str | None = None
    workers: int = 1
    sweep: tuple[float, ...] | None = None
    intra: bool = False

    def samples_or(self, default: int) -> int:
        return default if self.samples is None else self.samples


# -- argument types; argparse prefixes their messages with the flag name -------

def _threshold(text: str) -> float:
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {text}")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _threshold_list(text: str) -> tuple[float, ...]:
    return tuple(_threshold(t) for t in text.split(",") if t.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", help="edge-list file, or the name of a bundled dataset "
                        "(karate, ring6, mechanism_b, mechanism_c, demo_communities)")
    common.add_argument("--threshold", type=_threshold, default=1.0, help="community density threshold (default 1.0)")
    common.add_argument("--samples", type=_positive_int, default=None,
                        help="partition samples (default 50; 10000 for mechanism)")
    common.add_argument("--fraction", type=_fraction, default=0.1, help="probe fraction (default 0.1)")
    common.add_argument("--repeats", type=_positive_int, default=100, help="evaluation repeats (default 100)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"master seed (default {DEFAULT_SEED})")
    common.add_argument("--method", choices=METHODS, default="fbm")
    common.add_argument("--workers", type=_positive_int, default=1, help="worker processes; output is unaffected")
    common.add_argument("--output", "-o", help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    parser = argparse.ArgumentParser(prog="fbm-link", description="Fast block model link prediction")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("partition", parents=[common], help="one seeded partition and its density matrix")
    sub.add_parser("predict", parents=[common], help="score all non-adjacent pairs")
    ev = sub.add_parser("evaluate", parents=[common], help="AUC over repeated train/probe splits")
    ev.add_argument("--sweep", nargs="?", const=DEFAULT_SWEEP, type=_threshold_list, default=None,
                    metavar="T1,T2,...", help="sweep thresholds (default 0.1,...,1.0)")
    ev.add_argument("--intra", action="store_true", help="probe only intra-community links")
    sub.add_parser("mechanism", parents=[common], help="score ratios on the toy networks")
    sub.add_parser("stats", parents=[common], help="topological statistics")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command, input=ns.input, threshold=ns.threshold, samples=ns.samples,
        fraction=ns.fraction, repeats=ns.repeats, seed=ns.seed, method=ns.method,
        output=ns.output, format=ns.format, workers=ns.workers,
        sweep=getattr(ns, "sweep", None), intra=getattr(ns, "intra", False),
    )


def load_input(source: str | None) -> Graph:
    if source is None:
        raise SystemExit("error: --input is required for this command")
    if os.path.exists(source):
        return read_edge_list(source)
    try:
        return load_bundled(source)
    except FileNotFoundError:
        raise SystemExit(f"error: {source}: no such file or bundled dataset") from None


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    with open(output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _sidecar(output: str, suffix: str) -> Path:
    p = Path(output)
    return p.with_name(p.stem + suffix)


def cmd_partition(cfg: RunConfig) -> int:
    g = load_input(cfg.input)
    p = partition_once(g, cfg.threshold, cfg.seed)
    p.validate(g)
    matrix = partition_density_matrix(g, p)
    matrix_csv = density_matrix_csv(matrix)
    if cfg.format == "csv":
        _emit(matrix_csv, cfg.output)
        return 0
    doc = p.to_json_dict(g)
    doc["density_matrix"] = matrix.tolist()
    for k, block in enumerate(doc["blocks"]):
        block["density"] = float(matrix[k, k])
    _emit(json.dumps(doc, indent=2) + "\n", cfg.output)
    if cfg.output is not None:
        _sidecar(cfg.output, ".density.csv").write_text(matrix_csv, encoding="utf-8")
    return 0


def cmd_predict(cfg: RunConfig) -> int:
    g = load_input(cfg.input)
    if cfg.method == "fbm":
        table = predict(g, cfg.threshold, cfg.samples_or(50), cfg.seed, workers=cfg.workers)
    else:
        table = score_baseline(g, BaselineMethod.parse(cfg.method))
    if cfg.format == "json":
        _emit(table.to_json() + "\n", cfg.output)
        return 0
    _emit(table.to_csv(), cfg.output)
    if cfg.output is not None:
        meta = dict(table.metadata, input=cfg.input, pairs=len(table))
        _sidecar(cfg.output, ".meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    g = giant_component(load_input(cfg.input))
    samples = cfg.samples_or(50)
    if cfg.sweep is not None:
        curve = threshold_sweep(g, cfg.sweep, samples, cfg.fraction, cfg.repeats, cfg.seed,
                                workers=cfg.workers)
        if cfg.format == "csv":
            _emit(curve_csv(curve), cfg.output)
        else:
            doc = {"samples": samples, "fraction": cfg.fraction, "repeats": cfg.repeats,
                   "master_seed": cfg.seed,
                   "curve": [{"threshold": pt.threshold, "auc_mean": pt.auc_mean, "auc_std": pt.auc_std}
                             for pt in curve]}
            _emit(json.dumps(doc, indent=2) + "\n", cfg.output)
        return 0
    report = run_experiment(g, cfg.method, cfg.threshold, samples, cfg.fraction, cfg.repeats,
                            cfg.seed, intra=cfg.intra, workers=cfg.workers)
    if cfg.format == "csv":
        lines = ["repeat,split_seed,auc"] + [f"{r},{s},{a!r}" for r, (s, a)
                                             in enumerate(zip(report.split_seeds, report.aucs))]
        _emit("\n".join(lines) + "\n", cfg.output)
    else:
        _emit(report.to_json() + "\n", cfg.output)
    return 0


def cmd_mechanism(cfg: RunConfig) -> int:
    results = mechanism_ratios(cfg.samples_or(10_000), cfg.seed, cfg.threshold, workers=cfg.workers)
    if cfg.format == "json":
        _emit(json.dumps([r.to_json_dict() for r in results], indent=2) + "\n", cfg.output)
        return 0
    lines = []
    for r in results:
        c = r.case
        a, b = c.numerator_pair, c.denominator_pair
        if r.asserted:
            flag = "PASS" if r.passed else "FAIL"
            target = f"expected {c.expected} +/- {c.tolerance}"
        else:
            flag, target = "INFO", f"reference {c.expected}, not asserted"
        lines.append(f"({c.name}) score({a[0]},{a[1]})/score({b[0]},{b[1]}) = {r.ratio:.4f}  "
                     f"[{target}] {flag}")
    _emit("\n".join(lines) + "\n", cfg.output)
    return 0


def cmd_stats(cfg: RunConfig) -> int:
    g = giant_component(load_input(cfg.input))
    _emit(graph_stats(g).to_json() + "\n", cfg.output)
    return 0


COMMANDS = {
    "partition": cmd_partition,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "mechanism": cmd_mechanism,
    "stats": cmd_stats,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    cfg = config_from_args(parser.parse_args(argv))
    try:
        return COMMANDS[cfg.command](cfg)
    except EdgeListError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LeakError as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
