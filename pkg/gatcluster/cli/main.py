"""
Command-line interface: pretrain, fit, evaluate, export-embedding, sweep and describe.
"""

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from concurrent.futures.process import BrokenProcessPool
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..config.default_configs import DEFAULT_SEEDS, SWEEP_EMBED_DIMS, get_dataset_profile_by_name
from ..config.manager import ConfigManager
from ..core.artifacts import (
    write_embedding, write_json, write_run_artifacts, write_run_record,
)
from ..core.checkpoint import load_checkpoint
from ..core.exceptions import ConfigurationException, GraphClusterException
from ..core.graph_io import describe_graph, load_graph, read_labels
from ..core.metrics import evaluate_clustering, format_report, format_table
from ..core.proximity import proximity
from ..core.trainer import ClusteringTrainer, summarize_runs
from ..models.graph_models import Graph, ProximityMatrix
from ..models.training_models import RunRecord, TrainConfig

logger = logging.getLogger(__name__)


def parse_seeds(text: str) -> List[int]:
    """Parse '3', '0,2,5' or '0-4' into a seed list."""
    seeds: List[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                start, stop = (int(value) for value in part.split("-", 1))
                seeds.extend(range(start, stop + 1))
            elif part:
                seeds.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed list '{text}'")
    if not seeds or any(seed < 0 for seed in seeds):
        raise argparse.ArgumentTypeError(f"invalid seed list '{text}'")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gatcluster",
        description="Attributed graph clustering with a graph attention autoencoder",
    )
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging verbosity")
    subparsers = parser.add_subparsers(dest="verb", required=True)

    training = argparse.ArgumentParser(add_help=False)
    training.add_argument("--manifest", required=True, help="Dataset manifest (JSON or YAML)")
    training.add_argument("--config", help="TrainConfig file (JSON or YAML)")
    training.add_argument("--out", required=True, help="Output directory")
    training.add_argument("--seeds", type=parse_seeds, help="Seeds, e.g. '0-4' or '0,3'")
    training.add_argument("--jobs", type=int, default=1, help="Parallel worker processes")
    training.add_argument("--gamma", type=float, help="Clustering coefficient")
    training.add_argument("--t-order", type=int, help="Proximity order t")
    training.add_argument("--embed-dim", type=int, help="Embedding width")
    training.add_argument("--k", type=int, help="Cluster count")

    subparsers.add_parser("pretrain", parents=[training], help="Pretrain the autoencoder only")
    fit_parser = subparsers.add_parser("fit", parents=[training], help="Pretrain, then cluster")
    fit_parser.add_argument("--checkpoint", help="Resume a single run from this checkpoint")
    sweep_parser = subparsers.add_parser("sweep", parents=[training], help="Vary the embedding width")
    sweep_parser.add_argument("--widths", type=parse_seeds, help="Embedding widths to try")

    evaluate_parser = subparsers.add_parser("evaluate", help="Score predicted labels against truth")
    evaluate_parser.add_argument("--pred", required=True, help="Predicted labels, one per line")
    evaluate_parser.add_argument("--truth", help="True labels, one per line")
    evaluate_parser.add_argument("--manifest", help="Take the true labels from this manifest")
    evaluate_parser.add_argument("--out", help="Write the report as JSON to this file")

    export_parser = subparsers.add_parser("export-embedding", help="Encode a graph from a checkpoint")
    export_parser.add_argument("--manifest", required=True, help="Dataset manifest")
    export_parser.add_argument("--checkpoint", required=True, help="Checkpoint file")
    export_parser.add_argument("--out", required=True, help="Embedding file to write")

    describe_parser = subparsers.add_parser("describe", help="Print the dataset profile")
    describe_parser.add_argument("--manifest", required=True, help="Dataset manifest")
    return parser


def load_config(args: argparse.Namespace) -> TrainConfig:
    """TrainConfig from --config with the command-line flags applied on top."""
    overrides = {
        "gamma": args.gamma,
        "t_order": args.t_order,
        "embed_dim": args.embed_dim,
        "k": args.k,
    }
    return ConfigManager(args.config).load_config(overrides)


def checkpoint_config(path: str) -> TrainConfig:
    """The TrainConfig a checkpoint was written under."""
    return RunRecord.model_validate(load_checkpoint(path).extra["record"]).config


def resume_config(args: argparse.Namespace) -> TrainConfig:
    """
    Config for `fit --checkpoint`: the checkpoint's own, so the resumed run sees
    the same proximity order and normalization. Flags that disagree with it are
    rejected.
    """
    config = checkpoint_config(args.checkpoint)
    conflicts: List[str] = []
    if args.config or any(value is not None for value in (args.gamma, args.t_order, args.embed_dim, args.k)):
        requested = load_config(args)
        conflicts = [name for name in TrainConfig.model_fields
                     if name != "seed" and getattr(requested, name) != getattr(config, name)]
    if args.seeds and args.seeds != [config.seed]:
        conflicts.append("seed")
    if conflicts:
        raise ConfigurationException(
            f"Checkpoint '{args.checkpoint}' was written with a different {', '.join(conflicts)}; "
            "drop the conflicting options to resume it"
        )
    return config


def load_dataset(manifest_path: str, config: Optional[TrainConfig] = None) -> Tuple[Graph, ProximityMatrix]:
    manifest = ConfigManager().load_manifest(manifest_path)
    if config is not None and config.normalization is not None:
        manifest = manifest.model_copy(update={"normalization": config.normalization})
    graph = load_graph(manifest)
    prox = proximity(graph, config.t_order if config is not None else 2)
    return graph, prox


def _train_seed(verb: str, graph: Graph, prox: ProximityMatrix, config: TrainConfig,
                out_dir: str) -> Dict[str, Any]:
    """One independent run; module level so it can execute in a worker process."""
    trainer = ClusteringTrainer(graph, prox, config)
    if verb == "pretrain":
        output = trainer.pretrain()
        directory = Path(out_dir)
        write_run_record(trainer.record, directory / "run.json")
        ConfigManager().save_config(config, directory / "config.json")
        write_embedding(output.Z, directory / "embedding.tsv")
        trainer.save_checkpoint(directory / "checkpoint.bin")
    else:
        trainer.fit()
        write_run_artifacts(trainer, out_dir)
    return trainer.record.model_dump(mode="json")


def run_seeds(verb: str, graph: Graph, prox: ProximityMatrix, base: TrainConfig,
              seeds: Sequence[int], out_dir: Path, jobs: int = 1) -> List[RunRecord]:
    """Run every seed into its own directory; a single seed writes into out_dir itself."""
    seed_jobs = []
    for seed in seeds:
        config = base.model_copy(update={"seed": seed})
        target = out_dir if len(seeds) == 1 else out_dir / f"seed_{seed}"
        seed_jobs.append((verb, graph, prox, config, str(target)))

    if jobs > 1 and len(seed_jobs) > 1:
        logger.info("Running %d seeds on %d worker processes", len(seed_jobs), jobs)
        try:
            with ProcessPoolExecutor(max_workers=jobs) as executor:
                futures = [executor.submit(_train_seed, *job) for job in seed_jobs]
                results = [future.result() for future in futures]
        except BrokenProcessPool as e:
            raise GraphClusterException(f"A training worker process died: {e}", module="trainer") from e
    else:
        results = [_train_seed(*job) for job in seed_jobs]
    return [RunRecord.model_validate(result) for result in results]


def _summary_rows(summary: Dict[str, Any], label: str) -> List[Dict[str, Any]]:
    rows = []
    for key in ("final", "two_step"):
        if key in summary:
            row: Dict[str, Any] = {"run": label, "result": key}
            for name, stats in summary[key].items():
                row[name] = f"{stats['mean']:.4f} +/- {stats['std']:.4f}"
            rows.append(row)
    return rows


def cmd_train(args: argparse.Namespace) -> int:
    config = resume_config(args) if getattr(args, "checkpoint", None) else load_config(args)
    graph, prox = load_dataset(args.manifest, config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if getattr(args, "checkpoint", None):
        trainer = ClusteringTrainer.resume(graph, prox, args.checkpoint)
        trainer.fit()
        write_run_artifacts(trainer, out_dir)
        records = [trainer.record]
    else:
        seeds = args.seeds or [config.seed]
        records = run_seeds(args.verb, graph, prox, config, seeds, out_dir, args.jobs)

    summary = summarize_runs(records)
    write_json(summary, out_dir / "summary.json")
    rows = _summary_rows(summary, graph.name or "graph")
    if rows:
        print(format_table(rows, ["run", "result", "acc", "nmi", "fscore", "ari"]))
    else:
        for record in records:
            losses = record.pretrain_losses or record.total_losses
            print(f"seed {record.seed}: final loss {losses[-1]:.6f}" if losses else f"seed {record.seed}: done")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    base = load_config(args)
    graph, prox = load_dataset(args.manifest, base)
    out_dir = Path(args.out)
    seeds = args.seeds or DEFAULT_SEEDS
    widths = args.widths or SWEEP_EMBED_DIMS

    rows: List[Dict[str, Any]] = []
    sweep: Dict[str, Any] = {}
    for width in widths:
        config = base.model_copy(update={"embed_dim": width})
        records = run_seeds("fit", graph, prox, config, seeds, out_dir / f"width_{width}", args.jobs)
        summary = summarize_runs(records)
        sweep[str(width)] = summary
        row: Dict[str, Any] = {"embed_dim": width}
        for name in ("acc", "nmi"):
            stats = summary.get("final", {}).get(name)
            row[name] = f"{stats['mean']:.4f} +/- {stats['std']:.4f}" if stats else "n/a"
        rows.append(row)
        logger.info("width %d done: %s", width, row)

    write_json(sweep, out_dir / "sweep.json")
    print(format_table(rows, ["embed_dim", "acc", "nmi"]))
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    pred = read_labels(args.pred)
    if args.truth:
        truth = read_labels(args.truth)
    elif args.manifest:
        manifest = ConfigManager().load_manifest(args.manifest)
        if not manifest.label_file:
            raise ConfigurationException(f"Manifest '{args.manifest}' has no label_file")
        truth = read_labels(manifest.label_file)
    else:
        raise ConfigurationException("evaluate needs --truth or --manifest")

    report = evaluate_clustering(pred, truth)
    print(format_report(report))
    if args.out:
        write_json(report.model_dump(mode="json"), args.out)
    return 0


def cmd_export_embedding(args: argparse.Namespace) -> int:
    config = checkpoint_config(args.checkpoint)
    graph, prox = load_dataset(args.manifest, config)
    trainer = ClusteringTrainer.resume(graph, prox, args.checkpoint)
    path = write_embedding(trainer.embed().Z, args.out)
    logger.info("Wrote embedding: %s", path)
    return 0


def cmd_describe(args: argparse.Namespace) -> int:
    manifest = ConfigManager().load_manifest(args.manifest)
    profile = describe_graph(load_graph(manifest))
    rows = [dict(profile.model_dump(), source="manifest")]
    known = get_dataset_profile_by_name(profile.name)
    if known is not None:
        rows.append(dict(known.model_dump(), source="reference"))
    print(format_table(rows, ["source", "name", "nodes", "features", "clusters", "links"]))
    return 0


COMMANDS = {
    "pretrain": cmd_train,
    "fit": cmd_train,
    "sweep": cmd_sweep,
    "evaluate": cmd_evaluate,
    "export-embedding": cmd_export_embedding,
    "describe": cmd_describe,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments and run one command; returns the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.verb](args)
    except GraphClusterException as e:
        logger.error("%s failed: %s", args.verb, e)
        print(f"[{e.module}] {e}", file=sys.stderr)
        return 1


def main() -> None:
    """Console script entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
