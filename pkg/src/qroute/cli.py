"""Command-line interface.

    qroute run   --strategy embed --graph powerlaw:20000:4 --metrics-out run.csv
    qroute sweep --parameter processors --values 1,2,4 --metrics-out sweep.csv
    qroute gen-graph --spec powerlaw:10000:4 --out graph.edges
    qroute gen-workload --graph graph.edges --workload hotspot:50x10:r2:h2 --out wl.json

Reports write the CSV named by --metrics-out plus a rendered PNG figure
alongside it (suppress with --no-figure).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import QRouteError
from .graph import load_edge_list
from .harness import (
    DEFAULT_CACHE_BYTES,
    ExperimentConfig,
    prepare_runtime,
    run_experiment,
    sweep,
    write_metrics_csv,
    write_sweep_csv,
)
from .router import Strategy
from .synth import parse_graph_spec
from .workload import generate_workload, parse_workload_spec, save_workload


def _add_experiment_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--strategy", choices=[s.value for s in Strategy], default="embed")
    parser.add_argument("--processors", type=int, default=4, metavar="P")
    parser.add_argument("--storage-servers", type=int, default=2, metavar="S")
    parser.add_argument("--load-factor", type=float, default=20.0, metavar="F")
    parser.add_argument("--alpha", type=float, default=0.5, metavar="A")
    parser.add_argument("--dimensions", type=int, default=10, metavar="D")
    parser.add_argument("--landmarks", type=int, default=96, metavar="L")
    parser.add_argument("--separation", type=int, default=3, metavar="H")
    parser.add_argument("--cache-bytes", type=int, default=DEFAULT_CACHE_BYTES, metavar="B")
    parser.add_argument("--transport", choices=["inproc", "tcp"], default="inproc")
    parser.add_argument("--seed", type=int, default=0, metavar="N")
    parser.add_argument("--graph", default="powerlaw:10000:4", metavar="PATH|SPEC")
    parser.add_argument("--workload", default="hotspot:100x10:r2:h2", metavar="PATH|SPEC")
    parser.add_argument("--metrics-out", default="metrics.csv", metavar="CSV")
    parser.add_argument("--no-steal", action="store_true", help="disable router-level query stealing")
    parser.add_argument("--no-figure", action="store_true", help="skip rendering the PNG report")
    parser.add_argument("--run-id", default=None)


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        graph=args.graph,
        workload=args.workload,
        strategy=Strategy(args.strategy),
        num_processors=args.processors,
        num_storage_servers=args.storage_servers,
        cache_bytes=args.cache_bytes,
        load_factor=args.load_factor,
        alpha=args.alpha,
        dimensions=args.dimensions,
        num_landmarks=args.landmarks,
        separation=args.separation,
        transport=args.transport,
        seed=args.seed,
        steal_enabled=not args.no_steal,
        run_id=args.run_id,
    )


def _provenance(cfg: ExperimentConfig) -> dict:
    return {"graph": cfg.graph, "workload": cfg.workload, "seed": cfg.seed, "transport": cfg.transport}


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    metrics = run_experiment(cfg)
    write_metrics_csv(args.metrics_out, cfg, metrics, provenance=_provenance(cfg))
    outputs = [args.metrics_out]
    if not args.no_figure:
        from .plots import render_run_figure

        figure_path = Path(args.metrics_out).with_suffix(".png")
        render_run_figure(metrics, figure_path, title=cfg.resolved_run_id())
        outputs.append(str(figure_path))
    print(
        f"{cfg.resolved_run_id()}: {metrics.total_queries} queries, "
        f"throughput {metrics.throughput_qps:.1f} q/s (simulated), "
        f"hit rate {metrics.hit_rate:.1%}, wall {metrics.wall_time_us / 1e6:.3f} s"
    )
    print("wrote " + ", ".join(outputs))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    values = [v for v in args.values.split(",") if v]
    points = sweep(cfg, args.parameter, values)
    write_sweep_csv(args.metrics_out, points, provenance=_provenance(cfg))
    outputs = [args.metrics_out]
    if not args.no_figure:
        from .plots import render_sweep_figure

        figure_path = Path(args.metrics_out).with_suffix(".png")
        render_sweep_figure(points, figure_path, title=f"{args.parameter} sweep")
        outputs.append(str(figure_path))
    for point in points:
        print(
            f"{args.parameter}={point.value:g}: throughput {point.metrics.throughput_qps:.1f} q/s, "
            f"hit rate {point.metrics.hit_rate:.1%}"
        )
    print("wrote " + ", ".join(outputs))
    return 0


def cmd_gen_graph(args: argparse.Namespace) -> int:
    graph = parse_graph_spec(args.spec, seed=args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# {args.spec} seed={args.seed}\n")
        for node in graph.entries:
            for dst, label in graph.entries[node].out_neighbors.items():
                fh.write(f"{node} {dst}\n" if label is None else f"{node} {dst} {label}\n")
    print(f"wrote {args.out}: {graph.node_count} nodes, {graph.edge_count} edges")
    return 0


def cmd_gen_workload(args: argparse.Namespace) -> int:
    if Path(args.graph).exists():
        graph = load_edge_list(args.graph)
    else:
        graph = parse_graph_spec(args.graph, seed=args.seed)
    spec = parse_workload_spec(args.workload)
    spec = type(spec)(**{**spec.__dict__, "seed": args.seed})
    workload = generate_workload(graph, spec)
    save_workload(workload, args.out)
    print(f"wrote {args.out}: {len(workload.queries)} queries over {len(workload.centers)} hotspots")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qroute", description="Decoupled graph-query routing testbed")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment and write metrics")
    _add_experiment_args(run_p)
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="run an experiment per parameter value")
    _add_experiment_args(sweep_p)
    sweep_p.add_argument("--parameter", required=True,
                         choices=["processors", "storage", "cache", "load_factor", "alpha", "dimensions", "landmarks"])
    sweep_p.add_argument("--values", required=True, help="comma-separated values")
    sweep_p.set_defaults(func=cmd_sweep)

    gen_g = sub.add_parser("gen-graph", help="write a synthetic graph as an edge list")
    gen_g.add_argument("--spec", required=True, help="grid:WxH | random:N:E | powerlaw:N:M")
    gen_g.add_argument("--seed", type=int, default=0)
    gen_g.add_argument("--out", required=True)
    gen_g.set_defaults(func=cmd_gen_graph)

    gen_w = sub.add_parser("gen-workload", help="generate a hotspot workload JSON")
    gen_w.add_argument("--graph", required=True, help="edge list path or graph spec")
    gen_w.add_argument("--workload", default="hotspot:100x10:r2:h2")
    gen_w.add_argument("--seed", type=int, default=0)
    gen_w.add_argument("--out", required=True)
    gen_w.set_defaults(func=cmd_gen_workload)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QRouteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
