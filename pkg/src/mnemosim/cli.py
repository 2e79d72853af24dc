"""Batch front-end: ``mnemosim <command> [flags]``.

Every command writes its outputs plus a ``manifest.json`` that echoes the
effective configuration, seeds, input digests and output files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import agentsim, calibrate, graphalgo, metrics, netcore, reach

CONDITIONS = ("weak-first", "strong-first")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("MNEMOSIM_THREADS", "1")))
    except ValueError:
        return 1


def _digest(path: str | Path) -> str:
    p = Path(path)
    h = hashlib.sha256()
    files = sorted(f for f in p.rglob("*") if f.is_file()) if p.is_dir() else [p]
    for f in files:
        h.update(f.read_bytes())
    return h.hexdigest()


class Run:
    """Collects what a command did and writes the manifest."""

    def __init__(self, command: str, args: argparse.Namespace, out_dir: Path):
        self.command = command
        self.out_dir = out_dir
        self.config = {k: v for k, v in vars(args).items() if k != "func"}
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.seeds: dict = {}
        self.extra: dict = {}
        self.t0 = time.perf_counter()
        out_dir.mkdir(parents=True, exist_ok=True)

    def input(self, path) -> None:
        self.inputs[str(path)] = _digest(path)

    def output(self, path: Path) -> Path:
        self.outputs.append(str(path.relative_to(self.out_dir)))
        return path

    def finish(self) -> None:
        manifest = {
            "command": self.command,
            "config": self.config,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "outputs": self.outputs,
            **self.extra,
            "duration_s": time.perf_counter() - self.t0,
        }
        (self.out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")


def _fail_on_diagnostics(diags, path) -> None:
    if diags:
        lines = [f"{path}: {d.kind} (round {d.round}): {d.detail}" for d in diags]
        raise ValueError("invalid network\n" + "\n".join(lines))


# -- commands


def cmd_gen_network(args) -> int:
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tn, partition = netcore.build_experiment_network(args.condition)
    _fail_on_diagnostics(netcore.validate(tn, experiment=True), out)
    netcore.write_network(tn, out)
    sidecar = partition_path(out)
    sidecar.write_text(json.dumps(netcore.partition_to_dict(partition)) + "\n")
    print(f"wrote {out} and {sidecar}")
    return 0


def partition_path(network_path: Path) -> Path:
    return network_path.with_suffix(".partition.json")


def cmd_simulate(args) -> int:
    out_dir = Path(args.out_dir)
    base = json.loads(Path(args.config).read_text()) if args.config else {}
    if args.seed is not None:
        base["seed"] = args.seed
    config = agentsim.SimConfig.from_dict(base)
    conditions = CONDITIONS if args.condition == "both" else (netcore.Condition.parse(args.condition).value,)

    run = Run("simulate", args, out_dir)
    if args.config:
        run.input(args.config)
    run.seeds = {"seed": config.seed, "reps": list(range(args.reps))}
    run.extra["effective_config"] = config.to_dict()

    rows = []
    for cond in conditions:
        for rep in range(args.reps):
            res = agentsim.run_experiment(cond, config, rep)
            _write_bundle(res, out_dir / "runs" / cond / f"rep_{rep:03d}", config, run)
            rows.append(agentsim.run_metrics(res))

    import pandas as pd

    per_seed = pd.DataFrame(rows)
    summary = agentsim.summarize(per_seed)
    per_seed.to_csv(run.output(out_dir / "per_seed.csv"), index=False)
    summary.to_csv(run.output(out_dir / "summary.csv"), index=False)

    idx_rows = []
    for cond, grp in per_seed.groupby("condition", sort=False):
        for t in range(1, 5):
            idx_rows.append((t, grp[f"overlap_r{t}"].mean(), grp[f"diversity_r{t}"].mean(), cond))
    pd.DataFrame(idx_rows, columns=["round", "overlap", "diversity", "condition"]).to_csv(
        run.output(out_dir / "indices.csv"), index=False
    )
    run.finish()
    print(summary[["condition", "n_reps", "convergence_increase_mean"]].to_string(index=False))
    return 0


def _write_bundle(res: agentsim.SimResult, bundle: Path, config: agentsim.SimConfig, run: Run) -> None:
    bundle.mkdir(parents=True, exist_ok=True)
    metrics.write_recall_csv(res.pre, bundle / "pre.csv")
    metrics.write_recall_csv(res.post, bundle / "post.csv")
    n_items = config.n_items
    lines = ["round,src,dst," + ",".join(f"item_{i}" for i in range(n_items))]
    for rec in res.records:
        lines.append(f"{rec.round},{rec.pair[0]},{rec.pair[1]}," + ",".join(str(int(b)) for b in rec.mentioned))
    (bundle / "records.csv").write_text("\n".join(lines) + "\n")
    manifest = {"condition": res.condition.value, "seed": res.seed, "rep": res.rep, "config": config.to_dict()}
    (bundle / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    for name in ("pre.csv", "post.csv", "records.csv", "manifest.json"):
        run.output(bundle / name)


def cmd_reach(args) -> int:
    out_dir = Path(args.out_dir)
    tn = netcore.read_network(args.network)
    _fail_on_diagnostics(netcore.validate(tn), args.network)
    params = reach.ModelParams(args.lam, args.gamma)
    run = Run("reach", args, out_dir)
    run.input(args.network)
    rm = reach.mnemonic_reachability(tn, params, literal_gamma=args.literal_gamma)
    reach.write_reachability_csv(rm, run.output(out_dir / "reach.csv"))
    if args.partition:
        run.input(args.partition)
        partition = netcore.partition_from_dict(json.loads(Path(args.partition).read_text()))
        agg = reach.aggregate_reachability(rm, partition)
        strict = reach.aggregate_reachability(rm, partition, exclude_interacting=tn)
        agg["neighboring_noninteracting"] = strict["neighboring"]
        lines = ["category,value"] + [f"{k},{'' if v is None else repr(v)}" for k, v in agg.items()]
        (out_dir / "aggregates.csv").write_text("\n".join(lines) + "\n")
        run.output(out_dir / "aggregates.csv")
        for k, v in agg.items():
            print(f"{k:28s} {v}")
    run.finish()
    return 0


def _load_target(path: Path, mode: str) -> np.ndarray:
    if path.is_dir():
        pre = metrics.read_recall_csv(path / "pre.csv")
        post = metrics.read_recall_csv(path / "post.csv")
        return calibrate.similarity_target(pre, post, mode)
    return np.loadtxt(path, delimiter=",", ndmin=2)


def cmd_calibrate(args) -> int:
    if len(args.networks) != len(args.targets):
        raise ValueError(f"{len(args.networks)} networks but {len(args.targets)} targets")
    out_dir = Path(args.out_dir)
    run = Run("calibrate", args, out_dir)
    tns, targets = [], []
    for npath, tpath in zip(args.networks, args.targets):
        run.input(npath)
        run.input(tpath)
        tn = netcore.read_network(npath)
        _fail_on_diagnostics(netcore.validate(tn), npath)
        tns.append(tn)
        targets.append(_load_target(Path(tpath), args.target_mode))
    grid = calibrate.CalibrationGrid.with_step(args.grid_step)
    result = calibrate.grid_search(
        tns, targets, grid, symmetrize=not args.no_symmetrize,
        literal_gamma=args.literal_gamma, workers=_threads(),
    )
    calibrate.write_surface_csv(result, run.output(out_dir / "surface.csv"))
    best = {
        "lambda": result.best.lam,
        "gamma": result.best.gamma,
        "correlation": result.best_correlation,
        "targets_used": result.targets_used,
    }
    (out_dir / "best.json").write_text(json.dumps(best, indent=2) + "\n")
    run.output(out_dir / "best.json")
    run.finish()
    print(f"best lambda={result.best.lam} gamma={result.best.gamma} r={result.best_correlation:.6f}")
    return 0


def cmd_gen_planted(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    g, blocks = graphalgo.planted_partition_graph(sizes, args.p_in, args.p_out, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"% planted partition sizes={args.sizes} p_in={args.p_in} p_out={args.p_out} seed={args.seed}"]
    lines += [f"{u} {v}" for u, v in g.edges]
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out}: {g.n} nodes, {g.m} edges")
    return 0


def run_pipeline(g: graphalgo.StaticGraph, orders, k: int, params: reach.ModelParams, seed: int | None):
    """Rank, schedule, cluster and score; returns (rows, ranking, partition, schedules)."""
    ranking = graphalgo.edge_betweenness(g)
    partition = graphalgo.spectral_clusters(g, k)
    rows, schedules = [], {}
    for order in orders:
        tn = graphalgo.quartile_schedule(ranking, order, seed=seed)
        schedules[order] = tn
        agg = reach.aggregate_reachability(reach.mnemonic_reachability(tn, params), partition)
        rows.extend((order, cat, val) for cat, val in agg.items())
    return rows, ranking, partition, schedules


def cmd_pipeline(args) -> int:
    out_dir = Path(args.out_dir)
    g = graphalgo.read_edge_list(args.edges, min_contacts=args.min_contacts)
    run = Run("pipeline", args, out_dir)
    run.input(args.edges)
    run.seeds = {"order_seed": args.seed}
    orders = ["desc", "asc", "random"] if args.order == "all" else [args.order]
    params = reach.ModelParams(args.lam, args.gamma)
    rows, ranking, partition, _ = run_pipeline(g, orders, args.k, params, args.seed)

    lines = ["order,category,value"] + [f"{o},{c},{'' if v is None else repr(v)}" for o, c, v in rows]
    (out_dir / "predictions.csv").write_text("\n".join(lines) + "\n")
    run.output(out_dir / "predictions.csv")
    label = (lambda i: g.labels[i]) if g.labels else (lambda i: i)
    elines = ["src,dst,betweenness"] + [f"{label(u)},{label(v)},{s!r}" for (u, v), s in zip(ranking.edges, ranking.scores)]
    (out_dir / "ranking.csv").write_text("\n".join(elines) + "\n")
    run.output(out_dir / "ranking.csv")
    (out_dir / "partition.json").write_text(json.dumps(netcore.partition_to_dict(partition)) + "\n")
    run.output(out_dir / "partition.json")
    run.extra["graph"] = {"nodes": g.n, "edges": g.m, "round_sizes": graphalgo.quartile_blocks(g.m)}
    run.finish()
    for o, c, v in rows:
        print(f"{o:7s} {c:12s} {v}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mnemosim", description="Collective-memory temporal network toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-network", help="write the 16-node experiment schedule")
    p.add_argument("--condition", choices=CONDITIONS, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_network)

    p = sub.add_parser("simulate", help="agent-based replications of the experiment")
    p.add_argument("--config", help="JSON SimConfig; flags override it")
    p.add_argument("--condition", choices=(*CONDITIONS, "both"), default="both")
    p.add_argument("--reps", type=int, default=6)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reach", help="mnemonic reachability of a temporal network")
    p.add_argument("--network", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--partition")
    p.add_argument("--literal-gamma", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("calibrate", help="grid search of (lambda, gamma)")
    p.add_argument("--networks", nargs="+", required=True)
    p.add_argument("--targets", nargs="+", required=True, help="matrix CSVs or simulate bundle dirs")
    p.add_argument("--grid-step", type=float, default=0.1)
    p.add_argument("--target-mode", choices=("post", "post-minus-pre"), default="post-minus-pre")
    p.add_argument("--no-symmetrize", action="store_true")
    p.add_argument("--literal-gamma", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("gen-planted", help="write a planted-partition edge list")
    p.add_argument("--sizes", default="100,100,100,100")
    p.add_argument("--p-in", type=float, default=0.05)
    p.add_argument("--p-out", type=float, default=0.005)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_planted)

    p = sub.add_parser("pipeline", help="real-network prediction pipeline")
    p.add_argument("--edges", required=True)
    p.add_argument("--order", choices=("desc", "asc", "random", "all"), default="all")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-contacts", type=int, default=1, help="drop pairs with fewer repeated contacts")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_pipeline)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
