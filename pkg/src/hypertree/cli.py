"""Command-line interface.

Commands: gen-tree, closure, train, eval, diagnose, plot. Exit codes:
0 success, 1 input error, 2 validation error, 3 training error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import graph as graphmod
from .errors import HypertreeError, InputError, ValidationError
from .evaluation import classify_illness, metrics_json, metrics_report
from .plotting import render_svg
from .training import (
    EmbeddingTable,
    TrainConfig,
    load_checkpoint,
    save_checkpoint,
    train,
    write_trace,
)

_BOOL_VALUES = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _parse_config_file(path: str) -> dict:
    """Flat ``key = value`` text; keys match TrainConfig field names."""
    if not os.path.exists(path):
        raise InputError(f"config file not found: {path}")
    types = {f.name: f.type for f in dataclasses.fields(TrainConfig)}
    casts = {"int": int, "float": float, "bool": None, "str": str}
    out: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in types:
                raise InputError(f"{path}:{lineno}: unknown config key {key!r}")
            tname = str(types[key])
            try:
                if "bool" in tname:
                    out[key] = _BOOL_VALUES[value.lower()]
                elif "int" in tname:
                    out[key] = int(value)
                elif "float" in tname:
                    out[key] = float(value)
                else:
                    out[key] = value
            except (KeyError, ValueError):
                raise InputError(f"{path}:{lineno}: bad value {value!r} for {key!r}") from None
    return out


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_atomic_json(payload: dict, path: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def _load_embedding_for_graph(g, checkpoint_path: str) -> EmbeddingTable:
    labels, points = load_checkpoint(checkpoint_path)
    by_label = {lab: k for k, lab in enumerate(labels)}
    rows = np.empty((len(g), points.shape[1]))
    for node, label in enumerate(g.labels):
        if label not in by_label:
            raise InputError(f"checkpoint is missing node {label!r}")
        rows[node] = points[by_label[label]]
    return EmbeddingTable(rows)


def _tree_for_diagnostics(g, backbone_path: str | None):
    """Tree used for ancestry queries: the graph itself, or a backbone file."""
    if backbone_path is None:
        try:
            graphmod.validate_tree(g)
        except ValidationError as exc:
            raise ValidationError(
                f"{exc}; for non-tree edge sets pass --backbone-tree"
            ) from None
        return g
    tree = graphmod.load_edge_list(backbone_path)
    graphmod.validate_tree(tree)
    if set(tree.labels) != set(g.labels):
        raise InputError("backbone tree and edge list disagree on the node set")
    return tree


# ---------------------------------------------------------------------------
# Commands


def cmd_gen_tree(args) -> int:
    g = graphmod.generate_balanced_tree(args.branching, args.levels)
    graphmod.write_edge_list(g, None, args.out)
    print(f"wrote {len(g.edges)} edges ({len(g)} nodes) to {args.out}")
    return 0


def cmd_closure(args) -> int:
    g = graphmod.load_edge_list(args.edges)
    closure = graphmod.transitive_closure(g)
    graphmod.write_edge_list(closure, g.labels, args.out)
    print(f"wrote {len(closure)} closure edges to {args.out}")
    return 0


def _resolve_config(args) -> TrainConfig:
    values = _parse_config_file(args.config) if args.config else {}
    env_seed = os.environ.get("HYPERTREE_SEED")
    if env_seed is not None:
        try:
            values["seed"] = int(env_seed)
        except ValueError:
            raise InputError(f"HYPERTREE_SEED must be an integer, got {env_seed!r}") from None
    overrides = {
        "dim": args.dim,
        "lr": args.lr,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "m": args.negatives,
        "eta_tc": args.eta_tc,
        "n_tc": args.n_tc,
        "burn_in_epochs": args.burn_in_epochs,
        "burn_in_lr_divisor": args.burn_in_lr_divisor,
        "dilation_k": args.dilation_k,
        "dilation_start_epoch": args.dilation_start,
        "dilation_cooldown": args.dilation_cooldown,
        "init_radius": args.init_radius,
        "eps": args.eps,
        "seed": args.seed,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if args.no_dilation:
        values["dilation_enabled"] = False
    cfg = TrainConfig(**{**TrainConfig().to_dict(), **values})
    cfg.validate()
    return cfg


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    g = graphmod.load_edge_list(args.edges)
    os.makedirs(args.out_dir, exist_ok=True)
    checkpoint = os.path.join(args.out_dir, "checkpoint.tsv")
    trace_path = os.path.join(args.out_dir, "trace.csv")
    manifest_path = os.path.join(args.out_dir, "manifest.json")
    manifest = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "inputs": {
            "edges": {"path": os.path.abspath(args.edges), "sha256": _sha256(args.edges)},
            "config_file": (
                {"path": os.path.abspath(args.config), "sha256": _sha256(args.config)}
                if args.config
                else None
            ),
        },
        "outputs": {"checkpoint": checkpoint, "trace": trace_path},
        "started_at": datetime.now(timezone.utc).isoformat(),
    }
    _write_atomic_json(manifest, manifest_path)

    theta, trace = train(g, cfg)
    save_checkpoint(theta, g.labels, checkpoint, cfg=cfg, epoch=cfg.epochs)
    write_trace(trace, trace_path)
    print(f"trained {cfg.epochs} epochs; wrote {checkpoint}")
    return 0


def cmd_eval(args) -> int:
    g = graphmod.load_edge_list(args.edges)
    theta = _load_embedding_for_graph(g, args.checkpoint)
    tree = _tree_for_diagnostics(g, args.backbone_tree)
    doc = metrics_json(metrics_report(theta, g), classify_illness(theta, tree))
    text = json.dumps(doc, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_diagnose(args) -> int:
    g = graphmod.load_edge_list(args.edges)
    theta = _load_embedding_for_graph(g, args.checkpoint)
    tree = _tree_for_diagnostics(g, args.backbone_tree)
    report = classify_illness(theta, tree)
    doc = {
        "illness": {
            "capacity": report.capacity,
            "intra": report.intra,
            "inter": report.inter,
        }
    }
    text = json.dumps(doc, indent=2)
    if args.out_json:
        with open(args.out_json, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.out_csv:
        with open(args.out_csv, "w", encoding="utf-8") as fh:
            fh.write("source,true_target,inferred_target,category\n")
            for c in report.cases:
                fh.write(
                    f"{tree.labels[c.source]},{tree.labels[c.true_target]},"
                    f"{tree.labels[c.inferred_target]},{c.category}\n"
                )
    return 0


def cmd_plot(args) -> int:
    g = graphmod.load_edge_list(args.edges)
    graphmod.validate_tree(g)
    theta = _load_embedding_for_graph(g, args.checkpoint)
    render_svg(theta, g, args.out)
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypertree",
        description="Poincare-ball embeddings of trees with capacity-aware training",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-tree", help="write a balanced-tree edge list")
    p.add_argument("--branching", type=int, required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_tree)

    p = sub.add_parser("closure", help="emit transitive-closure edges")
    p.add_argument("--edges", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("train", help="train embeddings")
    p.add_argument("--edges", required=True)
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--negatives", type=int, help="negative samples per edge (m)")
    p.add_argument("--eta-tc", type=float)
    p.add_argument("--n-tc", type=int)
    p.add_argument("--burn-in-epochs", type=int)
    p.add_argument("--burn-in-lr-divisor", type=float)
    p.add_argument("--no-dilation", action="store_true")
    p.add_argument("--dilation-k", type=float)
    p.add_argument("--dilation-start", type=int)
    p.add_argument("--dilation-cooldown", type=int)
    p.add_argument("--init-radius", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="metrics JSON for a checkpoint")
    p.add_argument("--edges", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--backbone-tree", help="tree edge list for ancestry queries")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("diagnose", help="illness report for a checkpoint")
    p.add_argument("--edges", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--backbone-tree", help="tree edge list for ancestry queries")
    p.add_argument("--out-json")
    p.add_argument("--out-csv")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("plot", help="SVG picture of a 2-d checkpoint")
    p.add_argument("--edges", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HypertreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
