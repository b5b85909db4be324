"""Command-line interface.

Subcommands: gen, mine, symmetry, represent, eval-exact, eval-rpc, report,
run. Exit codes: 0 success, 2 validation error, 3 numerical error, 4 I/O
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import shlex
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .benchgen import (
    DEFAULT_PAIR_CAP,
    GenParams,
    build_dataset,
    read_dataset,
    verify_instances,
    write_dataset,
    write_instance_permutations,
)
from .errors import (
    ExactSearchRefused,
    LinkexprError,
    NumericalError,
    ValidationError,
)
from .graphs import load_graph_file
from .models import ModelConfig, ModelKind, evaluate_instances
from .pipeline import (
    PrecisionReport,
    exact_verdicts_csv,
    render_table,
    rpc_verdicts_csv,
    run_pipeline,
)
from .rpc import read_embeddings, rpc_precision
from .symmetry import (
    DEFAULT_GROUP_CAP,
    DEFAULT_NODE_CAP,
    orbits,
    symmetry_exact,
    symmetry_wl,
    wl_refine,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _default_threads() -> int:
    env = os.environ.get("LINKEXPR_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _model_config(args) -> ModelConfig:
    return ModelConfig(
        kind=ModelKind(args.model),
        m=args.m,
        l=args.l,
        beta=args.beta,
        h_hops=args.h,
        drnl_variant=args.drnl_variant,
    )


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, choices=[k.value for k in ModelKind])
    p.add_argument("--m", type=int, default=3, help="link-neighborhood radius")
    p.add_argument("--l", type=int, default=3, help="encoder depth (WL rounds)")
    p.add_argument("--beta", type=float, default=0.5, help="hop decay (neognn)")
    p.add_argument("--h", type=int, default=None, help="subgraph radius (seal)")
    p.add_argument(
        "--drnl-variant", choices=["min", "pair"], default="min",
        help="distance-label flavor for seal",
    )


def cmd_gen(args) -> int:
    params = GenParams(
        seed=args.seed,
        target_graph_count=args.count,
        n_min=args.nmin,
        n_max=args.nmax,
        max_attempts_per_graph=args.max_attempts,
    )
    ds = build_dataset(
        params,
        split_ratios=tuple(args.split),
        pair_cap=args.pair_cap,
        threads=args.threads,
    )
    write_dataset(ds, args.out)
    print(
        f"wrote {args.out}: {len(ds.graphs)} graphs, {len(ds.instances)} instances "
        f"({ds.provenance['attempts_used']} attempts, "
        f"{ds.provenance['refused_graphs']} refused)"
    )
    if args.perms_out:
        write_instance_permutations(ds, args.q, args.perms_out)
        print(f"wrote {args.perms_out}: {args.q} copy permutations per instance")
    return EXIT_OK


def cmd_mine(args) -> int:
    ds = read_dataset(args.input)
    verify_instances(ds)
    print(
        f"{args.input}: {len(ds.instances)} instances across {len(ds.graphs)} graphs "
        f"re-verified (WL-matched, non-automorphic)"
    )
    return EXIT_OK


def cmd_symmetry(args) -> int:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["graph_id", "n", "edges", "wl_classes", "orbit_count",
         "r_hat", "r_exact", "exact_feasible"]
    )
    for path in args.paths:
        g = load_graph_file(path)
        coloring = wl_refine(g)
        r_hat = symmetry_wl(g)
        try:
            part = orbits(g, node_cap=args.node_cap, group_cap=args.group_cap)
            orbit_count: object = part.orbit_count
            r_exact: object = f"{symmetry_exact(g, node_cap=args.node_cap, group_cap=args.group_cap):.6f}"
            feasible = "true"
        except ExactSearchRefused:
            orbit_count = ""
            r_exact = ""
            feasible = "false"
        writer.writerow(
            [Path(path).stem, g.n, g.edge_count, coloring.class_count,
             orbit_count, f"{r_hat:.6f}", r_exact, feasible]
        )
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_represent(args) -> int:
    from .pipeline import reps_to_json

    ds = read_dataset(args.input)
    cfg = _model_config(args)
    verdicts = evaluate_instances(ds, cfg, split="all")
    text = reps_to_json(cfg, verdicts)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(f"wrote {args.out}: {len(verdicts)} instance representations")
    return EXIT_OK


def cmd_eval_exact(args) -> int:
    ds = read_dataset(args.input)
    cfg = _model_config(args)
    verdicts = evaluate_instances(ds, cfg, split=args.split)
    precision = sum(v.distinguished for v in verdicts) / len(verdicts)
    text = exact_verdicts_csv(verdicts)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"precision={precision!r}")
    return EXIT_OK


def cmd_eval_rpc(args) -> int:
    if not Path(args.embeddings).exists():
        raise FileNotFoundError(f"eval-rpc: input not found: {args.embeddings}")
    pairs = read_embeddings(args.embeddings)
    ridge = args.ridge
    precision, verdicts = rpc_precision(
        [b for _, b in pairs], alpha=args.alpha, ridge=ridge
    )
    text = rpc_verdicts_csv([i for i, _ in pairs], verdicts)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    degenerate = sum(1 for v in verdicts if v.status != "ok")
    print(f"precision={precision!r} instances={len(verdicts)} degenerate={degenerate}")
    return EXIT_OK


def cmd_report(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        report = PrecisionReport.from_csv(fh.read())
    sys.stdout.write(render_table(report))
    return EXIT_OK


def cmd_run(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from None
    if args.seed is not None:
        doc["seed"] = args.seed
    command = "linkexpr " + " ".join(shlex.quote(a) for a in args.argv_tail)
    manifest = run_pipeline(
        doc,
        args.out_dir,
        threads=args.threads,
        command=command,
        config_path=args.config,
    )
    print(f"run complete: {len(manifest['outputs'])} artifacts in {args.out_dir}")
    return EXIT_OK


def _ridge_arg(value: str):
    if value == "auto":
        return "auto"
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"ridge must be a number or 'auto', got {value!r}"
        ) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linkexpr",
        description="Link-expressiveness benchmark toolkit",
    )
    parser.add_argument("--version", action="version", version=f"linkexpr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--threads", type=int, default=_default_threads(),
        help="worker count (default: LINKEXPR_THREADS or 1)",
    )

    p = sub.add_parser("gen", parents=[common], help="generate a benchmark dataset")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, required=True, help="graphs to retain")
    p.add_argument("--nmin", type=int, default=5)
    p.add_argument("--nmax", type=int, default=17)
    p.add_argument("--pair-cap", type=int, default=DEFAULT_PAIR_CAP)
    p.add_argument("--max-attempts", type=int, default=50,
                   help="attempts allowed per retained graph")
    p.add_argument("--split", type=float, nargs=3, default=[0.8, 0.1, 0.1],
                   metavar=("TRAIN", "VAL", "TEST"))
    p.add_argument("--out", required=True)
    p.add_argument("--q", type=int, default=32,
                   help="permuted copies per instance (with --perms-out)")
    p.add_argument("--perms-out", default=None,
                   help="also write per-instance copy permutations (JSONL)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("mine", parents=[common],
                       help="re-verify the mined instances of a dataset")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("symmetry", parents=[common],
                       help="symmetry profile of edge-list files (CSV)")
    p.add_argument("paths", nargs="+", help="edge-list files, one graph each")
    p.add_argument("--out", default=None)
    p.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    p.add_argument("--group-cap", type=int, default=DEFAULT_GROUP_CAP)
    p.set_defaults(func=cmd_symmetry)

    p = sub.add_parser("represent", parents=[common],
                       help="canonical link representations for a dataset")
    p.add_argument("--in", dest="input", required=True)
    _add_model_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_represent)

    p = sub.add_parser("eval-exact", parents=[common],
                       help="exact distinguishability precision")
    p.add_argument("--in", dest="input", required=True)
    _add_model_flags(p)
    p.add_argument("--split", choices=["train", "validation", "test", "all"],
                   default="all")
    p.add_argument("--out", default=None, help="per-instance verdict CSV")
    p.set_defaults(func=cmd_eval_exact)

    p = sub.add_parser("eval-rpc", parents=[common],
                       help="reliability-checked paired comparison on embeddings")
    p.add_argument("--embeddings", required=True, help="JSONL interchange file")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--ridge", type=_ridge_arg, nargs="?", const="auto", default=None,
                   help="add eps*I to covariances; bare flag picks eps automatically")
    p.add_argument("--out", default=None, help="verdict CSV")
    p.set_defaults(func=cmd_eval_rpc)

    p = sub.add_parser("report", parents=[common],
                       help="render a report CSV as a text table")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run", parents=[common], help="full pipeline from a config")
    p.add_argument("--config", required=True, help="flat JSON config document")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed")
    p.set_defaults(func=cmd_run)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv_tail = list(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except LinkexprError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
