"""Pipeline orchestration: config schema, reports, manifests.

A run executes gen -> mine -> represent -> eval-exact (-> eval-rpc when an
embeddings file is configured) and writes a precision report as CSV plus a
rendered text table. Every artifact except the manifest (which carries a
timestamp) is a pure function of (seed, config, version), so reruns are byte
identical.
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import jsonschema

from . import __version__
from .benchgen import GenParams, build_dataset, dataset_to_json, verify_instances
from .errors import ValidationError
from .models import (
    InstanceVerdict,
    ModelConfig,
    ModelKind,
    evaluate_instances,
)
from .rpc import RpcVerdict, read_embeddings, rpc_precision

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "linkexpr run configuration (flat key-value document)",
    "type": "object",
    "properties": {
        "seed": {"type": "integer"},
        "count": {"type": "integer", "minimum": 1},
        "models": {
            "type": "array",
            "items": {"enum": [k.value for k in ModelKind]},
            "minItems": 1,
        },
        "n_min": {"type": "integer", "minimum": 2},
        "n_max": {"type": "integer", "minimum": 2},
        "max_attempts_per_graph": {"type": "integer", "minimum": 1},
        "pair_cap": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 0},
        "l": {"type": "integer", "minimum": 0},
        "beta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "h_hops": {"type": ["integer", "null"], "minimum": 1},
        "drnl_variant": {"enum": ["min", "pair"]},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "ridge": {"type": ["number", "string", "null"]},
        "split_train": {"type": "number", "exclusiveMinimum": 0},
        "split_validation": {"type": "number", "exclusiveMinimum": 0},
        "split_test": {"type": "number", "exclusiveMinimum": 0},
        "eval_split": {"enum": ["train", "validation", "test", "all"]},
        "embeddings": {"type": ["string", "null"]},
    },
    "required": ["seed", "count", "models"],
    "additionalProperties": False,
}

CONFIG_DEFAULTS = {
    "n_min": 5,
    "n_max": 17,
    "max_attempts_per_graph": 50,
    "pair_cap": 32,
    "m": 3,
    "l": 3,
    "beta": 0.5,
    "h_hops": None,
    "drnl_variant": "min",
    "alpha": 0.05,
    "ridge": None,
    "split_train": 0.8,
    "split_validation": 0.1,
    "split_test": 0.1,
    "eval_split": "all",
    "embeddings": None,
}


def validate_config(doc: dict) -> dict:
    """Schema-check a config document and fill in the published defaults."""
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"config rejected by schema: {exc.message}") from None
    merged = dict(CONFIG_DEFAULTS)
    merged.update(doc)
    if merged["n_min"] > merged["n_max"]:
        raise ValidationError("config requires n_min <= n_max")
    return merged


@dataclass
class ReportRow:
    """One per-model line of the precision report."""

    model: str
    m: Optional[int]
    l: Optional[int]
    instances: int
    precision: float
    truncated_mining: bool
    degenerate: int


@dataclass
class PrecisionReport:
    rows: List[ReportRow]

    CSV_HEADER = ("model", "m", "l", "instances", "precision",
                  "truncated_mining", "degenerate")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_HEADER)
        for r in self.rows:
            writer.writerow(
                [
                    r.model,
                    "" if r.m is None else r.m,
                    "" if r.l is None else r.l,
                    r.instances,
                    repr(r.precision),
                    "true" if r.truncated_mining else "false",
                    r.degenerate,
                ]
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PrecisionReport":
        reader = csv.reader(io.StringIO(text))
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise ValidationError("empty report CSV") from None
        if header != cls.CSV_HEADER:
            raise ValidationError(f"unexpected report header {header!r}")
        rows = []
        for rec in reader:
            if not rec:
                continue
            model, m, l, instances, precision, truncated, degenerate = rec
            rows.append(
                ReportRow(
                    model=model,
                    m=None if m == "" else int(m),
                    l=None if l == "" else int(l),
                    instances=int(instances),
                    precision=float(precision),
                    truncated_mining=(truncated == "true"),
                    degenerate=int(degenerate),
                )
            )
        return cls(rows=rows)


def render_table(report: PrecisionReport) -> str:
    """Fixed-width text table; precision shown to 3 decimals."""
    header = ["model", "m", "l", "instances", "precision", "flags"]
    body: List[List[str]] = []
    for r in report.rows:
        flags = []
        if r.truncated_mining:
            flags.append("truncated-mining")
        if r.degenerate:
            flags.append(f"degenerate={r.degenerate}")
        body.append(
            [
                r.model,
                "-" if r.m is None else str(r.m),
                "-" if r.l is None else str(r.l),
                str(r.instances),
                f"{r.precision:.3f}",
                ";".join(flags) if flags else "-",
            ]
        )
    widths = [len(h) for h in header]
    for row in body:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip(),
    ]
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def reps_to_json(cfg: ModelConfig, verdicts: Sequence[InstanceVerdict]) -> str:
    doc = {
        "version": "linkexpr-reps-1",
        "model": {
            "kind": cfg.kind.value,
            "m": cfg.m,
            "l": cfg.l,
            "beta": cfg.beta,
            "h_hops": cfg.h_hops,
            "drnl_variant": cfg.drnl_variant,
        },
        "reps": [
            {
                "instance_id": v.instance_id,
                "graph_id": v.graph_id,
                "pair_a": list(v.pair_a),
                "pair_b": list(v.pair_b),
                "digest_a": v.digest_a,
                "digest_b": v.digest_b,
                "distinguished": v.distinguished,
            }
            for v in verdicts
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def exact_verdicts_csv(verdicts: Sequence[InstanceVerdict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["instance_id", "graph_id", "pair_a", "pair_b",
         "digest_a", "digest_b", "distinguished"]
    )
    for v in verdicts:
        writer.writerow(
            [
                v.instance_id,
                v.graph_id,
                f"{v.pair_a[0]}-{v.pair_a[1]}",
                f"{v.pair_b[0]}-{v.pair_b[1]}",
                v.digest_a,
                v.digest_b,
                "true" if v.distinguished else "false",
            ]
        )
    return buf.getvalue()


def rpc_verdicts_csv(ids: Sequence[str], verdicts: Sequence[RpcVerdict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["instance_id", "t2_test", "t2_reliability", "threshold",
         "reliable", "distinguishable", "status"]
    )
    fmt = lambda x: "" if x is None else f"{x:.12g}"
    for instance_id, v in zip(ids, verdicts):
        writer.writerow(
            [
                instance_id,
                fmt(v.t2_test),
                fmt(v.t2_reliability),
                fmt(v.threshold),
                "true" if v.reliable else "false",
                "true" if v.distinguishable else "false",
                v.status,
            ]
        )
    return buf.getvalue()


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def run_pipeline(
    config_doc: dict,
    out_dir,
    threads: int = 1,
    command: str = "",
    config_path=None,
) -> dict:
    """Execute the full pipeline; returns the manifest (also written to disk).

    Any stage error aborts the run; the manifest is still written, marked
    FAILED with the stage name, and the error re-raised for the caller.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = validate_config(config_doc)
    inputs: Dict[str, str] = {}
    if config_path is not None:
        inputs["config"] = sha256_file(config_path)
    outputs: List[Tuple[str, str]] = []
    manifest_path = out / "manifest.json"
    stage = "init"

    def emit(name: str, text: str) -> Path:
        path = out / name
        _write_text(path, text)
        outputs.append((name, sha256_file(path)))
        return path

    def write_manifest(status: str, error: Optional[str] = None) -> dict:
        doc = {
            "command": command,
            "seed": cfg["seed"],
            "version": __version__,
            "inputs": inputs,
            "outputs": [{"path": p, "sha256": d} for p, d in outputs],
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "status": status,
        }
        if error is not None:
            doc["failed_stage"] = stage
            doc["error"] = error
        _write_text(manifest_path, json.dumps(doc, sort_keys=True, indent=1) + "\n")
        return doc

    try:
        stage = "gen"
        params = GenParams(
            seed=cfg["seed"],
            target_graph_count=cfg["count"],
            n_min=cfg["n_min"],
            n_max=cfg["n_max"],
            max_attempts_per_graph=cfg["max_attempts_per_graph"],
        )
        ds = build_dataset(
            params,
            split_ratios=(
                cfg["split_train"], cfg["split_validation"], cfg["split_test"]
            ),
            pair_cap=cfg["pair_cap"],
            threads=threads,
        )
        emit("dataset.json", dataset_to_json(ds))

        stage = "mine"
        verify_instances(ds)

        stage = "represent"
        eval_ids = set(ds.graph_ids_for_split(cfg["eval_split"]))
        rows: List[ReportRow] = []
        for kind in cfg["models"]:
            model_cfg = ModelConfig(
                kind=ModelKind(kind),
                m=cfg["m"],
                l=cfg["l"],
                beta=cfg["beta"],
                h_hops=cfg["h_hops"],
                drnl_variant=cfg["drnl_variant"],
            )
            verdicts = evaluate_instances(ds, model_cfg, split="all")
            emit(f"reps_{kind}.json", reps_to_json(model_cfg, verdicts))
            in_split = [v for v in verdicts if v.graph_id in eval_ids]
            if not in_split:
                raise ValidationError(
                    f"eval split {cfg['eval_split']!r} contains no instances"
                )
            emit(f"verdicts_{kind}.csv", exact_verdicts_csv(in_split))
            rows.append(
                ReportRow(
                    model=kind,
                    m=model_cfg.m,
                    l=model_cfg.l,
                    instances=len(in_split),
                    precision=sum(v.distinguished for v in in_split) / len(in_split),
                    truncated_mining=ds.any_truncated,
                    degenerate=0,
                )
            )

        if cfg["embeddings"] is not None:
            stage = "eval-rpc"
            emb_path = Path(cfg["embeddings"])
            if not emb_path.exists():
                raise ValidationError(f"eval-rpc: input not found: {emb_path}")
            inputs["embeddings"] = sha256_file(emb_path)
            pairs = read_embeddings(emb_path)
            precision, verdicts_rpc = rpc_precision(
                [b for _, b in pairs], alpha=cfg["alpha"], ridge=cfg["ridge"]
            )
            emit(
                "verdicts_rpc.csv",
                rpc_verdicts_csv([i for i, _ in pairs], verdicts_rpc),
            )
            rows.append(
                ReportRow(
                    model="rpc",
                    m=None,
                    l=None,
                    instances=len(verdicts_rpc),
                    precision=precision,
                    truncated_mining=False,
                    degenerate=sum(1 for v in verdicts_rpc if v.status != "ok"),
                )
            )

        stage = "report"
        report = PrecisionReport(rows=rows)
        emit("report.csv", report.to_csv())
        emit("report.txt", render_table(report))
    except Exception as exc:
        write_manifest("FAILED", error=f"{stage}: {exc}")
        raise
    return write_manifest("OK")
