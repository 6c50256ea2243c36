"""Command line surface: enumerate, measure, train, analyze.

Each subcommand turns library calls into files under an output root so a
sweep can be driven, interrupted, resumed, and aggregated without touching
Python. All outputs are CSV or JSON (plus P3 pixmaps for table images),
written atomically, and byte-identical on rerun with the same inputs.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .carry import class_label, classify, enumerate_carry_tables, table_by_id, SingleValue
from .errors import ConfigError, ResourceLimitError
from .experiments import (
    EvalRow,
    GeneralizationRow,
    RunRecord,
    TrainConfig,
    aggregate_analysis,
    fit_for_run,
    train_run,
)
from .measures import DEFAULT_MAX_DEPTH, measure_report
from .rnn import kernel_backend

# carried value -> pixel color; 0 stays white
_PALETTE = (
    (255, 255, 255),
    (31, 119, 180),
    (255, 127, 14),
    (44, 160, 44),
    (214, 39, 40),
    (148, 103, 189),
)
_CELL_PIXELS = 16


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _nan_to_none(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _none_to_nan(value):
    return math.nan if value is None else value


# ------------------------------------------------------------------ enumerate

def _table_csv(table) -> str:
    grid = table.as_array()
    return "\n".join(",".join(str(int(v)) for v in row) for row in grid) + "\n"


def _table_ppm(table) -> str:
    grid = table.as_array()
    b = grid.shape[0]
    side = b * _CELL_PIXELS
    lines = ["P3", f"{side} {side}", "255"]
    for n in range(b):
        row = []
        for m in range(b):
            row.extend([" ".join(map(str, _PALETTE[grid[n, m]]))] * _CELL_PIXELS)
        lines.extend(" ".join(row) for _ in range(_CELL_PIXELS))
    return "\n".join(lines) + "\n"


def cmd_enumerate(args) -> int:
    if not 2 <= args.base <= 6:
        raise ConfigError("base must be between 2 and 6")
    out = Path(args.out or ".") / "tables" / str(args.base)
    tables = enumerate_carry_tables(args.base)
    index_rows = []
    for table in tables:
        cls = classify(table)
        unit = cls.unit if isinstance(cls, SingleValue) else ""
        index_rows.append((table.table_id, class_label(cls), unit))
        _atomic_write(out / f"{table.table_id}.csv", _table_csv(table))
        _atomic_write(out / f"{table.table_id}.ppm", _table_ppm(table))
    _atomic_write(out / "index.csv",
                  _csv_text(("id", "class", "single_value_unit"), index_rows))
    print(f"{len(tables)} carry tables for base {args.base} -> {out}")
    return 0


# -------------------------------------------------------------------- measure

_MEASURE_COLUMNS = (
    "base", "carry_id", "class", "depth", "border_count", "box_dim",
    "box_dim_min_ordering", "min_ordering_unit", "carry_frequency",
    "assoc_fraction", "assoc_mode", "assoc_samples", "overall_carry_frequency",
)


def cmd_measure(args) -> int:
    tables = enumerate_carry_tables(args.base)
    if args.carries is None:
        chosen = list(tables)
    else:
        chosen = [table_by_id(args.base, i) for i in args.carries]
    out = Path(args.out or ".") / "measures.csv"
    rows = []
    failure = None
    for table in chosen:
        label = class_label(classify(table))
        try:
            report = measure_report(table, max_depth=args.depth)
        except ResourceLimitError as exc:
            failure = f"carry {table.table_id}: {exc}"
            break
        for d in report.per_depth:
            rows.append((report.base, report.table_id, label, d.depth,
                         d.border_count, d.box_dim, d.box_dim_min_ordering,
                         d.min_ordering_unit, d.carry_frequency,
                         d.assoc.fraction, d.assoc.mode, d.assoc.samples,
                         report.overall_carry_frequency))
    _atomic_write(out, _csv_text(_MEASURE_COLUMNS, rows))
    print(f"{len(rows)} measure rows -> {out}")
    if failure is not None:
        print(f"stopped early: {failure}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------- train

_CONFIG_FIELDS = ("train_digits", "epochs", "batch_size", "lr",
                  "eval_interval", "eval_lengths", "eval_sample")


@dataclass(frozen=True)
class SweepManifest:
    """Cross product of sweep axes; expands to one TrainConfig per cell."""

    bases: tuple[int, ...]
    carry_ids: tuple[int, ...] | None = None  # None: every table of each base
    embeddings: tuple[str, ...] = ("symbolic",)
    embedding_units: tuple[int, ...] = (1,)
    cells: tuple[str, ...] = ("gru",)
    seeds: tuple[int, ...] = (0,)
    train_digits: int = 3
    epochs: int = 2500
    batch_size: int = 32
    lr: float = 0.05
    eval_interval: int = 10
    eval_lengths: tuple[int, ...] = (3, 6)
    eval_sample: int = 1000
    out: str = "sweep"
    threads: int = 1


def manifest_from_json(path: Path) -> SweepManifest:
    raw = json.loads(path.read_text())
    known = {f.name for f in dataclasses.fields(SweepManifest)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown manifest fields: {sorted(unknown)}")
    if "bases" not in raw:
        raise ConfigError("manifest must list bases")
    for name in ("bases", "carry_ids", "embeddings", "embedding_units",
                 "cells", "seeds", "eval_lengths"):
        if name in raw and raw[name] is not None:
            raw[name] = tuple(raw[name])
    return SweepManifest(**raw)


def expand_manifest(manifest: SweepManifest) -> list[TrainConfig]:
    shared = {name: getattr(manifest, name) for name in _CONFIG_FIELDS}
    configs = []
    for base in manifest.bases:
        if manifest.carry_ids is None:
            ids = [t.table_id for t in enumerate_carry_tables(base)]
        else:
            ids = list(manifest.carry_ids)
        for carry_id in ids:
            for embedding in manifest.embeddings:
                for unit in manifest.embedding_units:
                    for cell in manifest.cells:
                        for seed in manifest.seeds:
                            configs.append(TrainConfig(
                                base=base, carry_id=carry_id,
                                embedding=embedding, embedding_unit=unit,
                                cell=cell, seed=seed, **shared))
    if len(set(configs)) != len(configs):
        raise ConfigError("manifest expands to duplicate cells")
    dirs = {(c.base, c.carry_id, c.seed) for c in configs}
    if len(dirs) != len(configs):
        raise ConfigError("cells collide in the run-directory layout; "
                          "vary embeddings or cells in separate sweep roots")
    return configs


def _cell_dir(root: Path, config: TrainConfig) -> Path:
    return root / str(config.base) / str(config.carry_id) / str(config.seed)


def _write_run_files(cell: Path, record: RunRecord) -> None:
    config = record.config
    run_doc = {
        "config": dataclasses.asdict(config),
        "run_seed": record.run_seed,
        "status": record.status,
        "abort": record.abort,
        "wall_seconds": record.wall_seconds,
        "max_test_acc": {str(k): v for k, v in sorted(record.max_test_acc.items())},
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "kernel_backend": kernel_backend(),
            "machine": platform.machine(),
        },
    }
    _atomic_write(cell / "run.json", _json_text(run_doc))

    header = ["epoch", "train_loss", "train_acc"]
    header += [f"test_acc_{k}" for k in config.eval_lengths]
    curve_rows = [[row.epoch, row.train_loss, row.train_acc]
                  + [row.test_acc[k] for k in config.eval_lengths]
                  for row in record.rows]
    _atomic_write(cell / "curve.csv", _csv_text(header, curve_rows))

    if record.generalization:
        gen_rows = [(g.k, g.exact, g.per_digit) for g in record.generalization]
        _atomic_write(cell / "generalization.csv",
                      _csv_text(("k", "exact_acc", "digit_acc"), gen_rows))

    if record.status == "ok":
        eval_length = max(config.eval_lengths)
        fit = fit_for_run(record, eval_length)
        doc = {name: _nan_to_none(getattr(fit, name))
               for name in ("a", "g", "c0", "r_squared", "status")}
        doc["eval_length"] = eval_length
        _atomic_write(cell / "fit.json", _json_text(doc))


def _train_cell(config: TrainConfig, cell: str) -> tuple[str, float, str]:
    record = train_run(config)
    _write_run_files(Path(cell), record)
    message = "" if record.abort is None else record.abort["message"]
    return record.status, record.wall_seconds, message


def _single_config(args) -> TrainConfig:
    if args.base is None or args.carry_id is None:
        raise ConfigError("train needs --base and --carry-id, or --config")
    return TrainConfig(
        base=args.base, carry_id=args.carry_id, embedding=args.embedding,
        embedding_unit=args.embedding_unit, cell=args.cell,
        train_digits=args.train_digits, epochs=args.epochs,
        batch_size=args.batch_size, lr=args.lr,
        eval_interval=args.eval_interval, eval_lengths=args.eval_lengths,
        eval_sample=args.eval_sample, seed=args.seed if args.seed is not None else 0)


def cmd_train(args) -> int:
    threads = args.threads or 1
    if args.config is not None:
        manifest = manifest_from_json(Path(args.config))
        if args.out is not None:
            manifest = dataclasses.replace(manifest, out=args.out)
        if args.seed is not None:
            manifest = dataclasses.replace(manifest, seeds=(args.seed,))
        if args.threads is not None:
            manifest = dataclasses.replace(manifest, threads=args.threads)
        root = Path(manifest.out)
        configs = expand_manifest(manifest)
        threads = manifest.threads
    else:
        root = Path(args.out or "sweep")
        configs = [_single_config(args)]

    pending = []
    skipped = 0
    for config in configs:
        cell = _cell_dir(root, config)
        if (cell / "fit.json").exists():
            skipped += 1
        else:
            pending.append((config, cell))
    print(f"{len(configs)} cells: {skipped} complete, {len(pending)} to run")

    failed = 0
    if threads > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = pool.map(_train_cell,
                               [c for c, _ in pending],
                               [str(d) for _, d in pending])
            outcomes = list(results)
    else:
        outcomes = [_train_cell(config, str(cell)) for config, cell in pending]
    for (config, _), (status, wall, message) in zip(pending, outcomes):
        tag = f"base={config.base} carry={config.carry_id} seed={config.seed}"
        if status == "ok":
            print(f"  {tag} ok ({wall:.1f}s)")
        else:
            failed += 1
            print(f"  {tag} {status}: {message}", file=sys.stderr)
    return 1 if failed else 0


# -------------------------------------------------------------------- analyze

def _load_run(cell: Path) -> RunRecord:
    doc = json.loads((cell / "run.json").read_text())
    raw = dict(doc["config"])
    raw["eval_lengths"] = tuple(raw["eval_lengths"])
    config = TrainConfig(**raw)

    rows = []
    with (cell / "curve.csv").open(newline="") as fh:
        for rec in csv.DictReader(fh):
            test = {k: float(rec[f"test_acc_{k}"]) for k in config.eval_lengths}
            rows.append(EvalRow(int(rec["epoch"]), float(rec["train_loss"]),
                                float(rec["train_acc"]), test))
    gen = []
    gen_path = cell / "generalization.csv"
    if gen_path.exists():
        with gen_path.open(newline="") as fh:
            for rec in csv.DictReader(fh):
                gen.append(GeneralizationRow(int(rec["k"]),
                                             float(rec["exact_acc"]),
                                             float(rec["digit_acc"])))
    return RunRecord(
        config=config, run_seed=doc["run_seed"], status=doc["status"],
        rows=tuple(rows), generalization=tuple(gen),
        max_test_acc={int(k): v for k, v in doc["max_test_acc"].items()},
        abort=doc["abort"], wall_seconds=doc["wall_seconds"])


def cmd_analyze(args) -> int:
    root = Path(args.root)
    cells = sorted(p.parent for p in root.glob("*/*/*/run.json")
                   if (p.parent / "fit.json").exists())
    runs = [_load_run(cell) for cell in cells]
    carries = {(r.config.base, r.config.carry_id) for r in runs
               if r.status == "ok"}
    if len(carries) < 3:
        print(f"need completed runs for at least 3 distinct carry functions, "
              f"found {len(carries)} under {root}", file=sys.stderr)
        return 2

    reports = [measure_report(table_by_id(base, carry_id))
               for base, carry_id in sorted(carries)]
    summary = aggregate_analysis(runs, reports)

    out = Path(args.out) if args.out else root
    agg_fields = [f.name for f in dataclasses.fields(summary.carries[0])]
    agg_rows = [[getattr(c, name) for name in agg_fields]
                for c in summary.carries]
    _atomic_write(out / "summary.csv", _csv_text(agg_fields, agg_rows))
    corr_rows = [(c.metric, c.measure, c.n, c.rho, c.p)
                 for c in summary.correlations]
    _atomic_write(out / "correlations.csv",
                  _csv_text(("metric", "measure", "n", "rho", "p"), corr_rows))

    print(f"{len(runs)} runs over {len(summary.carries)} carries at eval "
          f"length {summary.eval_length}; {summary.excluded_fits} fits excluded")
    for c in summary.correlations:
        if c.metric == "max_test_acc":
            print(f"  rho(max_test_acc, {c.measure}) = {c.rho:+.3f} (n={c.n}, "
                  f"p={c.p:.4f})")
    for (base, label), mean in sorted(summary.class_means.items()):
        print(f"  base {base} {label}: mean max test acc {mean:.3f}")
    return 0


# ----------------------------------------------------------------------- main

def _lengths(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(","))


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output root directory")
    common.add_argument("--seed", type=int, help="run seed")
    common.add_argument("--threads", type=int, help="worker pool size")
    common.add_argument("--config", help="JSON sweep manifest")

    parser = argparse.ArgumentParser(
        prog="carrylab",
        description="Enumerate carry functions, measure their structure, and "
                    "train recurrent networks on the additions they define.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", parents=[common],
                       help="write every carry table for a base")
    p.add_argument("base", type=int)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("measure", parents=[common],
                       help="tabulate structure measures per carry and depth")
    p.add_argument("base", type=int)
    p.add_argument("--carries", type=_int_list,
                   help="comma-separated table ids (default: all)")
    p.add_argument("--depth", type=int, default=DEFAULT_MAX_DEPTH)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("train", parents=[common],
                       help="train one cell or a sweep manifest")
    p.add_argument("--base", type=int)
    p.add_argument("--carry-id", type=int)
    p.add_argument("--embedding", default="symbolic",
                   choices=("symbolic", "semantic"))
    p.add_argument("--embedding-unit", type=int, default=1)
    p.add_argument("--cell", default="gru", choices=("gru", "lstm"))
    p.add_argument("--train-digits", type=int, default=3)
    p.add_argument("--epochs", type=int, default=2500)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--eval-interval", type=int, default=10)
    p.add_argument("--eval-lengths", type=_lengths, default=(3, 6))
    p.add_argument("--eval-sample", type=int, default=1000)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("analyze", parents=[common],
                       help="aggregate a completed sweep")
    p.add_argument("root", help="sweep root directory")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
