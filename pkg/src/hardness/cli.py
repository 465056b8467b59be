"""Command line front end: ``gen``, ``measure``, ``ih`` and ``report``.

Exit codes: 0 success, 1 partial failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    CLASSIFICATION,
    CLASSIFICATION_MEASURES,
    KINDS,
    REGRESSION,
    REGRESSION_MEASURES,
    HardnessError,
    atomic_open,
    format_value,
    load_csv,
    read_table,
)
from .ih import instance_hardness
from .measures import classification_profile, regression_profile
from .models import default_pool
from .report import SweepEntry, boxplot_svg, build_report
from .synth import RNG_NAME, SweepSpec, gen_sweep

log = logging.getLogger("hardness")

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    out: str = "."
    kind: str | None = None
    target: str | None = None
    seed: int = 0
    n: int = 500
    params: list | None = None
    folds: int = 10
    pool_size: int | None = None
    measures: list | None = None
    k: int = 5
    hb_bins: int = 10
    de_quantile: float = 0.15
    min_leaf_dcp: int = 5
    force: bool = False
    dump_cfe_trace: bool = False
    data: str | None = None
    profiles: str | None = None
    ih: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HARDNESS_THREADS", "1")))
    except ValueError:
        return 1


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _float_list(text):
    return [float(t) for t in _csv_list(text)]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardness", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic sweep")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int, default=500)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--params", type=_float_list, default=None,
                   help="comma-separated sd (classification) or sigma (regression) values")
    g.add_argument("--force", action="store_true")

    def dataset_inputs(p):
        p.add_argument("inputs", nargs="+", help="CSV files or directories holding a manifest.json")
        p.add_argument("--out", required=True)
        p.add_argument("--kind", choices=KINDS, default=None, help="needed when no sidecar JSON exists")
        p.add_argument("--target", default=None, help="target column (default: sidecar or last column)")

    m = sub.add_parser("measure", help="compute hardness profiles")
    dataset_inputs(m)
    m.add_argument("--measures", type=_csv_list, default=None)
    m.add_argument("--k", type=int, default=5)
    m.add_argument("--hb-bins", type=int, default=10)
    m.add_argument("--de-quantile", type=float, default=0.15)
    m.add_argument("--min-leaf-dcp", type=int, default=5)
    m.add_argument("--dump-cfe-trace", action="store_true")

    h = sub.add_parser("ih", help="compute instance hardness with the built-in pool")
    dataset_inputs(h)
    h.add_argument("--folds", type=int, default=10)
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--pool-size", type=int, default=None)

    r = sub.add_parser("report", help="summarize a sweep")
    r.add_argument("--data", default=None, help="directory with the sweep manifest")
    r.add_argument("--profiles", required=True)
    r.add_argument("--ih", default=None)
    r.add_argument("--out", required=True)
    return parser


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command, out=args.out)
    for name in ("inputs", "kind", "target", "seed", "n", "params", "folds", "pool_size", "measures", "k",
                 "hb_bins", "de_quantile", "min_leaf_dcp", "force", "dump_cfe_trace", "data", "profiles", "ih"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    return cfg


# ---------------------------------------------------------------------------
# dataset discovery
# ---------------------------------------------------------------------------

@dataclass
class DatasetRef:
    path: Path
    name: str
    parameter: float | None = None
    kind: str | None = None
    target: str | None = None


def read_manifest(directory) -> list:
    directory = Path(directory)
    entries = json.loads((directory / "manifest.json").read_text())
    refs = []
    for e in entries:
        refs.append(DatasetRef(directory / e["path"], e["name"], e.get("parameter")))
    return refs


def _sidecar(path: Path):
    side = path.with_suffix(".json")
    if side.exists():
        return json.loads(side.read_text())
    return None


def discover(inputs) -> list:
    refs = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            if not (p / "manifest.json").exists():
                raise ConfigError(f"{p}: directory without manifest.json")
            refs.extend(read_manifest(p))
        else:
            refs.append(DatasetRef(p, p.stem))
    for ref in refs:
        side = _sidecar(ref.path) if ref.path.exists() else None
        if side:
            ref.kind = side.get("kind")
            ref.target = side.get("target")
    return refs


def _load(ref: DatasetRef, cfg: RunConfig):
    kind = cfg.kind or ref.kind
    if kind is None:
        raise ConfigError(f"{ref.path}: no sidecar JSON; pass --kind")
    target = cfg.target or ref.target
    if target is None:
        with open(ref.path, newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh))
        target = header[-1]
    return load_csv(ref.path, target, kind, name=ref.name)


def _run_per_dataset(refs, cfg, job) -> int:
    def safe(ref):
        try:
            job(ref)
            return None
        except ConfigError:
            raise
        except (HardnessError, OSError, ValueError) as exc:
            return f"{ref.path}: {exc}"

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        failures = [f for f in pool.map(safe, refs) if f]
    for msg in failures:
        log.error(msg)
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_gen(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    if out.exists() and not cfg.force:
        raise ConfigError(f"{out} already exists; use --force to overwrite")
    spec = SweepSpec(cfg.kind, tuple(cfg.params or ()), n=cfg.n, seed=cfg.seed)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for k, ds in enumerate(gen_sweep(spec)):
        path = out / f"{ds.name}.csv"
        ds.to_csv(path)
        ds.write_sidecar(path.with_suffix(".json"))
        manifest.append({"name": ds.name, "parameter": spec.parameters[k], "seed": spec.seed + k,
                         "path": path.name})
    with atomic_open(out / "manifest.json") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    with atomic_open(out / "run_config.json") as fh:
        fh.write(cfg.to_json())
    with atomic_open(out / "rng.json") as fh:
        json.dump({"generator": RNG_NAME, "seeds": [e["seed"] for e in manifest]}, fh, indent=2)
        fh.write("\n")
    log.info("wrote %d datasets to %s", len(manifest), out)
    return EXIT_OK


def cmd_measure(cfg: RunConfig) -> int:
    refs = discover(cfg.inputs)
    out = Path(cfg.out)
    if cfg.measures:
        known = set(CLASSIFICATION_MEASURES) | set(REGRESSION_MEASURES)
        bad = [m for m in cfg.measures if m not in known]
        if bad:
            raise ConfigError(f"unknown measures: {', '.join(bad)}")

    def job(ref):
        ds = _load(ref, cfg)
        if ds.kind == CLASSIFICATION:
            wanted = [m for m in cfg.measures if m in CLASSIFICATION_MEASURES] if cfg.measures else None
            profile = classification_profile(ds, cfg.k, cfg.min_leaf_dcp, cfg.de_quantile, wanted)
        else:
            wanted = [m for m in cfg.measures if m in REGRESSION_MEASURES] if cfg.measures else None
            profile, trace = regression_profile(ds, cfg.k, cfg.hb_bins, cfg.de_quantile, measures=wanted,
                                                return_trace=True)
            if cfg.dump_cfe_trace:
                with atomic_open(out / f"{ref.name}.cfe_trace.json") as fh:
                    json.dump(trace.to_dict(), fh, indent=1)
                    fh.write("\n")
        profile.to_csv(out / f"{ref.name}.profile.csv")
        log.info("%s: %d instances profiled", ref.name, len(profile))

    out.mkdir(parents=True, exist_ok=True)
    with atomic_open(out / "run_config.json") as fh:
        fh.write(cfg.to_json())
    return _run_per_dataset(refs, cfg, job)


def cmd_ih(cfg: RunConfig) -> int:
    refs = discover(cfg.inputs)
    out = Path(cfg.out)
    if cfg.pool_size is not None and cfg.pool_size < 1:
        raise ConfigError("--pool-size must be >= 1")

    def job(ref):
        ds = _load(ref, cfg)
        pool = default_pool(ds.kind, cfg.seed)
        if cfg.pool_size is not None:
            pool = pool[:cfg.pool_size]
        result = instance_hardness(ds, pool, cfg.folds, cfg.seed)
        result.to_csv(out / f"{ref.name}.ih.csv")
        result.write_metadata(out / f"{ref.name}.ih.json")
        log.info("%s: median IH %.4f", ref.name, float(np.median(result.ih)))

    out.mkdir(parents=True, exist_ok=True)
    with atomic_open(out / "run_config.json") as fh:
        fh.write(cfg.to_json())
    return _run_per_dataset(refs, cfg, job)


def cmd_report(cfg: RunConfig) -> int:
    prof_dir = Path(cfg.profiles)
    if cfg.data:
        refs = read_manifest(cfg.data)
    else:
        refs = [DatasetRef(p, p.name[:-len(".profile.csv")]) for p in sorted(prof_dir.glob("*.profile.csv"))]
    if not refs:
        raise ConfigError(f"no datasets found under {cfg.data or prof_dir}")
    missing = []
    for ref in refs:
        if not (prof_dir / f"{ref.name}.profile.csv").exists():
            missing.append(str(prof_dir / f"{ref.name}.profile.csv"))
        if cfg.ih and not (Path(cfg.ih) / f"{ref.name}.ih.csv").exists():
            missing.append(str(Path(cfg.ih) / f"{ref.name}.ih.csv"))
    if missing:
        for path in missing:
            log.error("missing input: %s", path)
        return EXIT_PARTIAL

    entries = []
    for ref in refs:
        header, values = read_table(prof_dir / f"{ref.name}.profile.csv")
        measures = {h: values[:, k] for k, h in enumerate(header) if h != "instance_id"}
        if cfg.ih:
            ih_header, ih_values = read_table(Path(cfg.ih) / f"{ref.name}.ih.csv")
            measures["IH"] = ih_values[:, ih_header.index("ih")]
        entries.append(SweepEntry(ref.name, ref.parameter, measures))
    report = build_report(entries)

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with atomic_open(out / "report.json") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    with atomic_open(out / "summary.csv") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dataset", "parameter", "measure", "min", "q1", "median", "q3", "max", "mean"])
        for row in report.summary_rows():
            writer.writerow(row[:2] + [row[2]] + [format_value(v) for v in row[3:]])
    with atomic_open(out / "trend.csv") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["measure", "spearman_parameter_median", "spearman_with_ih"])
        for m in report.trend:
            ihc = report.ih_correlation.get(m)
            writer.writerow([m, format_value(report.trend[m]), "" if ihc is None else format_value(ihc)])
    labels = [f"{e.parameter:g}" if e.parameter is not None else e.name for e in entries]
    names = []
    for e in entries:
        names.extend(m for m in e.measures if m not in names)
    for m in names:
        groups = [e.measures[m] for e in entries if m in e.measures]
        glabels = [lab for lab, e in zip(labels, entries) if m in e.measures]
        with atomic_open(out / f"boxplot_{m}.svg") as fh:
            fh.write(boxplot_svg(m, glabels, groups))
    log.info("report for %d datasets written to %s", len(entries), out)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "measure": cmd_measure, "ih": cmd_ih, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    cfg = config_from_args(args)
    try:
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, HardnessError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
