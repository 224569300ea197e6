"""Command-line entry point: ``timevsm <command> ...``.

Commands: ``synth`` (write a synthetic JSONL corpus), ``build`` (index a
corpus), ``neighbors`` (one bin's neighbourhood), ``track`` (streamgraph
series), ``monotony`` and ``sweep`` (monotony reports in the sweep CSV schema).
Data goes to ``--output`` or stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import shutil
import sys
from dataclasses import dataclass
from pathlib import Path

from timevsm.context import ContextSpec
from timevsm.corpus import GRANULARITIES, TOKENIZER_MODES, IngestConfig, ingest_file
from timevsm.errors import ParameterError, TimeVSMError
from timevsm.index import FORMAT_VERSION, load_index, read_manifest, save_index
from timevsm.monotony import CONTEXT_GRID, SIGMA_GRID, SWEEP_COLUMNS, sensitivity_sweep
from timevsm.neighborhood import nearest_neighbors, track_evolution
from timevsm.synth import generate_drift_corpus, load_spec, planted_drift, write_jsonl
from timevsm.weighting import DiffusionParams

log = logging.getLogger("timevsm")

NEIGHBOR_COLUMNS = ("target", "bin", "rank", "neighbor", "score")
SERIES_COLUMNS = ("target", "neighbor", "bin", "score")


@dataclass(frozen=True)
class RunConfig:
    index: Path
    params: DiffusionParams
    spec: ContextSpec
    k: int
    fmt: str
    targets: tuple


def _split(value):
    return [v.strip() for v in value.split(",") if v.strip()] if value else []


def _context(kind, window_size):
    if kind == "document":
        if window_size is not None:
            raise ParameterError("--window-size only applies to --context window")
        return ContextSpec.document()
    return ContextSpec.window(2 if window_size is None else window_size)


def _parse_context(label):
    if label == "document":
        return ContextSpec.document()
    if label.startswith("window-") and label[7:].isdigit():
        return ContextSpec.window(int(label[7:]))
    raise ParameterError(f"bad context {label!r}; use 'document' or 'window-N'")


def _bin_range(index, start, end):
    if start is None and end is None:
        return None
    lo = 0 if start is None else index.bin_index(start)
    hi = index.num_bins - 1 if end is None else index.bin_index(end)
    if lo > hi:
        raise ParameterError(f"empty bin range {start!r}..{end!r}")
    return tuple(range(lo, hi + 1))


def run_config(args):
    """Validate query flags into a RunConfig before any computation."""
    if args.k < 1:
        raise ParameterError("--k must be >= 1")
    params = DiffusionParams(args.sigma, args.truncation_radius, args.literal_denominator)
    spec = _context(args.context, args.window_size)
    targets = tuple(_split(args.targets))
    if not targets:
        raise ParameterError("--targets is required")
    return RunConfig(Path(args.index), params, spec, args.k, args.format, targets)


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def write_table(rows, columns, fmt, path=None):
    """Write dict or tuple rows as CSV (header first) or a JSON list."""
    rows = [r if isinstance(r, dict) else dict(zip(columns, r)) for r in rows]
    fh, close = _open_out(path)
    try:
        if fmt == "json":
            json.dump(rows, fh, indent=2, ensure_ascii=False)
            fh.write("\n")
        else:
            w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    finally:
        if close:
            fh.close()


# -- commands ----------------------------------------------------------------


def cmd_synth(args):
    spec = load_spec(args.config, seed=args.seed) if args.config else planted_drift(seed=args.seed or 0)
    records = generate_drift_corpus(spec)
    if args.output in (None, "-"):
        for rec in records:
            sys.stdout.write(json.dumps(rec, ensure_ascii=False) + "\n")
    else:
        write_jsonl(records, args.output)
    log.info("wrote %d records (%d bins x %d docs, seed %d)", len(records), spec.num_bins, spec.docs_per_bin, spec.seed)
    return 0


def cmd_build(args):
    out = Path(args.index)
    if out.exists() and any(out.iterdir()):
        if not args.force:
            try:
                version = read_manifest(out).get("format_version")
            except (FileNotFoundError, json.JSONDecodeError):
                raise TimeVSMError(f"{out} exists and is not an index; use --force to overwrite") from None
            if version != FORMAT_VERSION:
                raise TimeVSMError(
                    f"{out} holds an index with format version {version!r} (current {FORMAT_VERSION}); use --force to overwrite"
                )
            raise TimeVSMError(f"index already exists at {out}; use --force to overwrite")
        shutil.rmtree(out)
    config = IngestConfig(args.granularity, args.vocab_size, args.tokenizer)
    index = ingest_file(args.input, config)
    manifest = save_index(index, out)
    counts, stats = manifest["counts"], manifest["stats"]
    print(f"documents: {counts['num_docs']}")
    print(f"vocabulary: {counts['vocab_size']}")
    print(f"timestamps: {counts['num_bins']} ({index.bin_labels[0]}..{index.bin_labels[-1]})")
    print(f"records read: {stats['records_read']}")
    print(f"skipped (bad timestamp): {stats['skipped_timestamps']}")
    print(f"dropped (no vocabulary phrases): {stats['dropped_empty']}")
    return 0


def cmd_neighbors(args):
    cfg = run_config(args)
    index = load_index(cfg.index)
    bins = _bin_range(index, args.start, args.end) or tuple(range(index.num_bins))
    if args.bin is not None:
        bins = (index.bin_index(args.bin),)
    rows = []
    for target in cfg.targets:
        for b in bins:
            nb = nearest_neighbors(target, b, cfg.k, cfg.spec, cfg.params, index)
            rows.extend(
                (index.phrases[nb.target], index.bin_labels[b], r, index.phrases[w], s)
                for r, (w, s) in enumerate(nb.members, 1)
            )
    write_table(rows, NEIGHBOR_COLUMNS, cfg.fmt, args.output)
    return 0


def cmd_track(args):
    cfg = run_config(args)
    index = load_index(cfg.index)
    bins = _bin_range(index, args.start, args.end)
    selection = "peak" if args.paper_mode else "per-bin"
    series, neighborhoods = [], []
    for target in cfg.targets:
        evo = track_evolution(target, cfg.k, cfg.spec, cfg.params, index, bins=bins, selection=selection)
        series.extend(evo.series_rows(index))
        neighborhoods.extend(evo.neighborhood_rows(index))
    if cfg.fmt == "json":
        fh, close = _open_out(args.output)
        try:
            payload = {
                "series": [dict(zip(SERIES_COLUMNS, r)) for r in series],
                "neighborhoods": [dict(zip(NEIGHBOR_COLUMNS, r)) for r in neighborhoods],
            }
            json.dump(payload, fh, indent=2, ensure_ascii=False)
            fh.write("\n")
        finally:
            if close:
                fh.close()
    else:
        write_table(series, SERIES_COLUMNS, "csv", args.output)
        if args.neighborhoods:
            write_table(neighborhoods, NEIGHBOR_COLUMNS, "csv", args.neighborhoods)
    return 0


def _sweep(args, sigmas, specs, ks, cfg):
    index = load_index(cfg.index)
    bins = _bin_range(index, args.start, args.end)
    report = sensitivity_sweep(
        index, list(cfg.targets), sigmas, specs, ks,
        truncation_radius=cfg.params.truncation_radius,
        literal_denominator=cfg.params.literal_denominator,
        bins=bins,
    )
    rows = report.rows(index)
    write_table(rows, SWEEP_COLUMNS, cfg.fmt, args.output)
    for row in rows:
        if row["status"] == "error":
            log.warning("cell %s sigma=%s %s k=%s failed", row["target"], row["sigma"], row["context_kind"], row["k"])
        elif row["minimum_pair"]:
            log.info("%s k=%s: minimum monotony %s at %s", row["target"], row["k"], row["minimum"], row["minimum_pair"])
    return 0


def cmd_monotony(args):
    cfg = run_config(args)
    return _sweep(args, [cfg.params.sigma], [cfg.spec], [cfg.k], cfg)


def cmd_sweep(args):
    cfg = run_config(args)
    sigmas = [float(s) for s in _split(args.sigmas)] if args.sigmas else list(SIGMA_GRID)
    specs = [_parse_context(c) for c in _split(args.contexts)] if args.contexts else list(CONTEXT_GRID)
    ks = [int(k) for k in _split(args.ks)] if args.ks else [cfg.k]
    for s in sigmas:
        DiffusionParams(s, cfg.params.truncation_radius)
    if any(k < 1 for k in ks):
        raise ParameterError("--ks values must be >= 1")
    return _sweep(args, sigmas, specs, ks, cfg)


# -- parser ------------------------------------------------------------------


def _query_flags(p):
    p.add_argument("--index", required=True, help="index directory written by 'build'")
    p.add_argument("--targets", required=True, help="comma-separated target phrases")
    p.add_argument("--sigma", type=float, default=1.0, help="kernel standard deviation in bins (default: 1.0)")
    p.add_argument("--truncation-radius", type=int, default=None, help="bins beyond which weight is zero (default: ceil(4*sigma))")
    p.add_argument("--literal-denominator", action="store_true", help="normalize by the sum of squares without square root")
    p.add_argument("--context", choices=("window", "document"), default="window")
    p.add_argument("--window-size", type=int, default=None, help="tokens per side for window context (default: 2)")
    p.add_argument("--k", type=int, default=16, help="neighbourhood size (default: 16)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--start", default=None, help="first timestamp bin label to include")
    p.add_argument("--end", default=None, help="last timestamp bin label to include")
    p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")


def build_parser():
    parser = argparse.ArgumentParser(prog="timevsm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic drift corpus as JSONL")
    p.add_argument("--config", default=None, help="JSON drift config (default: built-in two-phase drift)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build", help="build an index from a JSONL corpus")
    p.add_argument("input", help="JSONL records with id, timestamp and text or tokens")
    p.add_argument("--index", required=True, help="output index directory")
    p.add_argument("--granularity", choices=GRANULARITIES, default="year")
    p.add_argument("--vocab-size", type=int, default=10_000)
    p.add_argument("--tokenizer", choices=TOKENIZER_MODES, default="auto")
    p.add_argument("--force", action="store_true", help="overwrite an existing index")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("neighbors", help="nearest neighbours per bin")
    _query_flags(p)
    p.add_argument("--bin", default=None, help="single bin label (default: every bin)")
    p.set_defaults(func=cmd_neighbors)

    p = sub.add_parser("track", help="streamgraph series of neighbour similarity over time")
    _query_flags(p)
    p.add_argument("--paper-mode", action="store_true", help="pick the k words with highest plain tf-idf similarity at any bin")
    p.add_argument("--neighborhoods", default=None, help="also write per-bin neighbourhoods (CSV) here")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("monotony", help="average / minimum / absolute monotony per target")
    _query_flags(p)
    p.set_defaults(func=cmd_monotony)

    p = sub.add_parser("sweep", help="monotony over a grid of sigmas, contexts and k")
    _query_flags(p)
    p.add_argument("--sigmas", default=None, help="comma-separated (default: 0.5,1,2,3,5)")
    p.add_argument("--contexts", default=None, help="comma-separated, e.g. document,window-2 (default: document,window-1..4)")
    p.add_argument("--ks", default=None, help="comma-separated neighbourhood sizes (default: --k)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s",
                        stream=sys.stderr)
    try:
        return args.func(args)
    except (TimeVSMError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
