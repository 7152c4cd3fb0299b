"""Command-line entry point: ``hypermint <command> [options]``.

Exit status is 0 on success, 1 for usage errors and 2 for data errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

from . import synth
from .dataset import (
    DataError,
    DiscretizationGrid,
    discretize,
    equal_width_grid,
    import_grid,
    load_csv,
    resolve_count,
)
from .evaluation import EvalReport, evaluate, jcd, real_boxes
from .mdl import HyperRectangle, LengthBreakdown, PatternSet
from .miner import MinerConfig, mine

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _count_arg(text):
    if text.strip().lower() == "sqrt":
        return "sqrt"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'sqrt', got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _positive_int(text):
    value = _count_arg(text)
    if value == "sqrt":
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _add_grid_options(p):
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--label-column", help="column holding class labels, excluded from mining")
    p.add_argument("--bins", type=_count_arg, default="sqrt", help="intervals per attribute, or 'sqrt' (default)")
    p.add_argument("--grid-file", help="cut points, one comma-separated line per attribute")
    p.add_argument("--grid-pad", action="store_true", help="widen each attribute range to enclosing integers")


def _add_miner_options(p):
    p.add_argument("--k", type=_count_arg, default="sqrt", help="nearest neighbours for initial candidates")
    p.add_argument("--prune-top-n", type=_positive_int, help="candidates examined per pruning pass")
    p.add_argument("--epsilon", type=_positive_float, default=0.5, help="pseudo-count of the plug-in code")
    p.add_argument("--no-prune", action="store_true", help="disable multi-pattern merging")
    p.add_argument("--prune-at-end", action="store_true", help="prune once after merging instead of per wave")
    p.add_argument("--knn-propagate", action="store_true",
                   help="pair merged patterns only with their inherited neighbours")


def build_parser():
    parser = _Parser(prog="hypermint", description="Mine MDL-optimal hyper-rectangles from numerical data.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mine", help="mine a pattern set and write it as JSON")
    _add_grid_options(p)
    _add_miner_options(p)
    p.add_argument("--emit-covers", action="store_true", help="include object ids of every pattern")
    p.add_argument("--output", help="JSON file (default: standard output)")

    p = sub.add_parser("discretize", help="write the interval index of every value")
    _add_grid_options(p)
    p.add_argument("--output", help="CSV file (default: standard output)")

    p = sub.add_parser("synth", help="generate a synthetic benchmark dataset")
    p.add_argument("--layout", required=True, choices=sorted(synth.LAYOUTS))
    p.add_argument("--support", type=_positive_int, required=True, help="points per ground-truth rectangle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="existing directory for the CSV and ground-truth files")

    p = sub.add_parser("eval", help="evaluate a mined pattern set")
    p.add_argument("--input", required=True, help="pattern-set JSON written by 'mine'")
    p.add_argument("--truth", help="ground-truth rectangle file written by 'synth'")
    p.add_argument("--data", help="CSV the patterns were mined from (enables overlap and accuracy metrics)")
    p.add_argument("--label-column", help="class column in --data")
    p.add_argument("--weighted", action="store_true", help="weight pattern accuracy by usage")
    p.add_argument("--output", help="JSON report (default: standard output); a .csv suffix writes one CSV row")

    p = sub.add_parser("sweep", help="mine over a grid of bin and neighbour settings")
    p.add_argument("--input", required=True)
    p.add_argument("--label-column")
    p.add_argument("--bins", type=_count_arg, help="restrict the sweep to this bin setting")
    p.add_argument("--k", type=_count_arg, help="restrict the sweep to this neighbour setting")
    p.add_argument("--grid-pad", action="store_true")
    p.add_argument("--prune-top-n", type=_positive_int)
    p.add_argument("--epsilon", type=_positive_float, default=0.5)
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--prune-at-end", action="store_true")
    p.add_argument("--knn-propagate", action="store_true")
    p.add_argument("--output", help="CSV file (default: standard output)")
    return parser


def _write_text(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _grid_for(args, data) -> DiscretizationGrid:
    if getattr(args, "grid_file", None):
        return import_grid(args.grid_file, data)
    return equal_width_grid(data, args.bins, pad=args.grid_pad)


def _miner_config(args, k) -> MinerConfig:
    if args.no_prune and args.prune_at_end:
        raise UsageError("--no-prune and --prune-at-end are mutually exclusive")
    return MinerConfig(
        k_neighbors=k,
        prune_top_n=args.prune_top_n,
        epsilon=args.epsilon,
        enable_pruning=not args.no_prune,
        prune_at_end=args.prune_at_end,
        knn_propagate=args.knn_propagate,
    )


def result_document(result, d, data, cfg, emit_covers=False) -> dict:
    """JSON-ready description of a mining result."""
    patterns = []
    for pid, h in zip(result.pattern_ids, result.patterns):
        bounds = d.grid.bounds(h.lower, h.upper)
        entry = {
            "id": int(pid),
            "lower": list(h.lower),
            "upper": list(h.upper),
            "real_lower": bounds[:, 0].tolist(),
            "real_upper": bounds[:, 1].tolist(),
            "sizes": list(h.sizes),
            "usage": h.usage,
        }
        if emit_covers:
            entry["cover"] = h.cover.tolist()
        patterns.append(entry)
    return {
        "attributes": list(data.attributes),
        "n_objects": d.n_objects,
        "grid": [c.tolist() for c in d.grid.cuts],
        "config": {
            "k_neighbors": resolve_count(cfg.k_neighbors, d.n_objects),
            "prune_top_n": cfg.prune_top_n,
            "epsilon": cfg.epsilon,
            "enable_pruning": cfg.enable_pruning,
            "prune_at_end": cfg.prune_at_end,
            "knn_propagate": cfg.knn_propagate,
        },
        "length": result.total_bits.as_dict(),
        "baseline": result.baseline.as_dict(),
        "compression_ratio": result.compression_ratio,
        "n_initial_candidates": result.n_initial_candidates,
        "elapsed_seconds": result.elapsed,
        "patterns": patterns,
        "trace": [
            {
                "kind": s.kind,
                "parts": [int(p) for p in s.parts],
                "new_id": int(s.new_id),
                "gain": s.gain,
                "n_patterns": s.n_patterns,
                "n_candidates": s.n_candidates,
                "total_bits": s.total_bits,
            }
            for s in result.trace
        ],
    }


def cmd_mine(args) -> int:
    cfg = _miner_config(args, args.k)
    data = load_csv(args.input, args.label_column)
    d = discretize(data, _grid_for(args, data))
    result = mine(d, cfg)
    doc = result_document(result, d, data, cfg, args.emit_covers)
    _write_text(args.output, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_discretize(args) -> int:
    data = load_csv(args.input, args.label_column)
    d = discretize(data, _grid_for(args, data))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = list(data.attributes)
    if data.labels is not None:
        header.append(args.label_column)
    w.writerow(header)
    for i, row in enumerate(d.cells):
        out = [int(v) for v in row]
        if data.labels is not None:
            out.append(data.labels[i])
        w.writerow(out)
    _write_text(args.output, buf.getvalue())
    return EXIT_OK


def cmd_synth(args) -> int:
    data, truth = synth.generate(args.layout, args.support, args.seed)
    data_path, truth_path = synth.export(data, truth, args.output)
    print(data_path)
    print(truth_path)
    return EXIT_OK


def _load_breakdown(doc, key):
    part = doc.get(key)
    if part is None:
        return None
    return LengthBreakdown(part["model_bits"], part["header_bits"], part["data_bits"], part["residual_bits"])


def load_result_document(path):
    """Read a pattern-set JSON back into its grid and rectangles.

    Rectangles without stored covers get an empty cover.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        grid = DiscretizationGrid(tuple(doc["grid"]))
        patterns = PatternSet(
            HyperRectangle(p["lower"], p["upper"], p.get("cover", [])) for p in doc["patterns"]
        )
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: malformed pattern-set document ({exc})") from None
    return doc, grid, patterns


def cmd_eval(args) -> int:
    doc, grid, patterns = load_result_document(args.input)
    has_covers = all("cover" in p for p in doc["patterns"])
    total = _load_breakdown(doc, "length")
    baseline = _load_breakdown(doc, "baseline")
    truth = synth.load_truth(args.truth).boxes() if args.truth else None

    report = EvalReport(
        total.total_bits / baseline.total_bits if total and baseline else None,
        len(patterns),
        runtime_seconds=doc.get("elapsed_seconds"),
    )
    if args.label_column and not args.data:
        raise UsageError("--label-column needs --data")
    if args.data:
        data = load_csv(args.data, args.label_column)
        d = discretize(data, grid)
        labels = data.labels
        if labels is not None and not has_covers:
            print("hypermint: accuracy needs covers; mine with --emit-covers", file=sys.stderr)
            labels = None
        full = evaluate(patterns, d, truth=truth, labels=labels, weighted=args.weighted)
        report.pairwise_cover_jaccard = full.pairwise_cover_jaccard
        report.accuracy = full.accuracy
        report.jcd_h_t, report.jcd_t_h = full.jcd_h_t, full.jcd_t_h
    elif truth is not None and len(patterns):
        mined = real_boxes(patterns, grid)
        report.jcd_h_t = jcd(mined, truth)
        report.jcd_t_h = jcd(truth, mined)

    if args.output and args.output.endswith(".csv"):
        _write_text(args.output, report.to_csv())
    else:
        _write_text(args.output, report.to_json() + "\n")
    return EXIT_OK


def sweep_settings(n: int, m: int) -> tuple:
    """Bin and neighbour settings of the parameter study, as (label, value) pairs."""

    def count(x):
        return max(1, int(round(x)))

    rn, rnm = math.sqrt(n), math.sqrt(n * m)
    bins = [("5", 5), ("0.5sqrt(n)", count(0.5 * rn)), ("sqrt(n)", count(rn)), ("2sqrt(n)", count(2 * rn))]
    ks = [
        ("5", 5),
        ("0.5sqrt(n)", count(0.5 * rn)),
        ("sqrt(n)", count(rn)),
        ("2sqrt(n)", count(2 * rn)),
        ("0.5sqrt(nm)", count(0.5 * rnm)),
        ("sqrt(nm)", count(rnm)),
        ("2sqrt(nm)", count(2 * rnm)),
    ]
    return bins, ks


def cmd_sweep(args) -> int:
    _miner_config(args, 1)
    data = load_csv(args.input, args.label_column)
    bins, ks = sweep_settings(data.n_objects, data.n_attributes)
    if args.bins is not None:
        bins = [(str(args.bins), resolve_count(args.bins, data.n_objects))]
    if args.k is not None:
        ks = [(str(args.k), resolve_count(args.k, data.n_objects))]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bins_setting", "bins", "k_setting", "k"] + EvalReport.csv_header())
    for b_label, b in bins:
        d = discretize(data, equal_width_grid(data, b, pad=args.grid_pad))
        for k_label, k in ks:
            cfg = _miner_config(args, k)
            started = time.perf_counter()
            result = mine(d, cfg)
            elapsed = time.perf_counter() - started
            report = evaluate(
                result.patterns, d, result.total_bits, result.baseline, labels=data.labels, runtime=elapsed
            )
            w.writerow([b_label, b, k_label, k] + report.csv_row())
    _write_text(args.output, buf.getvalue())
    return EXIT_OK


COMMANDS = {
    "mine": cmd_mine,
    "discretize": cmd_discretize,
    "synth": cmd_synth,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"hypermint: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, ValueError) as exc:
        print(f"hypermint: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
