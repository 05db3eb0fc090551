"""Command-line interface.

    binnet measure  --input data.csv --kind jaccard --out weights.csv
    binnet rank     --input data.csv --kind phi --top 5
    binnet compare  --input data.csv --kind p11,jaccard,simpson,phi,conditional
    binnet simulate --rows 1000 --cols 20 --marginal 0.1 --seed 7 --out sim.csv
    binnet filter   --input pairs.csv --format pairs --min-members 2 --out kept.csv
    binnet export   --input data.csv --kind jaccard --top 50 --to json --out net.json

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .conditional import RegressionMethod, conditional_edge_weights
from .engine import BinaryMatrix, WeightTable, all_pairs, pair_arrays
from .errors import BinnetError, ConfigError, IoFailure
from .ingest import (
    filter_min_degree,
    membership_pairs_text,
    dense_csv_text,
    read_matrix,
    write_text,
)
from .measures import MeasureKind
from .network import (
    EXPORTERS,
    build_network,
    compare_measures,
    format_weight,
    rank_edges,
)
from .synth import LEADER_DEFAULTS, check_seed, sample_dyadic_independent, sample_leader_model

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _kinds(text: str) -> list[MeasureKind]:
    out = []
    for part in text.split(","):
        if part.strip():
            try:
                out.append(MeasureKind.parse(part))
            except ValueError as exc:
                raise argparse.ArgumentTypeError(str(exc)) from None
    return out


def _uint64(text: str) -> int:
    try:
        return check_seed(int(text))
    except (ValueError, ConfigError):
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text!r}") from None


def _probabilities(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="binnet", description="Association networks from binary co-membership data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    source = _Parser(add_help=False)
    source.add_argument("--input", required=True, help="input CSV path")
    source.add_argument("--format", choices=("pairs", "dense"), default="dense",
                        help="membership pairs (member_id,group_id) or dense 0/1 matrix")
    source.add_argument("--min-members", type=int, default=None,
                        help="drop columns with fewer set bits before anything else")

    output = _Parser(add_help=False)
    output.add_argument("--out", default=None, help="output path (default: stdout)")

    engine = _Parser(add_help=False)
    engine.add_argument("--method", choices=("ols", "logistic", "lasso"), default=None,
                        help="nodewise regression for the conditional measure (default ols)")
    engine.add_argument("--lambda", dest="lam", type=float, default=None, help="lasso penalty")
    engine.add_argument("--threads", type=int, default=1, help="worker threads (output does not depend on it)")

    kind_single = _Parser(add_help=False)
    kind_single.add_argument("--kind", required=True, type=MeasureKind.parse,
                             help="p11 | agreement | jaccard | simpson | phi | conditional")

    degenerate = _Parser(add_help=False)
    degenerate.add_argument("--include-degenerate", action="store_true",
                            help="rank pairs whose value came from a 0/0 convention or a collinear fit")

    sub.add_parser("measure", parents=[source, output, engine, kind_single],
                   help="weight every column pair with one measure")

    p = sub.add_parser("rank", parents=[source, output, engine, kind_single, degenerate],
                       help="strongest edges; table on stdout, CSV to --out")
    p.add_argument("--top", type=int, required=True)

    p = sub.add_parser("compare", parents=[source, output, engine],
                       help="one column per measure over all pairs")
    p.add_argument("--kind", required=True, action="append", type=_kinds,
                   help="comma-separated kinds; may be repeated")

    p = sub.add_parser("simulate", parents=[output], help="write a synthetic dense matrix")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, default=None)
    p.add_argument("--marginal", type=_probabilities, default=None,
                   help="one probability for all columns, or one per column")
    p.add_argument("--marginal-range", type=_probabilities, default=None,
                   help="lo,hi: per-column probabilities drawn uniformly from [lo, hi]")
    p.add_argument("--preset", choices=("leader",), default=None,
                   help="leader: A ~ Bernoulli(p), B and C noisy copies of A")
    p.add_argument("--p-leader", type=float, default=LEADER_DEFAULTS["p_leader"])
    p.add_argument("--flip", type=float, default=LEADER_DEFAULTS["flip"])
    p.add_argument("--seed", type=_uint64, required=True)
    p.add_argument("--params-out", default=None,
                   help="where to write generative parameters as JSON (default: <out>.params.json)")

    p = sub.add_parser("filter", parents=[source, output], help="apply --min-members and write the matrix")
    p.add_argument("--out-format", choices=("dense", "pairs"), default="dense")

    p = sub.add_parser("export", parents=[source, output, engine, kind_single, degenerate],
                       help="build a network and export it")
    rule = p.add_mutually_exclusive_group(required=True)
    rule.add_argument("--top", type=int)
    rule.add_argument("--threshold", type=float)
    p.add_argument("--to", choices=sorted(EXPORTERS), default="csv")
    return parser


# -- helpers ---------------------------------------------------------------------------

def _load(args) -> BinaryMatrix:
    m = read_matrix(args.input, args.format)
    if args.min_members is not None:
        m = filter_min_degree(m, args.min_members)
    return m


def _method(args, needed: bool) -> RegressionMethod | None:
    if args.lam is not None and args.method != "lasso":
        raise ConfigError("--lambda is only valid with --method lasso")
    if not needed:
        if args.method is not None:
            raise ConfigError("--method only applies to the conditional measure")
        return None
    name = args.method or "ols"
    if name == "lasso":
        if args.lam is None:
            raise ConfigError("--method lasso needs --lambda")
        return RegressionMethod.lasso(args.lam)
    return RegressionMethod(name)


def _threads(args) -> int:
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    return args.threads


def _weights(m: BinaryMatrix, kind: MeasureKind, args) -> WeightTable:
    method = _method(args, kind is MeasureKind.CONDITIONAL)
    if kind is MeasureKind.CONDITIONAL:
        return conditional_edge_weights(m, method, _threads(args))
    return all_pairs(m, kind, _threads(args))


def _emit(text: str, out, stdout) -> None:
    if out is None or out == "-":
        stdout.write(text)
    else:
        write_text(text, out)


def weight_table_csv(w: WeightTable, labels) -> str:
    ii, jj = pair_arrays(w.n_cols)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "j", "label_i", "label_j", "weight", "degenerate"])
    for p, (i, j) in enumerate(zip(ii.tolist(), jj.tolist())):
        writer.writerow([i, j, labels[i], labels[j], format_weight(w.values[p]), int(w.degenerate[p])])
    return buf.getvalue()


def _table(rows: list[list[str]]) -> list[str]:
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    return ["  ".join(cell.ljust(widths[c]) for c, cell in enumerate(r)).rstrip() for r in rows]


# -- commands --------------------------------------------------------------------------

def cmd_measure(args, stdout) -> int:
    m = _load(args)
    w = _weights(m, args.kind, args)
    _emit(weight_table_csv(w, m.labels), args.out, stdout)
    return EXIT_OK


def cmd_rank(args, stdout) -> int:
    if args.top < 1:
        raise ConfigError("--top must be >= 1")
    m = _load(args)
    w = _weights(m, args.kind, args)
    ranking = rank_edges(w, m.labels, args.top, include_degenerate=args.include_degenerate)

    order = "|weight|" if args.kind.signed else "weight"
    lines = [f"Strongest edges by {args.kind.value} (ordered by {order})"]
    rows = [["#", "label_i", "label_j", "weight"]]
    rows += [[f"{r}.", e.label_i, e.label_j, f"{e.weight:.6g}"] for r, e in enumerate(ranking.edges, 1)]
    lines += _table(rows)
    if ranking.degenerate:
        lines += ["", "Degenerate pairs (convention-valued; excluded from the ranking above)"]
        rows = [["#", "label_i", "label_j", "weight"]]
        rows += [[f"{r}.", e.label_i, e.label_j, f"{e.weight:.6g}"] for r, e in enumerate(ranking.degenerate, 1)]
        lines += _table(rows)
    stdout.write("\n".join(lines) + "\n")

    if args.out is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["section", "rank", "i", "j", "label_i", "label_j", "weight"])
        for section, edges in (("ranked", ranking.edges), ("degenerate", ranking.degenerate)):
            for r, e in enumerate(edges, 1):
                writer.writerow([section, r, e.i, e.j, e.label_i, e.label_j, format_weight(e.weight)])
        write_text(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_compare(args, stdout) -> int:
    kinds = [k for group in args.kind for k in group]
    if len(kinds) < 2:
        raise ConfigError("compare needs at least two measure kinds")
    if len(set(kinds)) != len(kinds):
        raise ConfigError(f"duplicate measure kind in {','.join(k.value for k in kinds)}")
    m = _load(args)
    method = _method(args, MeasureKind.CONDITIONAL in kinds)
    table = compare_measures(m, kinds, method, _threads(args))
    _emit(table.to_csv(), args.out, stdout)
    return EXIT_OK


def cmd_simulate(args, stdout) -> int:
    if args.rows < 1:
        raise ConfigError("--rows must be >= 1")
    params = {"seed": args.seed, "rows": args.rows}
    if args.preset == "leader":
        if args.marginal is not None or args.marginal_range is not None:
            raise ConfigError("--preset leader takes --p-leader/--flip, not marginals")
        if args.cols not in (None, 3):
            raise ConfigError("the leader preset always has 3 columns")
        m = sample_leader_model(args.rows, args.seed, p_leader=args.p_leader, flip=args.flip)
        params.update(
            preset="leader", cols=3, p_leader=args.p_leader, flip=args.flip,
            model="A ~ Bernoulli(p_leader); B = A xor Bernoulli(flip); C = A xor Bernoulli(flip), independently",
        )
    else:
        if args.cols is None or args.cols < 1:
            raise ConfigError("--cols must be >= 1")
        if (args.marginal is None) == (args.marginal_range is None):
            raise ConfigError("give exactly one of --marginal or --marginal-range")
        rng_seed = args.seed
        if args.marginal is not None:
            probs = args.marginal * args.cols if len(args.marginal) == 1 else args.marginal
            if len(probs) != args.cols:
                raise ConfigError(f"--marginal has {len(probs)} values for {args.cols} columns")
        else:
            if len(args.marginal_range) != 2 or not 0 <= args.marginal_range[0] <= args.marginal_range[1] <= 1:
                raise ConfigError("--marginal-range must be lo,hi with 0 <= lo <= hi <= 1")
            lo, hi = args.marginal_range
            # marginals and cells come from independent child streams of the seed
            seq = np.random.SeedSequence(rng_seed)
            prob_seed, cell_seed = (int(s.generate_state(2, np.uint64)[0]) for s in seq.spawn(2))
            probs = np.random.default_rng(prob_seed).uniform(lo, hi, args.cols).tolist()
            rng_seed = cell_seed
            params["marginal_range"] = [lo, hi]
        m = sample_dyadic_independent(args.cols, probs, args.rows, rng_seed)
        params.update(preset="dyadic_independent", cols=args.cols, marginals=[float(p) for p in probs])
    _emit(dense_csv_text(m), args.out, stdout)

    params_out = args.params_out
    if params_out is None and args.out not in (None, "-"):
        params_out = f"{args.out}.params.json"
    if params_out is not None:
        write_text(json.dumps(params, indent=2, sort_keys=True) + "\n", params_out)
    return EXIT_OK


def cmd_filter(args, stdout) -> int:
    m = _load(args)
    text = dense_csv_text(m) if args.out_format == "dense" else membership_pairs_text(m)
    _emit(text, args.out, stdout)
    return EXIT_OK


def cmd_export(args, stdout) -> int:
    m = _load(args)
    w = _weights(m, args.kind, args)
    net = build_network(
        w, m.labels, threshold=args.threshold, top_k=args.top, include_degenerate=args.include_degenerate
    )
    _emit(EXPORTERS[args.to](net), args.out, stdout)
    return EXIT_OK


COMMANDS = {
    "measure": cmd_measure,
    "rank": cmd_rank,
    "compare": cmd_compare,
    "simulate": cmd_simulate,
    "filter": cmd_filter,
    "export": cmd_export,
}


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, stdout)
    except BinnetError as exc:
        stderr.write(f"binnet {args.command}: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        stderr.write(f"binnet {args.command}: {IoFailure(exc.filename or '?', exc.strerror or str(exc))}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
