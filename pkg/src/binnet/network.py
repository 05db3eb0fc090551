"""Networks from weight tables: thresholding, top-k ranking, measure
comparison tables and export to edge-list CSV, DOT and node-link JSON."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .conditional import RegressionMethod, conditional_edge_weights, signed_log_magnitude_array
from .engine import BinaryMatrix, WeightTable, all_pairs, pair_arrays
from .errors import ConfigError, DataError, IoFailure
from .measures import MeasureKind


class Edge(NamedTuple):
    i: int
    j: int
    weight: float
    kind: MeasureKind
    degenerate: bool = False


@dataclass(frozen=True)
class WeightedNetwork:
    labels: tuple
    edges: tuple
    construction: dict = field(default_factory=dict, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "edges", tuple(Edge(*e) for e in self.edges))
        k = len(self.labels)
        seen = set()
        for e in self.edges:
            if not (0 <= e.i < e.j < k):
                raise DataError(f"edge ({e.i}, {e.j}) invalid for {k} nodes")
            if (e.i, e.j) in seen:
                raise DataError(f"duplicate edge ({e.i}, {e.j})")
            seen.add((e.i, e.j))

    __hash__ = None


class RankedEdge(NamedTuple):
    label_i: str
    label_j: str
    weight: float
    i: int
    j: int


@dataclass(frozen=True)
class Ranking:
    kind: MeasureKind
    edges: list
    degenerate: list


def _rank_order(w: WeightTable, labels: Sequence[str], mask: np.ndarray) -> np.ndarray:
    """Indices of masked pairs, strongest first.

    Signed kinds rank by magnitude.  Ties fall back to the lexicographic
    order of the pair's labels (smaller label first), which does not depend
    on column order.
    """
    ii, jj = pair_arrays(w.n_cols)
    order_of = np.empty(len(labels), dtype=np.int64)
    order_of[sorted(range(len(labels)), key=lambda c: labels[c])] = np.arange(len(labels))
    ri, rj = order_of[ii], order_of[jj]
    lo, hi = np.minimum(ri, rj), np.maximum(ri, rj)
    score = np.abs(w.values) if w.kind.signed else w.values
    idx = np.flatnonzero(mask)
    keys = (hi[idx], lo[idx], -score[idx])
    return idx[np.lexsort(keys)]


def _ranked(w: WeightTable, labels, idx) -> list:
    ii, jj = pair_arrays(w.n_cols)
    return [
        RankedEdge(labels[ii[p]], labels[jj[p]], float(w.values[p]), int(ii[p]), int(jj[p]))
        for p in idx
    ]


def rank_edges(
    w: WeightTable,
    labels: Sequence[str],
    m: int,
    include_degenerate: bool = False,
) -> Ranking:
    """The ``m`` strongest edges.

    Degenerate pairs are ranked separately (up to ``m`` of them) unless
    ``include_degenerate`` folds them into the main list.
    """
    if m < 1:
        raise ConfigError(f"top-k needs m >= 1, got {m}")
    _check_labels(w, labels)
    if include_degenerate:
        main = _rank_order(w, labels, np.ones(len(w), dtype=bool))[:m]
        return Ranking(w.kind, _ranked(w, labels, main), [])
    main = _rank_order(w, labels, ~w.degenerate)[:m]
    flagged = _rank_order(w, labels, w.degenerate)[:m]
    return Ranking(w.kind, _ranked(w, labels, main), _ranked(w, labels, flagged))


def build_network(
    w: WeightTable,
    labels: Sequence[str],
    *,
    threshold: float | None = None,
    top_k: int | None = None,
    include_degenerate: bool = False,
) -> WeightedNetwork:
    """Keep edges with weight >= threshold (|weight| for signed kinds), or
    the ``top_k`` strongest.  Exactly one rule must be given."""
    if (threshold is None) == (top_k is None):
        raise ConfigError("give exactly one of threshold or top_k")
    _check_labels(w, labels)
    allowed = np.ones(len(w), dtype=bool) if include_degenerate else ~w.degenerate
    if threshold is not None:
        if math.isnan(threshold) or threshold == math.inf:
            raise ConfigError(f"threshold must be finite or -inf, got {threshold!r}")
        score = np.abs(w.values) if w.kind.signed else w.values
        keep = np.flatnonzero(allowed & (score >= threshold))
        construction = {"rule": "threshold", "value": float(threshold)}
    else:
        if top_k < 0:
            raise ConfigError(f"top_k must be >= 0, got {top_k}")
        keep = np.sort(_rank_order(w, labels, allowed)[:top_k])
        construction = {"rule": "top_k", "value": int(top_k)}
    construction["include_degenerate"] = bool(include_degenerate)
    construction["measure"] = w.kind.value
    ii, jj = pair_arrays(w.n_cols)
    edges = [
        Edge(int(ii[p]), int(jj[p]), float(w.values[p]), w.kind, bool(w.degenerate[p]))
        for p in keep
    ]
    return WeightedNetwork(tuple(labels), tuple(edges), construction)


def _check_labels(w: WeightTable, labels) -> None:
    if len(labels) != w.n_cols:
        raise DataError(f"{len(labels)} labels for a table over {w.n_cols} columns")


# -- comparison tables ----------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonTable:
    labels: tuple
    kinds: tuple
    columns: dict

    def __post_init__(self):
        if len(set(self.kinds)) != len(self.kinds):
            raise ConfigError("comparison kinds must be distinct")
        lengths = {len(self.columns[k]) for k in self.kinds}
        if len(lengths) > 1:
            raise DataError("comparison columns differ in length")

    def column(self, kind: MeasureKind) -> np.ndarray:
        return self.columns[kind]

    def __len__(self) -> int:
        return len(self.columns[self.kinds[0]]) if self.kinds else 0

    def to_csv(self) -> str:
        ii, jj = pair_arrays(len(self.labels))
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["i", "j", "label_i", "label_j", *(k.value for k in self.kinds)])
        cols = [self.columns[k] for k in self.kinds]
        for p in range(len(ii)):
            i, j = int(ii[p]), int(jj[p])
            writer.writerow([i, j, self.labels[i], self.labels[j], *(format_weight(c[p]) for c in cols)])
        return buf.getvalue()


def compare_measures(
    m: BinaryMatrix,
    kinds: Sequence[MeasureKind],
    method: RegressionMethod | None = None,
    threads: int | None = None,
) -> ComparisonTable:
    """One column per measure over all pairs; the conditional column is
    passed through ``signed_log_magnitude``."""
    kinds = tuple(kinds)
    if not kinds:
        raise ConfigError("at least one measure kind is required")
    if len(set(kinds)) != len(kinds):
        raise ConfigError(f"duplicate measure kind in {[k.value for k in kinds]}")
    wants_conditional = MeasureKind.CONDITIONAL in kinds
    if wants_conditional and method is None:
        raise ConfigError("the conditional measure needs a regression method")
    if method is not None and not wants_conditional:
        raise ConfigError("a regression method was given but the conditional measure was not requested")
    columns = {}
    for kind in kinds:
        if kind is MeasureKind.CONDITIONAL:
            table = conditional_edge_weights(m, method, threads)
            columns[kind] = signed_log_magnitude_array(table.values)
        else:
            columns[kind] = all_pairs(m, kind, threads).values
    return ComparisonTable(m.labels, kinds, columns)


# -- export ---------------------------------------------------------------------------

def format_weight(x: float) -> str:
    """17 significant digits: exact round trip for binary64."""
    return format(float(x), ".17g")


def edge_list_csv(net: WeightedNetwork) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "target", "weight", "measure"])
    for e in net.edges:
        writer.writerow([net.labels[e.i], net.labels[e.j], format_weight(e.weight), e.kind.value])
    return buf.getvalue()


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def dot(net: WeightedNetwork) -> str:
    lines = ["graph associations {"]
    for idx, label in enumerate(net.labels):
        lines.append(f"  n{idx} [label={_dot_quote(label)}];")
    for e in net.edges:
        attrs = f"weight={format_weight(e.weight)}, measure={_dot_quote(e.kind.value)}"
        if e.degenerate:
            attrs += ", degenerate=true"
        lines.append(f"  n{e.i} -- n{e.j} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def node_link_json(net: WeightedNetwork) -> str:
    doc = {
        "directed": False,
        "construction": net.construction,
        "nodes": [{"id": idx, "label": label} for idx, label in enumerate(net.labels)],
        "links": [
            {
                "source": e.i,
                "target": e.j,
                "weight": e.weight,
                "measure": e.kind.value,
                "degenerate": e.degenerate,
            }
            for e in net.edges
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def read_node_link_json(text: str) -> WeightedNetwork:
    doc = json.loads(text)
    nodes = sorted(doc["nodes"], key=lambda n: n["id"])
    if [n["id"] for n in nodes] != list(range(len(nodes))):
        raise DataError("node ids must be 0..K-1")
    edges = [
        Edge(
            min(l["source"], l["target"]),
            max(l["source"], l["target"]),
            float(l["weight"]),
            MeasureKind.parse(l["measure"]),
            bool(l.get("degenerate", False)),
        )
        for l in doc["links"]
    ]
    return WeightedNetwork(tuple(n["label"] for n in nodes), tuple(edges), doc.get("construction", {}))


EXPORTERS = {"csv": edge_list_csv, "dot": dot, "json": node_link_json}


def export(net: WeightedNetwork, fmt: str, destination) -> None:
    """Write ``net`` as ``csv``, ``dot`` or ``json`` to a path or text stream."""
    try:
        render = EXPORTERS[fmt]
    except KeyError:
        raise ConfigError(f"unknown export format {fmt!r}") from None
    text = render(net)
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(path, exc.strerror or str(exc)) from exc
