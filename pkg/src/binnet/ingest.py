"""Reading and writing binary matrices.

Two CSV layouts are supported:

* membership pairs: header ``member_id,group_id``, one row per membership;
  members become rows and groups become columns, both in order of first
  appearance.
* dense: header row of column labels, then one row of ``0``/``1`` cells per
  observation.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .engine import BinaryMatrix, column_marginals
from .errors import AllColumnsDropped, DataError, EmptyInput, IoFailure, ParseError


@dataclass(frozen=True)
class MembershipRecord:
    member_id: str
    group_id: str

    def __post_init__(self):
        if not self.member_id or not self.group_id:
            raise ValueError("member_id and group_id must be non-empty")


def _open_text(source) -> tuple[TextIO, bool]:
    if hasattr(source, "read"):
        return source, False
    path = Path(source)
    try:
        return open(path, "r", encoding="utf-8", newline=""), True
    except FileNotFoundError:
        raise IoFailure(path, "no such file") from None
    except OSError as exc:
        raise IoFailure(path, exc.strerror or str(exc)) from exc


def _read_rows(source) -> list[list[str]]:
    fh, owned = _open_text(source)
    try:
        try:
            return list(csv.reader(fh))
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not valid UTF-8 ({exc.reason})") from None
        except csv.Error as exc:
            raise ParseError(str(exc)) from None
    finally:
        if owned:
            fh.close()


def records_to_matrix(records: Iterable[MembershipRecord]) -> BinaryMatrix:
    members: dict[str, int] = {}
    groups: dict[str, int] = {}
    cells = []
    for rec in records:
        r = members.setdefault(rec.member_id, len(members))
        c = groups.setdefault(rec.group_id, len(groups))
        cells.append((r, c))
    if not cells:
        raise EmptyInput("no membership records")
    dense = np.zeros((len(members), len(groups)), dtype=bool)
    rows, cols = zip(*cells)
    dense[list(rows), list(cols)] = True
    return BinaryMatrix.from_dense(dense, list(groups))


def read_membership_pairs(source) -> BinaryMatrix:
    rows = _read_rows(source)
    if not rows:
        raise EmptyInput("membership file is empty")
    header = [h.strip() for h in rows[0]]
    if header != ["member_id", "group_id"]:
        raise ParseError(f"expected header member_id,group_id, got {','.join(rows[0])!r}", line=1)
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", line=lineno)
        member, group = row[0].strip(), row[1].strip()
        for col, value in ((1, member), (2, group)):
            if not value:
                raise ParseError("empty identifier", line=lineno, column=col)
        records.append(MembershipRecord(member, group))
    if not records:
        raise EmptyInput("membership file has a header but no records")
    return records_to_matrix(records)


def read_dense_csv(source) -> BinaryMatrix:
    rows = _read_rows(source)
    if not rows:
        raise EmptyInput("dense matrix file is empty")
    labels = [h.strip() for h in rows[0]]
    for col, label in enumerate(labels, start=1):
        if not label:
            raise ParseError("empty column label", line=1, column=col)
    if len(set(labels)) != len(labels):
        raise ParseError("duplicate column labels", line=1)
    body = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(labels):
            raise ParseError(f"expected {len(labels)} cells, got {len(row)}", line=lineno)
        bits = []
        for col, cell in enumerate(row, start=1):
            cell = cell.strip()
            if cell == "1":
                bits.append(True)
            elif cell == "0":
                bits.append(False)
            else:
                raise ParseError(f"cell value {cell!r} is not 0 or 1", line=lineno, column=col)
        body.append(bits)
    if not body:
        raise EmptyInput("dense matrix file has no data rows")
    return BinaryMatrix.from_dense(np.array(body, dtype=bool), labels)


def read_matrix(source, fmt: str) -> BinaryMatrix:
    if fmt == "pairs":
        return read_membership_pairs(source)
    if fmt == "dense":
        return read_dense_csv(source)
    raise DataError(f"unknown input format {fmt!r}")


def dense_csv_text(m: BinaryMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(m.labels)
    for row in m.to_dense().astype(np.uint8):
        writer.writerow(row.tolist())
    return buf.getvalue()


def membership_pairs_text(m: BinaryMatrix, member_ids=None) -> str:
    """Pair listing of ``m``, row-major.  Rows and columns without any set
    bit cannot be represented and are lost."""
    if member_ids is None:
        member_ids = [f"m{r}" for r in range(m.n_rows)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["member_id", "group_id"])
    for r, c in zip(*np.nonzero(m.to_dense())):
        writer.writerow([member_ids[r], m.labels[c]])
    return buf.getvalue()


def write_text(text: str, destination) -> None:
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(path, exc.strerror or str(exc)) from exc


def write_dense_csv(m: BinaryMatrix, destination) -> None:
    write_text(dense_csv_text(m), destination)


def write_membership_pairs(m: BinaryMatrix, destination, member_ids=None) -> None:
    write_text(membership_pairs_text(m, member_ids), destination)


def filter_min_degree(m: BinaryMatrix, min_members: int) -> BinaryMatrix:
    """Keep columns with at least ``min_members`` set bits."""
    if min_members < 0:
        raise DataError(f"min_members must be >= 0, got {min_members}")
    keep = np.flatnonzero(column_marginals(m) >= min_members)
    if keep.size == 0:
        raise AllColumnsDropped(f"no column has {min_members} or more members")
    if keep.size == m.n_cols:
        return m
    return m.select_columns(keep.tolist())
