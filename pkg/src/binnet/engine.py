"""Bit-packed binary matrices and all-pairs contingency counting.

Columns are stored as rows of 64-bit words, so counting co-occurrences of a
column pair is an AND followed by a popcount over ``ceil(N / 64)`` words.
``all_pairs`` does this for every pair, Theta(K^2 * N / 64) word operations.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import DataError, IndexOutOfRange, SamePair, UnsupportedKind
from .measures import (
    KERNELS,
    AssociationWeight,
    ContingencyCounts,
    MeasureKind,
)

WORD_BITS = 64


class BinaryMatrix:
    """Immutable N x K 0/1 matrix, bit-packed by column.

    ``words[k]`` holds column ``k``; bit ``r % 64`` of word ``r // 64`` is
    row ``r`` (little-endian bit order).  Padding bits past row N are zero.
    """

    __slots__ = ("_words", "_n_rows", "_labels", "_counts")

    def __init__(self, words: np.ndarray, n_rows: int, labels: Sequence[str]):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        labels = tuple(str(s) for s in labels)
        if n_rows < 1 or len(labels) < 1:
            raise DataError("a binary matrix needs at least one row and one column")
        if words.ndim != 2 or words.shape != (len(labels), _n_words(n_rows)):
            raise DataError(f"word array shape {words.shape} does not fit {n_rows} rows x {len(labels)} columns")
        if any(not s for s in labels):
            raise DataError("column labels must be non-empty")
        if len(set(labels)) != len(labels):
            seen = set()
            dup = next(s for s in labels if s in seen or seen.add(s))
            raise DataError(f"duplicate column label {dup!r}")
        tail = n_rows % WORD_BITS
        if tail and np.any(words[:, -1] >> np.uint64(tail)):
            raise DataError("padding bits beyond the last row must be zero")
        words.setflags(write=False)
        self._words = words
        self._n_rows = int(n_rows)
        self._labels = labels
        counts = np.bitwise_count(words).sum(axis=1, dtype=np.int64)
        counts.setflags(write=False)
        self._counts = counts

    @classmethod
    def from_dense(cls, dense, labels: Sequence[str] | None = None) -> "BinaryMatrix":
        arr = np.asarray(dense)
        if arr.ndim != 2:
            raise DataError(f"expected a 2-d array, got shape {arr.shape}")
        if arr.dtype != bool:
            if not np.isin(arr, (0, 1)).all():
                raise DataError("matrix entries must be 0 or 1")
            arr = arr.astype(bool)
        n, k = arr.shape
        if labels is None:
            labels = [f"v{c}" for c in range(k)]
        if len(labels) != k:
            raise DataError(f"{len(labels)} labels for {k} columns")
        n_words = _n_words(n)
        packed = np.packbits(arr.T, axis=1, bitorder="little")
        buf = np.zeros((k, n_words * 8), dtype=np.uint8)
        buf[:, : packed.shape[1]] = packed
        words = buf.view("<u8").astype(np.uint64)
        return cls(words, n, labels)

    @property
    def n_rows(self) -> int:
        return self._n_rows

    @property
    def n_cols(self) -> int:
        return len(self._labels)

    @property
    def shape(self) -> tuple[int, int]:
        return self._n_rows, len(self._labels)

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def words(self) -> np.ndarray:
        return self._words

    def to_dense(self) -> np.ndarray:
        as_bytes = self._words.astype("<u8").view(np.uint8).reshape(self.n_cols, -1)
        bits = np.unpackbits(as_bytes, axis=1, count=self._n_rows, bitorder="little")
        return bits.T.astype(bool)

    def column(self, k: int) -> np.ndarray:
        self._check_index(k)
        as_bytes = self._words[k].astype("<u8").view(np.uint8)
        return np.unpackbits(as_bytes, count=self._n_rows, bitorder="little").astype(bool)

    def select_columns(self, cols: Sequence[int]) -> "BinaryMatrix":
        cols = list(cols)
        for k in cols:
            self._check_index(k)
        return BinaryMatrix(self._words[cols], self._n_rows, [self._labels[k] for k in cols])

    def _check_index(self, k: int) -> None:
        if not 0 <= k < self.n_cols:
            raise IndexOutOfRange(f"column index {k} out of range for {self.n_cols} columns")

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return (
            self._n_rows == other._n_rows
            and self._labels == other._labels
            and np.array_equal(self._words, other._words)
        )

    def __hash__(self):
        return hash((self._n_rows, self._labels, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BinaryMatrix(n_rows={self._n_rows}, n_cols={self.n_cols})"


def _n_words(n_rows: int) -> int:
    return max(1, -(-n_rows // WORD_BITS))


# -- pair indexing ------------------------------------------------------------

def n_pairs(k: int) -> int:
    return k * (k - 1) // 2


def pair_index(i: int, j: int, k: int) -> int:
    """Position of pair ``(i, j)``, i < j, in lexicographic pair order."""
    if i > j:
        i, j = j, i
    return i * (2 * k - i - 1) // 2 + (j - i - 1)


def pair_arrays(k: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(k, 1)


# -- weight table --------------------------------------------------------------

@dataclass(frozen=True)
class WeightTable:
    n_cols: int
    kind: MeasureKind
    values: np.ndarray
    degenerate: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (n_pairs(self.n_cols),):
            raise ValueError(f"expected {n_pairs(self.n_cols)} values, got shape {values.shape}")
        deg = self.degenerate
        deg = np.zeros(values.shape, dtype=bool) if deg is None else np.asarray(deg, dtype=bool)
        if deg.shape != values.shape:
            raise ValueError("degenerate flags must align with values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "degenerate", deg)

    def __len__(self) -> int:
        return self.values.shape[0]

    def get(self, i: int, j: int) -> float:
        return float(self.values[pair_index(i, j, self.n_cols)])

    def is_degenerate(self, i: int, j: int) -> bool:
        return bool(self.degenerate[pair_index(i, j, self.n_cols)])

    def weights(self) -> Iterator[AssociationWeight]:
        ii, jj = pair_arrays(self.n_cols)
        for i, j, v, d in zip(ii.tolist(), jj.tolist(), self.values.tolist(), self.degenerate.tolist()):
            yield AssociationWeight(i, j, self.kind, v, d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightTable):
            return NotImplemented
        return (
            self.n_cols == other.n_cols
            and self.kind == other.kind
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.degenerate, other.degenerate)
        )

    __hash__ = None


# -- counting ------------------------------------------------------------------

def column_marginals(m: BinaryMatrix) -> np.ndarray:
    return m._counts.copy()


def pair_counts(m: BinaryMatrix, i: int, j: int) -> ContingencyCounts:
    m._check_index(i)
    m._check_index(j)
    if i == j:
        raise SamePair(f"pair ({i}, {j}) uses the same column twice")
    words = m.words
    n11 = int(np.bitwise_count(words[i] & words[j]).sum(dtype=np.int64))
    n10 = int(m._counts[i]) - n11
    n01 = int(m._counts[j]) - n11
    n00 = m.n_rows - n11 - n10 - n01
    return ContingencyCounts(n00, n01, n10, n11, m.n_rows)


def _row_blocks(k: int, parts: int) -> list[tuple[int, int]]:
    """Split rows 0..k-2 of the upper triangle into contiguous blocks of
    roughly equal pair count."""
    total = n_pairs(k)
    if parts <= 1 or total == 0:
        return [(0, max(k - 1, 0))]
    starts = np.array([pair_index(i, i + 1, k) for i in range(k - 1)])
    cuts = np.searchsorted(starts, np.linspace(0, total, parts + 1)[1:-1])
    bounds = [0, *sorted(set(int(c) for c in cuts)), k - 1]
    return [(a, b) for a, b in zip(bounds, bounds[1:]) if b > a]


def cooccurrence_counts(m: BinaryMatrix, threads: int | None = None) -> np.ndarray:
    """n11 for every pair in canonical order, as int64."""
    k = m.n_cols
    words = m.words
    out = np.empty(n_pairs(k), dtype=np.int64)

    def sweep(block: tuple[int, int]) -> None:
        lo, hi = block
        for i in range(lo, hi):
            start = pair_index(i, i + 1, k)
            inter = np.bitwise_and(words[i + 1 :], words[i])
            out[start : start + k - 1 - i] = np.bitwise_count(inter).sum(axis=1, dtype=np.int64)

    blocks = _row_blocks(k, threads or 1)
    if len(blocks) <= 1:
        for b in blocks:
            sweep(b)
    else:
        # disjoint output slices; integer results do not depend on schedule
        with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
            list(pool.map(sweep, blocks))
    return out


def all_pair_counts(m: BinaryMatrix, threads: int | None = None) -> tuple[np.ndarray, ...]:
    """(n00, n01, n10, n11) arrays over canonical pair order."""
    ii, jj = pair_arrays(m.n_cols)
    n11 = cooccurrence_counts(m, threads)
    n10 = m._counts[ii] - n11
    n01 = m._counts[jj] - n11
    n00 = m.n_rows - n11 - n10 - n01
    return n00, n01, n10, n11


def all_pairs(m: BinaryMatrix, kind: MeasureKind, threads: int | None = None) -> WeightTable:
    if kind not in KERNELS:
        raise UnsupportedKind(f"{kind.value} weights come from conditional_edge_weights, not all_pairs")
    n = m.n_rows
    n00, n01, n10, n11 = all_pair_counts(m, threads)
    values, degenerate = KERNELS[kind](n00 / n, n01 / n, n10 / n, n11 / n)
    return WeightTable(m.n_cols, kind, values, degenerate)
