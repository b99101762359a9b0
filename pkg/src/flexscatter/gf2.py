"""Bit-packed GF(2) matrices and the linear algebra used for code construction.

Rows are stored as little-endian 64-bit words (column ``j`` lives in word
``j >> 6``, bit ``j & 63``), which makes row XOR during Gaussian elimination a
handful of vectorized word operations instead of per-entry work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InvalidDimensionError(ValueError):
    """Matrix dimensions do not admit the requested operation."""


@dataclass(frozen=True)
class ColumnPermutation:
    """Column reordering: position k of the permuted matrix holds original column mapping[k]."""

    mapping: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mapping, dtype=np.int64)
        if sorted(m.tolist()) != list(range(m.size)):
            raise ValueError("mapping must be a bijection on [0, cols)")
        object.__setattr__(self, "mapping", m)

    @property
    def size(self) -> int:
        return int(self.mapping.size)

    def inverse(self) -> "ColumnPermutation":
        inv = np.empty_like(self.mapping)
        inv[self.mapping] = np.arange(self.mapping.size, dtype=np.int64)
        return ColumnPermutation(inv)


class BinaryMatrix:
    """Dense bit-packed matrix over GF(2)."""

    def __init__(self, rows: int, cols: int, words: np.ndarray | None = None):
        if rows < 1 or cols < 1:
            raise InvalidDimensionError(f"need rows, cols >= 1, got {rows}x{cols}")
        self.rows = int(rows)
        self.cols = int(cols)
        wpr = (self.cols + 63) >> 6
        if words is None:
            words = np.zeros((self.rows, wpr), dtype=np.uint64)
        if words.shape != (self.rows, wpr):
            raise InvalidDimensionError("word storage does not match dimensions")
        self.words = words

    @classmethod
    def from_dense(cls, arr) -> "BinaryMatrix":
        a = np.asarray(arr, dtype=np.uint8)
        if a.ndim != 2:
            raise InvalidDimensionError("expected a 2-D array")
        if a.size and a.max() > 1:
            raise ValueError("entries must be 0 or 1")
        rows, cols = a.shape
        wpr = (cols + 63) >> 6
        padded = np.zeros((rows, wpr * 64), dtype=np.uint8)
        padded[:, :cols] = a
        packed = np.packbits(padded, axis=1, bitorder="little")
        return cls(rows, cols, np.ascontiguousarray(packed).view(np.uint64))

    @classmethod
    def identity(cls, n: int) -> "BinaryMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    def to_dense(self) -> np.ndarray:
        as_bytes = np.ascontiguousarray(self.words).view(np.uint8)
        bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
        return bits[:, : self.cols]

    def copy(self) -> "BinaryMatrix":
        return BinaryMatrix(self.rows, self.cols, self.words.copy())

    def get(self, i: int, j: int) -> int:
        return int(self.words[i, j >> 6] >> np.uint64(j & 63)) & 1

    def set(self, i: int, j: int, value: int) -> None:
        w = int(self.words[i, j >> 6])
        mask = 1 << (j & 63)
        self.words[i, j >> 6] = np.uint64(w | mask if value else w & ~mask)

    def column_bits(self, j: int) -> np.ndarray:
        """All rows' bits of column j as a uint64 0/1 vector."""
        return (self.words[:, j >> 6] >> np.uint64(j & 63)) & np.uint64(1)

    def transpose(self) -> "BinaryMatrix":
        return BinaryMatrix.from_dense(self.to_dense().T)

    def permute_cols(self, mapping) -> "BinaryMatrix":
        m = mapping.mapping if isinstance(mapping, ColumnPermutation) else np.asarray(mapping)
        if m.size != self.cols:
            raise InvalidDimensionError("permutation length must equal cols")
        return BinaryMatrix.from_dense(self.to_dense()[:, m])

    def to_ascii(self) -> str:
        dense = self.to_dense()
        return "\n".join("".join("1" if b else "0" for b in row) for row in dense) + "\n"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinaryMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.words, other.words)
        )

    def __repr__(self) -> str:
        return f"BinaryMatrix({self.rows}x{self.cols})"


def circulant_identity(z: int, shift: int) -> BinaryMatrix:
    """z x z matrix whose row i has its single 1 at column (i + shift) mod z."""
    if z < 1:
        raise InvalidDimensionError(f"block size must be >= 1, got {z}")
    eye = np.eye(z, dtype=np.uint8)
    return BinaryMatrix.from_dense(np.roll(eye, shift % z, axis=1))


def gf2_mul(a: BinaryMatrix, b: BinaryMatrix) -> BinaryMatrix:
    """Matrix product over GF(2) via AND + popcount parity on packed rows."""
    if a.cols != b.rows:
        raise InvalidDimensionError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    bt = b.transpose()
    out = np.empty((a.rows, b.cols), dtype=np.uint8)
    # Block over rows of a to bound the (block x b.cols x words) intermediate.
    step = max(1, (1 << 22) // max(1, b.cols * a.words.shape[1] * 8))
    for r0 in range(0, a.rows, step):
        blk = a.words[r0 : r0 + step]
        counts = np.bitwise_count(blk[:, None, :] & bt.words[None, :, :])
        out[r0 : r0 + step] = counts.sum(axis=2, dtype=np.int64) & 1
    return BinaryMatrix.from_dense(out)


def gf2_eliminate(h: BinaryMatrix, track_ops: bool = False):
    """Row-reduce h to standard form [I | Q] up to a column permutation.

    Columns are scanned left to right; a column with no available pivot is
    skipped (it is permuted behind the pivot columns in the result).  Rank
    deficiency is reported through the returned rank, never raised.

    Returns (standard, perm, rank) or, with track_ops, (standard, perm, rank,
    ops) where ops is the invertible row-operation matrix satisfying
    standard = ops . h[:, perm.mapping].
    """
    if h.rows > h.cols:
        raise InvalidDimensionError("elimination expects rows <= cols")
    work = h.copy()
    ops = BinaryMatrix.identity(h.rows) if track_ops else None
    pivot_cols: list[int] = []
    r = 0
    for j in range(h.cols):
        col = work.column_bits(j)
        below = np.nonzero(col[r:])[0]
        if below.size == 0:
            continue
        p = r + int(below[0])
        if p != r:
            work.words[[r, p]] = work.words[[p, r]]
            if ops is not None:
                ops.words[[r, p]] = ops.words[[p, r]]
            col = work.column_bits(j)
        sel = col.astype(bool)
        sel[r] = False
        if sel.any():
            work.words[sel] ^= work.words[r]
            if ops is not None:
                ops.words[sel] ^= ops.words[r]
        pivot_cols.append(j)
        r += 1
        if r == h.rows:
            break
    pivot_set = set(pivot_cols)
    mapping = np.array(pivot_cols + [j for j in range(h.cols) if j not in pivot_set], dtype=np.int64)
    perm = ColumnPermutation(mapping)
    standard = work.permute_cols(perm)
    if track_ops:
        return standard, perm, r, ops
    return standard, perm, r
