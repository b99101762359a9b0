"""Rateless QC-LDPC construction: index matrices, parity checks, systematic generators.

The parity-check matrix is assembled from two block grids: a grid of cyclically
shifted identity blocks whose shifts come from products of prime powers, and a
bidiagonal staircase of plain identity blocks that keeps the matrix full rank.
Each retransmission attempt draws fresh exponents, producing a new code for the
same information frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gf2 import BinaryMatrix, ColumnPermutation, gf2_eliminate


class CodeConstructionError(Exception):
    """Generator derivation failed; carries the rank that was achieved."""

    def __init__(self, message: str, rank: int):
        super().__init__(message)
        self.rank = rank


def _is_prime(k: int) -> bool:
    if k < 2:
        return False
    d = 2
    while d * d <= k:
        if k % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class IndexMatrixParams:
    """Exponent bases and spans for the shift-index matrix."""

    a: int = 3
    b: int = 7
    x: int = 0
    y: int = 0
    m: int = 4
    n: int = 4

    def __post_init__(self):
        if not (_is_prime(self.a) and _is_prime(self.b)):
            raise ValueError("a and b must be prime")
        if self.a == self.b:
            raise ValueError("a and b must differ")
        if self.m < 0 or self.n < 0 or self.x < 0 or self.y < 0:
            raise ValueError("m, n, x, y must be non-negative")


@dataclass(frozen=True)
class CodeConfig:
    """Block size, index-matrix parameters, and the exponent sampling range."""

    z: int = 131
    params: IndexMatrixParams = field(default_factory=IndexMatrixParams)
    exponent_range: tuple[int, int] = (0, 9)

    def __post_init__(self):
        if self.z < 1:
            raise ValueError("block size z must be >= 1")
        lo, hi = self.exponent_range
        if lo > hi or lo < 0:
            raise ValueError("exponent_range must be a non-empty interval of non-negative ints")

    @property
    def n_bits(self) -> int:
        """Codeword length N = (m + n + 2) z."""
        return (self.params.m + self.params.n + 2) * self.z

    @property
    def m_bits(self) -> int:
        """Parity length M = (n + 1) z."""
        return (self.params.n + 1) * self.z

    @property
    def k_bits(self) -> int:
        return self.n_bits - self.m_bits


@dataclass(frozen=True)
class Frame:
    """Information frame of exactly N - M bits."""

    info_bits: np.ndarray

    def __post_init__(self):
        bits = np.ascontiguousarray(self.info_bits, dtype=np.uint8)
        if bits.ndim != 1 or (bits.size and bits.max() > 1):
            raise ValueError("info_bits must be a 1-D 0/1 sequence")
        object.__setattr__(self, "info_bits", bits)

    def __len__(self) -> int:
        return int(self.info_bits.size)


@dataclass
class CodeInstance:
    """One generated code: permuted sparse H, systematic G, and the column map.

    h has its columns reordered so that positions [0, M) are the parity block
    and [M, N) the systematic information block; g = [Q^T | I] in that same
    order.  perm maps a position in this order back to the column of the
    as-constructed [H1 | H2] matrix.
    """

    h: BinaryMatrix
    g: BinaryMatrix
    perm: ColumnPermutation
    attempt_id: int = 0
    exponents: tuple[int, int] = (0, 0)
    _tanner: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def n_bits(self) -> int:
        return self.h.cols

    @property
    def m_bits(self) -> int:
        return self.h.rows

    def tanner(self):
        """CSR-style adjacency of h: (chk_ptr, chk_var, var_ptr, var_edge)."""
        if self._tanner is None:
            dense = self.h.to_dense()
            rows, cols = np.nonzero(dense)
            chk_var = cols.astype(np.int32)
            deg = np.bincount(rows, minlength=self.h.rows)
            chk_ptr = np.zeros(self.h.rows + 1, dtype=np.int32)
            np.cumsum(deg, out=chk_ptr[1:])
            var_edge = np.argsort(chk_var, kind="stable").astype(np.int32)
            vdeg = np.bincount(chk_var, minlength=self.h.cols)
            if (vdeg == 0).any() or (deg == 0).any():
                raise ValueError("Tanner graph has an isolated node")
            var_ptr = np.zeros(self.h.cols + 1, dtype=np.int32)
            np.cumsum(vdeg, out=var_ptr[1:])
            self._tanner = (chk_ptr, chk_var, var_ptr, var_edge)
        return self._tanner


def sample_exponents(seed: int, frame_id: int, attempt: int, exponent_range: tuple[int, int], retry: int = 0):
    """Deterministic uniform draw of (x, y) for one (frame, attempt) pair."""
    lo, hi = exponent_range
    if lo > hi:
        raise ValueError("exponent_range must be non-empty")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(frame_id, attempt, retry))
    rng = np.random.Generator(np.random.PCG64(ss))
    x, y = rng.integers(lo, hi + 1, size=2)
    return int(x), int(y)


def build_index_matrix(params: IndexMatrixParams) -> np.ndarray:
    """(n+1) x (m+1) matrix with entry (i, j) = a^(x+j) * b^(y+i), exact integers."""
    out = np.empty((params.n + 1, params.m + 1), dtype=object)
    for i in range(params.n + 1):
        for j in range(params.m + 1):
            out[i, j] = params.a ** (params.x + j) * params.b ** (params.y + i)
    return out


def _shift_matrix(params: IndexMatrixParams, z: int) -> np.ndarray:
    """Index-matrix entries reduced mod z via modular exponentiation."""
    out = np.empty((params.n + 1, params.m + 1), dtype=np.int64)
    for i in range(params.n + 1):
        for j in range(params.m + 1):
            out[i, j] = pow(params.a, params.x + j, z) * pow(params.b, params.y + i, z) % z
    return out


def build_parity_check(cfg: CodeConfig) -> BinaryMatrix:
    """H = [H1 | H2]: shifted-identity grid next to the identity staircase.

    H1 block (i, j) is the z x z circulant with shift a^(x+j) b^(y+i) mod z.
    H2 places I on the block diagonal and on the block superdiagonal with no
    wraparound, so its square is unitriangular and H always has full row rank.
    """
    z = cfg.z
    p = cfg.params
    shifts = _shift_matrix(p, z)
    rows_b, cols_b = p.n + 1, p.m + 1
    dense = np.zeros((rows_b * z, cfg.n_bits), dtype=np.uint8)
    eye = np.eye(z, dtype=np.uint8)
    for i in range(rows_b):
        for j in range(cols_b):
            blk = np.roll(eye, int(shifts[i, j]) % z, axis=1)
            dense[i * z : (i + 1) * z, j * z : (j + 1) * z] = blk
    h2_off = cols_b * z
    for i in range(rows_b):
        dense[i * z : (i + 1) * z, h2_off + i * z : h2_off + (i + 1) * z] = eye
        if i + 1 < rows_b:
            dense[i * z : (i + 1) * z, h2_off + (i + 1) * z : h2_off + (i + 2) * z] = eye
    return BinaryMatrix.from_dense(dense)


def derive_generator(h: BinaryMatrix, attempt_id: int = 0, exponents: tuple[int, int] = (0, 0)) -> CodeInstance:
    """Systematic generator G = [Q^T | I] for h, with the column map recorded.

    Pivots are preferred in the trailing rows-many columns (the staircase block
    of a constructed H), which puts the information bits on the well-connected
    shifted-identity columns; elimination falls back to earlier columns when
    needed and the permutation records whatever order resulted.
    """
    m, n = h.rows, h.cols
    order = np.concatenate([np.arange(n - m, n), np.arange(n - m)])
    standard, elim_perm, rank = gf2_eliminate(h.permute_cols(order))
    if rank < m:
        raise CodeConstructionError(f"parity-check matrix has rank {rank} < {m}", rank)
    mapping = order[elim_perm.mapping]
    q_dense = standard.to_dense()[:, m:]
    k = n - m
    g_dense = np.zeros((k, n), dtype=np.uint8)
    g_dense[:, :m] = q_dense.T
    g_dense[:, m:] = np.eye(k, dtype=np.uint8)
    return CodeInstance(
        h=h.permute_cols(mapping),
        g=BinaryMatrix.from_dense(g_dense),
        perm=ColumnPermutation(mapping),
        attempt_id=attempt_id,
        exponents=exponents,
    )


def encode_frame(inst: CodeInstance, frame: Frame) -> np.ndarray:
    """Codeword c = u G, laid out as [parity (M bits) | info (N - M bits)]."""
    k = inst.n_bits - inst.m_bits
    if len(frame) != k:
        raise ValueError(f"frame length {len(frame)} != {k}")
    sel = frame.info_bits.astype(bool)
    if sel.any():
        acc = np.bitwise_xor.reduce(inst.g.words[sel], axis=0)
    else:
        acc = np.zeros(inst.g.words.shape[1], dtype=np.uint64)
    row = BinaryMatrix(1, inst.n_bits, acc[None, :])
    return row.to_dense()[0]


@lru_cache(maxsize=256)
def build_instance(cfg: CodeConfig, x: int, y: int, attempt_id: int = 0) -> CodeInstance:
    """Construct H and G from explicit initial exponents.

    Instances are cached: exponents are drawn from a small range, so the
    rateless loop revisits the same few codes constantly and each carries its
    precomputed Tanner adjacency.  Treat returned instances as immutable.
    """
    from dataclasses import replace

    params = replace(cfg.params, x=x, y=y)
    h = build_parity_check(CodeConfig(z=cfg.z, params=params, exponent_range=cfg.exponent_range))
    return derive_generator(h, attempt_id=attempt_id, exponents=(x, y))


def instance_for_attempt(cfg: CodeConfig, seed: int, frame_id: int, attempt: int, max_retries: int = 16) -> CodeInstance:
    """Draw exponents for this (frame, attempt) and build the code.

    Rank-deficient draws are resampled up to max_retries times before the
    construction error is surfaced.  With the staircase block H is always full
    rank, so retries exist as a guard for nonstandard configurations.
    """
    last: CodeConstructionError | None = None
    for retry in range(max_retries + 1):
        x, y = sample_exponents(seed, frame_id, attempt, cfg.exponent_range, retry=retry)
        try:
            return build_instance(cfg, x, y)
        except CodeConstructionError as err:
            last = err
    raise last  # type: ignore[misc]
