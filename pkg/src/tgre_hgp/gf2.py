"""Dense bit-packed linear algebra over GF(2).

Rows are stored as little-endian bit fields in ``uint64`` words: bit ``j`` of a
row lives in word ``j // 64`` at position ``j % 64``. Bits past ``cols`` are
always zero. Elimination uses first-nonzero pivoting in column order, so every
result is deterministic.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

WORD = 64

__all__ = [
    "BinaryMatrix",
    "BitVector",
    "rank",
    "row_reduce",
    "nullspace_basis",
    "matmul",
    "matvec",
    "symplectic_inner",
    "read_matrix_text",
    "write_matrix_text",
    "min_weight_combination",
    "solve",
]


def _nwords(nbits: int) -> int:
    return (nbits + WORD - 1) // WORD


def _pack(dense: np.ndarray) -> np.ndarray:
    """Pack a 2-D 0/1 array into (rows, words) uint64."""
    rows, cols = dense.shape
    nw = _nwords(cols)
    padded = np.zeros((rows, nw * WORD), dtype=np.uint8)
    padded[:, :cols] = dense
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").reshape(rows, nw).astype(np.uint64)


def _unpack(data: np.ndarray, cols: int) -> np.ndarray:
    rows = data.shape[0]
    as_bytes = np.ascontiguousarray(data.astype("<u8")).view(np.uint8).reshape(rows, -1)
    return np.unpackbits(as_bytes, axis=1, bitorder="little", count=cols).astype(np.uint8)


class BitVector:
    """Immutable packed bit vector."""

    __slots__ = ("_len", "_data")

    def __init__(self, length: int, data: np.ndarray | None = None):
        if length < 0:
            raise ValueError("length must be nonnegative")
        self._len = int(length)
        if data is None:
            data = np.zeros(_nwords(length), dtype=np.uint64)
        data = np.asarray(data, dtype=np.uint64).reshape(_nwords(length))
        data.setflags(write=False)
        self._data = data

    @classmethod
    def from_bits(cls, bits: Iterable[int] | np.ndarray) -> BitVector:
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits, dtype=np.uint8).ravel()
        if arr.size and arr.max() > 1:
            raise ValueError("bits must be 0 or 1")
        return cls(arr.size, _pack(arr.reshape(1, -1))[0])

    @classmethod
    def zeros(cls, length: int) -> BitVector:
        return cls(length)

    @classmethod
    def unit(cls, length: int, index: int) -> BitVector:
        bits = np.zeros(length, dtype=np.uint8)
        bits[index] = 1
        return cls.from_bits(bits)

    def __len__(self) -> int:
        return self._len

    @property
    def data(self) -> np.ndarray:
        return self._data

    def to_array(self) -> np.ndarray:
        return _unpack(self._data.reshape(1, -1), self._len)[0]

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self._len:
            raise IndexError(i)
        return int((int(self._data[i // WORD]) >> (i % WORD)) & 1)

    def weight(self) -> int:
        return int(np.bitwise_count(self._data).sum())

    def any(self) -> bool:
        return bool(self._data.any())

    def __xor__(self, other: BitVector) -> BitVector:
        if len(other) != self._len:
            raise ValueError(f"length mismatch: {self._len} vs {len(other)}")
        return BitVector(self._len, self._data ^ other._data)

    def __and__(self, other: BitVector) -> BitVector:
        if len(other) != self._len:
            raise ValueError(f"length mismatch: {self._len} vs {len(other)}")
        return BitVector(self._len, self._data & other._data)

    def dot(self, other: BitVector) -> int:
        """Inner product mod 2."""
        if len(other) != self._len:
            raise ValueError(f"length mismatch: {self._len} vs {len(other)}")
        return int(np.bitwise_count(self._data & other._data).sum() & 1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self._len == other._len and bool(np.array_equal(self._data, other._data))

    def __hash__(self) -> int:
        return hash((self._len, self._data.tobytes()))

    def __repr__(self) -> str:
        return f"BitVector({''.join(map(str, self.to_array()))})"


class BinaryMatrix:
    """Immutable bit-packed matrix over GF(2)."""

    __slots__ = ("_rows", "_cols", "_data")

    def __init__(self, rows: int, cols: int, data: np.ndarray | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        self._rows = int(rows)
        self._cols = int(cols)
        nw = _nwords(cols)
        if data is None:
            data = np.zeros((rows, nw), dtype=np.uint64)
        data = np.array(data, dtype=np.uint64).reshape(rows, nw)
        if cols % WORD and nw:
            data[:, -1] &= np.uint64((1 << (cols % WORD)) - 1)
        data.setflags(write=False)
        self._data = data

    # construction

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[int]] | np.ndarray) -> BinaryMatrix:
        arr = np.asarray(dense, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise ValueError("entries must be 0 or 1")
        arr = arr.astype(np.uint8)
        return cls(arr.shape[0], arr.shape[1], _pack(arr))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BinaryMatrix:
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> BinaryMatrix:
        return cls.from_dense(np.eye(n, dtype=np.uint8)) if n else cls(0, 0)

    @classmethod
    def from_rows(cls, rows: Sequence[BitVector], cols: int | None = None) -> BinaryMatrix:
        if not rows:
            return cls(0, cols or 0)
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("rows have different lengths")
        return cls(len(rows), width, np.stack([r.data for r in rows]))

    # accessors

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return self._rows, self._cols

    @property
    def data(self) -> np.ndarray:
        return self._data

    def to_dense(self) -> np.ndarray:
        if self._rows == 0:
            return np.zeros((0, self._cols), dtype=np.uint8)
        return _unpack(self._data, self._cols)

    def row(self, i: int) -> BitVector:
        return BitVector(self._cols, self._data[i])

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self._rows and 0 <= j < self._cols):
            raise IndexError(ij)
        return int((int(self._data[i, j // WORD]) >> (j % WORD)) & 1)

    def row_weights(self) -> np.ndarray:
        return np.bitwise_count(self._data).sum(axis=1).astype(np.int64)

    def col_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=0).astype(np.int64)

    def is_zero(self) -> bool:
        return not self._data.any()

    @property
    def T(self) -> BinaryMatrix:
        return BinaryMatrix.from_dense(self.to_dense().T) if self._rows else BinaryMatrix(self._cols, 0)

    def transpose(self) -> BinaryMatrix:
        return self.T

    def hstack(self, other: BinaryMatrix) -> BinaryMatrix:
        if self._rows != other._rows:
            raise ValueError(f"row count mismatch: {self._rows} vs {other._rows}")
        return BinaryMatrix.from_dense(np.hstack([self.to_dense(), other.to_dense()]))

    def vstack(self, other: BinaryMatrix) -> BinaryMatrix:
        if self._cols != other._cols:
            raise ValueError(f"column count mismatch: {self._cols} vs {other._cols}")
        return BinaryMatrix(self._rows + other._rows, self._cols, np.vstack([self._data, other._data]))

    def kron(self, other: BinaryMatrix) -> BinaryMatrix:
        return BinaryMatrix.from_dense(np.kron(self.to_dense(), other.to_dense()))

    def __matmul__(self, other):
        if isinstance(other, BitVector):
            return matvec(self, other)
        return matmul(self, other)

    def __add__(self, other: BinaryMatrix) -> BinaryMatrix:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")
        return BinaryMatrix(self._rows, self._cols, self._data ^ other._data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._data, other._data))

    def __hash__(self) -> int:
        return hash((self._rows, self._cols, self._data.tobytes()))

    def __repr__(self) -> str:
        return f"BinaryMatrix({self._rows}x{self._cols})"

    def __str__(self) -> str:
        return "\n".join("".join(map(str, r)) for r in self.to_dense())


def _eliminate(data: np.ndarray, cols: int, track: np.ndarray | None = None) -> list[int]:
    """Reduce ``data`` in place to RREF; apply the same row ops to ``track``."""
    rows = data.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        w, b = divmod(c, WORD)
        colbits = (data[r:, w] >> np.uint64(b)) & np.uint64(1)
        hits = np.flatnonzero(colbits)
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            data[[r, p]] = data[[p, r]]
            if track is not None:
                track[[r, p]] = track[[p, r]]
        mask = ((data[:, w] >> np.uint64(b)) & np.uint64(1)).astype(bool)
        mask[r] = False
        if mask.any():
            data[mask] ^= data[r]
            if track is not None:
                track[mask] ^= track[r]
        pivots.append(c)
        r += 1
    return pivots


def rank(M: BinaryMatrix) -> int:
    """GF(2) rank. An empty matrix has rank 0."""
    if M.rows == 0 or M.cols == 0:
        return 0
    return len(_eliminate(M.data.copy(), M.cols))


def row_reduce(M: BinaryMatrix) -> tuple[BinaryMatrix, list[int], BinaryMatrix]:
    """Return ``(R, pivots, T)`` with ``R = T @ M`` in reduced row-echelon form."""
    data = M.data.copy()
    track = BinaryMatrix.identity(M.rows).data.copy() if M.rows else np.zeros((0, 0), dtype=np.uint64)
    pivots = _eliminate(data, M.cols, track) if M.rows else []
    return BinaryMatrix(M.rows, M.cols, data), pivots, BinaryMatrix(M.rows, M.rows, track)


def nullspace_basis(M: BinaryMatrix) -> BinaryMatrix:
    """Rows of the result span ``ker(M)``; there are ``cols - rank(M)`` of them."""
    n = M.cols
    if M.rows == 0:
        return BinaryMatrix.identity(n)
    R, pivots, _ = row_reduce(M)
    free = [c for c in range(n) if c not in set(pivots)]
    if not free:
        return BinaryMatrix(0, n)
    dense = R.to_dense()[: len(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    basis[np.arange(len(free)), free] = 1
    if pivots:
        basis[:, pivots] = dense[:, free].T
    return BinaryMatrix.from_dense(basis)


def matmul(A: BinaryMatrix, B: BinaryMatrix) -> BinaryMatrix:
    """Exact product over GF(2)."""
    if A.cols != B.rows:
        raise ValueError(f"inner dimensions disagree: {A.shape} @ {B.shape}")
    out = np.zeros((A.rows, _nwords(B.cols)), dtype=np.uint64)
    if A.rows and B.rows:
        adense = A.to_dense().astype(bool)
        for t in np.flatnonzero(adense.any(axis=0)):
            out[adense[:, t]] ^= B.data[t]
    return BinaryMatrix(A.rows, B.cols, out)


def matvec(A: BinaryMatrix, v: BitVector) -> BitVector:
    if A.cols != len(v):
        raise ValueError(f"inner dimensions disagree: {A.shape} @ ({len(v)},)")
    if A.rows == 0:
        return BitVector(0)
    parity = np.bitwise_count(A.data & v.data).sum(axis=1) & 1
    return BitVector.from_bits(parity.astype(np.uint8))


def symplectic_inner(a, b) -> int:
    """``a_x . b_z + a_z . b_x`` mod 2; zero iff the Paulis commute.

    Accepts anything with ``x`` and ``z`` BitVector attributes (PauliVector).
    """
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")
    return a.x.dot(b.z) ^ a.z.dot(b.x)


def read_matrix_text(text: str) -> BinaryMatrix:
    """Parse the fixture format: ``rows cols`` then one 0/1 line per row."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    try:
        rows, cols = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"line 1: expected 'rows cols', got {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != rows:
        raise ValueError(f"expected {rows} rows, found {len(body)}")
    dense = np.zeros((rows, cols), dtype=np.uint8)
    for i, ln in enumerate(body):
        if len(ln) != cols or set(ln) - {"0", "1"}:
            raise ValueError(f"line {i + 2}: expected {cols} characters of 0/1")
        dense[i] = np.frombuffer(ln.encode(), dtype=np.uint8) - ord("0")
    return BinaryMatrix(rows, cols, _pack(dense)) if rows else BinaryMatrix(0, cols)


def write_matrix_text(M: BinaryMatrix) -> str:
    lines = [f"{M.rows} {M.cols}"]
    lines.extend("".join(map(str, r)) for r in M.to_dense())
    return "\n".join(lines) + "\n"


def min_weight_combination(basis: BinaryMatrix, tags: BinaryMatrix | None = None, table_bits: int = 16) -> int | None:
    """Minimum Hamming weight over nonzero combinations of ``basis`` rows.

    With ``tags`` (one tag row per basis row, combined linearly alongside),
    only combinations whose combined tag is nonzero are eligible. Returns
    ``None`` when no combination qualifies. Cost is ``2**basis.rows``.
    """
    k = basis.rows
    if k == 0:
        return None
    if tags is not None and tags.rows != k:
        raise ValueError("need exactly one tag row per basis row")
    lo = min(k, table_bits)

    def span_table(rows: np.ndarray) -> np.ndarray:
        table = np.zeros((1 << lo, rows.shape[1]), dtype=np.uint64)
        for i in range(lo):
            table[1 << i : 2 << i] = table[: 1 << i] ^ rows[i]
        return table

    vec_table = span_table(basis.data)
    tag_table = span_table(tags.data) if tags is not None else None
    offset = np.zeros(basis.data.shape[1], dtype=np.uint64)
    tag_offset = np.zeros(tags.data.shape[1], dtype=np.uint64) if tags is not None else None

    best: int | None = None
    for h in range(1 << (k - lo)):
        if h:
            # Gray-code step: flip the high basis row at the lowest set bit of h
            j = lo + (h & -h).bit_length() - 1
            offset ^= basis.data[j]
            if tags is not None:
                tag_offset ^= tags.data[j]
        weights = np.bitwise_count(vec_table ^ offset).sum(axis=1)
        valid = np.ones(weights.size, dtype=bool)
        if h == 0:
            valid[0] = False
        if tag_table is not None:
            valid &= (tag_table ^ tag_offset).any(axis=1)
        if valid.any():
            w = int(weights[valid].min())
            best = w if best is None else min(best, w)
    return best


def solve(M: BinaryMatrix, s: BitVector) -> BitVector | None:
    """Some ``x`` with ``M x = s`` (free variables zero), or ``None`` if inconsistent."""
    if len(s) != M.rows:
        raise ValueError(f"right-hand side has length {len(s)}, matrix has {M.rows} rows")
    R, pivots, T = row_reduce(M)
    t = matvec(T, s).to_array() if M.rows else np.zeros(0, dtype=np.uint8)
    if t[len(pivots) :].any():
        return None
    x = np.zeros(M.cols, dtype=np.uint8)
    x[pivots] = t[: len(pivots)]
    return BitVector.from_bits(x)
