"""Stabilizer bookkeeping for CSS codes: Paulis, syndromes, logicals, distance.

Syndrome convention: ``s_x = H_X e_z`` (X-type stabilizers see the Z part of
an error) and ``s_z = H_Z e_x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gf2 import (
    BinaryMatrix,
    BitVector,
    matmul,
    matvec,
    min_weight_combination,
    nullspace_basis,
    rank,
    row_reduce,
    symplectic_inner,
)
from .hgp import CssCode

DEFAULT_DISTANCE_CAP = 24

_PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


@dataclass(frozen=True)
class PauliVector:
    """Symplectic Pauli: qubit ``i`` carries Y iff bit ``i`` is set in both parts."""

    x: BitVector
    z: BitVector

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise ValueError(f"x part has {len(self.x)} qubits, z part {len(self.z)}")

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def identity(cls, n: int) -> PauliVector:
        return cls(BitVector.zeros(n), BitVector.zeros(n))

    @classmethod
    def from_arrays(cls, x, z) -> PauliVector:
        return cls(BitVector.from_bits(np.asarray(x, dtype=np.uint8)), BitVector.from_bits(np.asarray(z, dtype=np.uint8)))

    @classmethod
    def x_type(cls, bits) -> PauliVector:
        v = BitVector.from_bits(np.asarray(bits, dtype=np.uint8))
        return cls(v, BitVector.zeros(len(v)))

    @classmethod
    def z_type(cls, bits) -> PauliVector:
        v = BitVector.from_bits(np.asarray(bits, dtype=np.uint8))
        return cls(BitVector.zeros(len(v)), v)

    @classmethod
    def single(cls, n: int, qubit: int, pauli: str) -> PauliVector:
        xb, zb = _PAULI_BITS[pauli]
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        x[qubit], z[qubit] = xb, zb
        return cls.from_arrays(x, z)

    @classmethod
    def from_string(cls, label: str) -> PauliVector:
        bits = [_PAULI_BITS[c] for c in label.upper()]
        return cls.from_arrays([b[0] for b in bits], [b[1] for b in bits])

    def __str__(self) -> str:
        lut = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
        return "".join(lut[(int(a), int(b))] for a, b in zip(self.x.to_array(), self.z.to_array()))

    def __xor__(self, other: PauliVector) -> PauliVector:
        return PauliVector(self.x ^ other.x, self.z ^ other.z)

    def weight(self) -> int:
        return int(np.bitwise_count(self.x.data | self.z.data).sum())

    def is_identity(self) -> bool:
        return not (self.x.any() or self.z.any())


@dataclass(frozen=True)
class Syndrome:
    s_x: BitVector
    s_z: BitVector

    def is_zero(self) -> bool:
        return not (self.s_x.any() or self.s_z.any())


@dataclass(frozen=True)
class LogicalSet:
    logical_x: tuple[PauliVector, ...]
    logical_z: tuple[PauliVector, ...]

    @property
    def k(self) -> int:
        return len(self.logical_x)

    def x_matrix(self) -> BinaryMatrix:
        """X parts of the logical X operators, one per row."""
        return BinaryMatrix.from_rows([p.x for p in self.logical_x], cols=self._n())

    def z_matrix(self) -> BinaryMatrix:
        """Z parts of the logical Z operators, one per row."""
        return BinaryMatrix.from_rows([p.z for p in self.logical_z], cols=self._n())

    def _n(self) -> int:
        return self.logical_x[0].n if self.logical_x else 0

    def pairing_matrix(self) -> np.ndarray:
        k = self.k
        out = np.zeros((k, k), dtype=np.uint8)
        for i, lx in enumerate(self.logical_x):
            for j, lz in enumerate(self.logical_z):
                out[i, j] = symplectic_inner(lx, lz)
        return out

    def verify(self, code: CssCode) -> dict[str, bool]:
        """The three LogicalSet invariants plus the pair count."""
        ops = list(self.logical_x) + list(self.logical_z)
        # commutation with every stabilizer: H_Z . x-part = 0 and H_X . z-part = 0
        commute = all(not matvec(code.hz, p.x).any() and not matvec(code.hx, p.z).any() for p in ops)
        pairing = bool(np.array_equal(self.pairing_matrix(), np.eye(self.k, dtype=np.uint8)))
        stab_x = code.hx.vstack(BinaryMatrix.zeros(code.hz.rows, code.N))
        stab_z = BinaryMatrix.zeros(code.hx.rows, code.N).vstack(code.hz)
        stab = stab_x.hstack(stab_z)
        r = rank(stab)
        outside = all(
            rank(stab.vstack(BinaryMatrix.from_dense(np.concatenate([p.x.to_array(), p.z.to_array()])[None, :]))) > r
            for p in ops
        )
        return {
            "count": self.k == code.k,
            "commute": commute,
            "pairing": pairing,
            "outside_stabilizer": outside,
        }


class LogicalExtractionError(RuntimeError):
    """Standard form produced a logical count inconsistent with the ranks."""


def _column_perm_to_front(pivots: list[int], cols: list[int]) -> list[int]:
    pivot_set = set(pivots)
    return list(pivots) + [c for c in cols if c not in pivot_set]


def standard_form(code: CssCode) -> LogicalSet:
    """Logical operators read off the standard form of the check matrix.

    With columns permuted so that H_X = [I_r A1 A2] and H_Z = [D I_s E]
    (blocks of widths r, s, k), the logicals are X = (0 E^T I_k | 0) and
    Z = (0 | A2^T 0 I_k); they are mapped back to the original qubit order.
    """
    n = code.N
    if not code.is_css():
        raise ValueError("check matrices do not commute")

    rx, px, _ = row_reduce(code.hx)
    r = len(px)
    perm = _column_perm_to_front(px, list(range(n)))
    hx_p = rx.to_dense()[:r][:, perm]

    hz_p = code.hz.to_dense()[:, perm]
    tail = BinaryMatrix.from_dense(hz_p[:, r:]) if hz_p.shape[0] else BinaryMatrix(0, n - r)
    _, pz, tz = row_reduce(tail)
    s = len(pz)
    hz_p = matmul(tz, BinaryMatrix.from_dense(hz_p)).to_dense()[:s] if s else np.zeros((0, n), dtype=np.uint8)
    tail_perm = _column_perm_to_front([r + c for c in pz], list(range(r, n)))
    perm2 = list(range(r)) + tail_perm
    hx_p = hx_p[:, perm2]
    hz_p = hz_p[:, perm2]
    perm = [perm[c] for c in perm2]

    k = n - r - s
    if k != code.k:
        raise LogicalExtractionError(f"standard form leaves {k} logicals but ranks give k={code.k}")
    if not (np.array_equal(hx_p[:, :r], np.eye(r, dtype=np.uint8)) and np.array_equal(hz_p[:, r : r + s], np.eye(s, dtype=np.uint8))):
        raise LogicalExtractionError("standard form blocks are not identities")

    a2 = hx_p[:, r + s :]  # r x k
    e = hz_p[:, r + s :]  # s x k
    lx = np.zeros((k, n), dtype=np.uint8)
    lz = np.zeros((k, n), dtype=np.uint8)
    lx[:, r : r + s] = e.T
    lx[:, r + s :] = np.eye(k, dtype=np.uint8)
    lz[:, :r] = a2.T
    lz[:, r + s :] = np.eye(k, dtype=np.uint8)

    inv = np.empty(n, dtype=np.int64)
    inv[perm] = np.arange(n)
    lx, lz = lx[:, inv], lz[:, inv]
    zero = np.zeros(n, dtype=np.uint8)
    return LogicalSet(
        logical_x=tuple(PauliVector.from_arrays(row, zero) for row in lx),
        logical_z=tuple(PauliVector.from_arrays(zero, row) for row in lz),
    )


def syndrome(code: CssCode, e: PauliVector) -> Syndrome:
    if e.n != code.N:
        raise ValueError(f"error acts on {e.n} qubits, code has {code.N}")
    return Syndrome(s_x=matvec(code.hx, e.z), s_z=matvec(code.hz, e.x))


@dataclass(frozen=True)
class Outcome:
    """``kind`` is "success", "logical-failure" or "syndrome-mismatch"."""

    kind: str
    flips_x: np.ndarray | None = None
    flips_z: np.ndarray | None = None

    @property
    def success(self) -> bool:
        return self.kind == "success"

    def failed_qubits(self) -> np.ndarray | None:
        if self.flips_x is None:
            return None
        return self.flips_x | self.flips_z


def classify_residual(code: CssCode, r: PauliVector, logicals: LogicalSet) -> Outcome:
    """Residual ``e + correction`` -> success / logical failure (with flips) / mismatch."""
    if not syndrome(code, r).is_zero():
        return Outcome("syndrome-mismatch")
    fx = np.array([symplectic_inner(r, lz) for lz in logicals.logical_z], dtype=np.uint8)
    fz = np.array([symplectic_inner(r, lx) for lx in logicals.logical_x], dtype=np.uint8)
    kind = "success" if not (fx.any() or fz.any()) else "logical-failure"
    return Outcome(kind, fx, fz)


def _one_sided_distance(h_kernel: BinaryMatrix, h_rows: BinaryMatrix, cap: int) -> int | float:
    """min weight of v in ker(h_kernel) outside rowspace(h_rows)."""
    basis = nullspace_basis(h_kernel)
    if basis.rows > cap:
        raise ValueError(f"nullspace dimension {basis.rows} exceeds the enumeration cap {cap}")
    # rowspace(h_rows) = ker(h_rows)^perp, so v is a stabilizer iff K v = 0
    K = nullspace_basis(h_rows)
    if K.rows == 0:
        return math.inf
    tags = matmul(basis, K.T)
    d = min_weight_combination(basis, tags)
    return math.inf if d is None else d


def quantum_distance_bruteforce(code: CssCode, cap: int = DEFAULT_DISTANCE_CAP) -> int | float:
    """Exhaustive CSS distance ``min(d_X, d_Z)``; refuses nullspaces larger than ``cap``."""
    dims = {"H_X": code.N - code.rank_x, "H_Z": code.N - code.rank_z}
    for name, dim in dims.items():
        if dim > cap:
            raise ValueError(f"nullspace of {name} has dimension {dim}, above the enumeration cap {cap}")
    d_x = _one_sided_distance(code.hz, code.hx, cap)
    d_z = _one_sided_distance(code.hx, code.hz, cap)
    return min(d_x, d_z)
