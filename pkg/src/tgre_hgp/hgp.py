"""Tillich-Zemor hypergraph product of two classical check matrices.

Qubit order: the variable-pair block ``(v1, v2)`` in row-major order, then the
check-pair block ``(c1, c2)`` in row-major order::

    H_X = [H1 (x) I_n2 | I_m1 (x) H2^T]      rows indexed by (c1, v2)
    H_Z = [I_n1 (x) H2 | H1^T (x) I_m2]      rows indexed by (v1, c2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING

from .gf2 import BinaryMatrix, matmul, rank
from .tanner import ExpansionRule, build_tgre, default_rule

if TYPE_CHECKING:
    from .css import LogicalSet

# max stabilizer weight of a TGRE product tracks WEIGHT_RATIO * sqrt(N)
WEIGHT_RATIO = 3.0 / math.sqrt(5.0)
WEIGHT_TOLERANCE = 0.10


class CssError(ValueError):
    """Check matrices do not define a valid CSS code."""


@dataclass(frozen=True, eq=False)
class CssCode:
    hx: BinaryMatrix
    hz: BinaryMatrix
    seed_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.hx.cols != self.hz.cols:
            raise CssError(f"H_X has {self.hx.cols} columns but H_Z has {self.hz.cols}")

    def is_css(self) -> bool:
        """True iff H_X H_Z^T = 0."""
        return matmul(self.hx, self.hz.T).is_zero()

    @property
    def N(self) -> int:
        return self.hx.cols

    @cached_property
    def rank_x(self) -> int:
        return rank(self.hx)

    @cached_property
    def rank_z(self) -> int:
        return rank(self.hz)

    @property
    def k(self) -> int:
        return self.N - self.rank_x - self.rank_z

    @cached_property
    def logicals(self) -> LogicalSet:
        from .css import standard_form

        return standard_form(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CssCode):
            return NotImplemented
        return self.hx == other.hx and self.hz == other.hz

    def __repr__(self) -> str:
        return f"CssCode(N={self.N}, k={self.k})"


def hgp(H1: BinaryMatrix, H2: BinaryMatrix, seed_meta: dict | None = None) -> CssCode:
    """Hypergraph product; the CSS condition is re-checked on construction."""
    if 0 in H1.shape or 0 in H2.shape:
        raise ValueError(f"seed matrices must be nonempty, got {H1.shape} and {H2.shape}")
    m1, n1 = H1.shape
    m2, n2 = H2.shape
    hx = H1.kron(BinaryMatrix.identity(n2)).hstack(BinaryMatrix.identity(m1).kron(H2.T))
    hz = BinaryMatrix.identity(n1).kron(H2).hstack(H1.T.kron(BinaryMatrix.identity(m2)))
    meta = {"seed1_shape": [m1, n1], "seed2_shape": [m2, n2]}
    meta.update(seed_meta or {})
    code = CssCode(hx, hz, meta)
    if not code.is_css():
        raise CssError("hypergraph product is not orthogonal; construction bug")
    return code


def build_tgre_hgp(L: int, rule: ExpansionRule | None = None) -> CssCode:
    """Z-TGRE seed as H1, X-TGRE seed as H2, both of length ``2**L``."""
    rule = rule or default_rule()
    h1 = build_tgre(L, rule, "Z")
    h2 = build_tgre(L, rule, "X")
    return hgp(
        h1,
        h2,
        {"n": 2**L, "L": L, "rule": rule.name, "rule_sha256": rule.digest(), "H1": "Z-TGRE", "H2": "X-TGRE"},
    )


def code_params(code: CssCode) -> tuple[int, int]:
    return code.N, code.k


def weight_stats(code: CssCode) -> tuple[int, float, int]:
    """``(max_row_weight, mean_row_weight, max_col_weight)`` over H_X and H_Z together."""
    rows = [w for H in (code.hx, code.hz) if H.rows for w in H.row_weights()]
    cols = [int(H.col_weights().max()) for H in (code.hx, code.hz) if H.rows]
    if not rows:
        return 0, 0.0, 0
    return int(max(rows)), float(sum(rows) / len(rows)), max(cols)


def weight_gate(code: CssCode, tolerance: float = WEIGHT_TOLERANCE) -> tuple[bool, float]:
    """``(ok, ratio)`` where ratio = max stabilizer weight / sqrt(N) must be within
    ``tolerance`` (relative) of 3/sqrt(5)."""
    ratio = weight_stats(code)[0] / math.sqrt(code.N)
    return abs(ratio - WEIGHT_RATIO) <= tolerance * WEIGHT_RATIO, ratio
