"""Z-TGRE / X-TGRE seed matrices by recursive Tanner-graph expansion.

A graph at level ``L`` has ``2**L`` variable nodes and ``2**(L-1)`` check
nodes. Level ``L`` is built from two copies of level ``L-1``: copy A keeps the
low indices, copy B is shifted up by the copy size, and the expansion rule adds
cross edges "variable of one copy joins check of the other copy".

Rule files are line oriented::

    # comments and blank lines are ignored
    primal:
    check 1: 1 2
    level 2:
    B.var 1 -> A.check 1

Indices in files are 1-based and relative to the copy; everything in memory
is 0-based.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Literal

import numpy as np

from .gf2 import BinaryMatrix, min_weight_combination, nullspace_basis, rank

Pauli = Literal["X", "Z"]

DEFAULT_DISTANCE_CAP = 24
DEFAULT_RULE_NAME = "tgre.rule"

# Exhaustive seed distances of the shipped rule, L -> d. Regression fixtures
# for validate_seed's monotonicity check.
SEED_DISTANCE_FIXTURES: dict[int, int] = {1: 2, 2: 2, 3: 4, 4: 4, 5: 6}


class RuleError(ValueError):
    """Malformed expansion rule or rule file."""


@dataclass(frozen=True)
class CrossEdge:
    """Variable ``var`` of copy ``src`` joins check ``check`` of copy ``dst`` (0-based)."""

    src: Literal["A", "B"]
    var: int
    dst: Literal["A", "B"]
    check: int

    def __str__(self) -> str:
        return f"{self.src}.var {self.var + 1} -> {self.dst}.check {self.check + 1}"


@dataclass(frozen=True)
class ExpansionRule:
    primal: tuple[tuple[int, ...], ...]
    levels: dict[int, tuple[CrossEdge, ...]] = field(default_factory=dict)
    name: str = "custom"

    @property
    def max_level(self) -> int:
        """Largest L the rule can build (levels 2..L must all be present)."""
        L = 1
        while L + 1 in self.levels:
            L += 1
        return L

    def digest(self) -> str:
        return hashlib.sha256(dump_rule(self).encode()).hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExpansionRule):
            return NotImplemented
        return self.primal == other.primal and self.levels == other.levels

    def __hash__(self) -> int:
        return hash((self.primal, tuple(sorted(self.levels.items()))))


@dataclass(frozen=True)
class TannerGraph:
    level: int
    adjacency: tuple[tuple[int, ...], ...]
    pauli: Pauli
    var_count: int

    @property
    def check_count(self) -> int:
        return len(self.adjacency)

    def to_matrix(self) -> BinaryMatrix:
        dense = np.zeros((self.check_count, self.var_count), dtype=np.uint8)
        for c, vs in enumerate(self.adjacency):
            dense[c, list(vs)] = 1
        return BinaryMatrix.from_dense(dense)


@dataclass
class SeedReport:
    level: int
    n: int
    rank: int
    rate: float
    classical_distance: int | float | None
    rank_ok: bool
    distance_ok: bool | None
    columns_ok: bool
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.rank_ok and self.columns_ok and self.distance_ok is not False

    def to_dict(self) -> dict:
        d = self.classical_distance
        return {
            "level": self.level,
            "n": self.n,
            "rank": self.rank,
            "rate": self.rate,
            "classical_distance": None if d is None else ("inf" if d == math.inf else d),
            "checks": {"rank": self.rank_ok, "distance": self.distance_ok, "columns": self.columns_ok},
            "pass": self.passed,
            "notes": self.notes,
        }


def _check_pauli(tag: str) -> Pauli:
    if tag not in ("X", "Z"):
        raise ValueError(f"pauli tag must be 'X' or 'Z', got {tag!r}")
    return tag  # type: ignore[return-value]


def primal_graph(rule: ExpansionRule, tag: Pauli) -> TannerGraph:
    """G_1: two variables, one check."""
    tag = _check_pauli(tag)
    if len(rule.primal) != 1:
        raise RuleError(f"primal graph must have exactly 1 check, got {len(rule.primal)}")
    vs = rule.primal[0]
    if not vs or len(set(vs)) != len(vs) or any(not 0 <= v < 2 for v in vs):
        raise RuleError(f"primal check must list distinct variables among 1..2, got {[v + 1 for v in vs]}")
    return TannerGraph(level=1, adjacency=(tuple(sorted(vs)),), pauli=tag, var_count=2)


def expand_once(G: TannerGraph, rule: ExpansionRule) -> TannerGraph:
    """Two disjoint copies of ``G`` plus the rule's cross edges for ``G.level + 1``."""
    level = G.level + 1
    if level not in rule.levels:
        raise RuleError(f"rule has no cross edges for level {level}")
    n, m = G.var_count, G.check_count
    shift = {"A": (0, 0), "B": (n, m)}
    checks = [set(vs) for vs in G.adjacency] + [{v + n for v in vs} for vs in G.adjacency]
    for e in rule.levels[level]:
        if not (0 <= e.var < n and 0 <= e.check < m):
            raise RuleError(f"level {level}: edge '{e}' out of range for copies of {n} vars / {m} checks")
        v = e.var + shift[e.src][0]
        c = e.check + shift[e.dst][1]
        if v in checks[c]:
            raise RuleError(f"level {level}: duplicate edge '{e}'")
        checks[c].add(v)
    return TannerGraph(
        level=level,
        adjacency=tuple(tuple(sorted(c)) for c in checks),
        pauli=G.pauli,
        var_count=2 * n,
    )


def build_graph(L: int, rule: ExpansionRule, tag: Pauli) -> TannerGraph:
    if L < 1:
        raise ValueError(f"level must be >= 1, got {L}")
    G = primal_graph(rule, tag)
    while G.level < L:
        G = expand_once(G, rule)
    return G


def build_tgre(L: int, rule: ExpansionRule | None = None, tag: Pauli = "Z") -> BinaryMatrix:
    """The ``2**(L-1) x 2**L`` check matrix of G_L."""
    return build_graph(L, rule or default_rule(), tag).to_matrix()


def classical_distance(H: BinaryMatrix, cap: int = DEFAULT_DISTANCE_CAP) -> int | float:
    """Minimum weight of a nonzero codeword of ker(H); ``math.inf`` if ker(H) = {0}."""
    basis = nullspace_basis(H)
    if basis.rows > cap:
        raise ValueError(f"nullspace dimension {basis.rows} exceeds the enumeration cap {cap}")
    d = min_weight_combination(basis)
    return math.inf if d is None else d


def validate_seed(
    H: BinaryMatrix,
    L: int,
    fixtures: dict[int, int] | None = None,
    cap: int = DEFAULT_DISTANCE_CAP,
) -> SeedReport:
    """Certify a seed: full row rank, distance monotone against fixtures, no idle qubit."""
    m, n = 2 ** (L - 1), 2**L
    if H.shape != (m, n):
        raise ValueError(f"level {L} seed must be {m}x{n}, got {H.rows}x{H.cols}")
    fixtures = SEED_DISTANCE_FIXTURES if fixtures is None else fixtures
    notes = []
    r = rank(H)
    columns_ok = bool((H.col_weights() > 0).all())
    d: int | float | None
    distance_ok: bool | None
    if n - r > cap:
        d, distance_ok = None, None
        notes.append(f"distance skipped: nullspace dimension {n - r} exceeds cap {cap}")
    else:
        d = classical_distance(H, cap)
        lower = max((v for k, v in fixtures.items() if k < L), default=0)
        upper = min((v for k, v in fixtures.items() if k > L), default=math.inf)
        distance_ok = lower <= d <= upper
        if not distance_ok:
            notes.append(f"distance {d} breaks monotonicity: fixtures require {lower} <= d <= {upper}")
    return SeedReport(
        level=L,
        n=n,
        rank=r,
        rate=(n - r) / n,
        classical_distance=d,
        rank_ok=r == m,
        distance_ok=distance_ok,
        columns_ok=columns_ok,
        notes=notes,
    )


# rule files

_CHECK_RE = re.compile(r"^check\s+(\d+)\s*:\s*([\d\s]*)$")
_LEVEL_RE = re.compile(r"^level\s+(\d+)\s*:$")
_EDGE_RE = re.compile(r"^([AB])\.var\s+(\d+)\s*->\s*([AB])\.check\s+(\d+)$")


def parse_rule(text: str, name: str = "custom") -> ExpansionRule:
    primal: dict[int, tuple[int, ...]] = {}
    levels: dict[int, list[CrossEdge]] = {}
    section: str | int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "primal:":
            section = "primal"
            continue
        if mo := _LEVEL_RE.match(line):
            section = int(mo.group(1))
            if section < 2:
                raise RuleError(f"line {lineno}: levels start at 2")
            if section in levels:
                raise RuleError(f"line {lineno}: level {section} declared twice")
            levels[section] = []
            continue
        if section == "primal" and (mo := _CHECK_RE.match(line)):
            c = int(mo.group(1)) - 1
            vs = tuple(int(t) - 1 for t in mo.group(2).split())
            if c < 0 or any(v < 0 for v in vs):
                raise RuleError(f"line {lineno}: indices are 1-based")
            primal[c] = vs
            continue
        if isinstance(section, int) and (mo := _EDGE_RE.match(line)):
            var, check = int(mo.group(2)) - 1, int(mo.group(4)) - 1
            if var < 0 or check < 0:
                raise RuleError(f"line {lineno}: indices are 1-based")
            levels[section].append(CrossEdge(mo.group(1), var, mo.group(3), check))
            continue
        raise RuleError(f"line {lineno}: cannot parse {raw.strip()!r}")
    if not primal:
        raise RuleError("rule has no 'primal:' section")
    if sorted(primal) != list(range(len(primal))):
        raise RuleError("primal checks must be numbered 1..m without gaps")
    return ExpansionRule(
        primal=tuple(primal[c] for c in range(len(primal))),
        levels={k: tuple(v) for k, v in sorted(levels.items())},
        name=name,
    )


def dump_rule(rule: ExpansionRule) -> str:
    lines = ["primal:"]
    lines += [f"check {c + 1}: {' '.join(str(v + 1) for v in vs)}" for c, vs in enumerate(rule.primal)]
    for k in sorted(rule.levels):
        lines.append(f"level {k}:")
        lines += [str(e) for e in rule.levels[k]]
    return "\n".join(lines) + "\n"


def load_rule(path: str | Path) -> ExpansionRule:
    path = Path(path)
    return parse_rule(path.read_text(), name=path.name)


def save_rule(rule: ExpansionRule, path: str | Path) -> None:
    Path(path).write_text(dump_rule(rule))


def default_rule_text() -> str:
    return resources.files("tgre_hgp.data").joinpath(DEFAULT_RULE_NAME).read_text()


def default_rule() -> ExpansionRule:
    return parse_rule(default_rule_text(), name=DEFAULT_RULE_NAME)


def repetition_fallback_seed(m: int, n: int) -> BinaryMatrix:
    """Full-row-rank ``m x n`` seed independent of any expansion rule.

    Row ``i`` checks bits ``i`` and ``i + 1`` (repetition-code checks), so
    ``m <= n - 1`` is required.
    """
    if not 1 <= m <= n - 1:
        raise ValueError(f"need 1 <= m <= n - 1, got m={m}, n={n}")
    dense = np.zeros((m, n), dtype=np.uint8)
    idx = np.arange(m)
    dense[idx, idx] = 1
    dense[idx, idx + 1] = 1
    return BinaryMatrix.from_dense(dense)
