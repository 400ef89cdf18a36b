"""Serialized artifacts: code containers, run manifests, curve CSVs, summaries.

Code container (JSON)::

    {"format": "tgre-hgp-code/1", "N": 20, "k": 4, "seed_meta": {...},
     "H_X": "<matrix text>", "H_Z": "<matrix text>"}

Matrices use the fixture text format of ``gf2.write_matrix_text``.

Curve CSV: one comment line ``# manifest: {json}`` holding the deterministic
part of the run manifest, then the header
``N,k,p,trials,ler_block,ci_lo,ci_hi,ler_slq_mean,ler_slq_0,...`` and one row
per point. Wall-clock times and the worker count live only in the summary JSON,
so equal inputs give byte-identical CSVs whatever the scheduling.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import TextIO

from . import __version__
from .gf2 import read_matrix_text, write_matrix_text
from .hgp import CssCode
from .montecarlo import CurvePoint

CODE_FORMAT = "tgre-hgp-code/1"
SUMMARY_FORMAT = "tgre-hgp-summary/1"
MANIFEST_PREFIX = "# manifest: "


class ContainerError(ValueError):
    """A serialized artifact is malformed."""


# code containers


def code_to_dict(code: CssCode) -> dict:
    return {
        "format": CODE_FORMAT,
        "N": code.N,
        "k": code.k,
        "seed_meta": code.seed_meta,
        "H_X": write_matrix_text(code.hx),
        "H_Z": write_matrix_text(code.hz),
    }


def code_from_dict(d: dict) -> CssCode:
    if not isinstance(d, dict) or d.get("format") != CODE_FORMAT:
        raise ContainerError(f"not a code container (expected format {CODE_FORMAT!r})")
    try:
        hx = read_matrix_text(d["H_X"])
        hz = read_matrix_text(d["H_Z"])
    except KeyError as exc:
        raise ContainerError(f"code container lacks {exc.args[0]}") from None
    except ValueError as exc:
        raise ContainerError(f"bad matrix in code container: {exc}") from None
    if hx.cols != hz.cols:
        raise ContainerError(f"H_X has {hx.cols} columns but H_Z has {hz.cols}")
    return CssCode(hx, hz, dict(d.get("seed_meta") or {}))


def save_code(code: CssCode, path: str | Path) -> None:
    Path(path).write_text(json.dumps(code_to_dict(code), indent=2) + "\n")


def load_code(path: str | Path) -> CssCode:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ContainerError(f"{path}: invalid JSON ({exc})") from None
    return code_from_dict(d)


def code_digest(code: CssCode) -> str:
    """Hash of the check matrices; changes iff the code does."""
    text = write_matrix_text(code.hx) + write_matrix_text(code.hz)
    return hashlib.sha256(text.encode()).hexdigest()


# manifests


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    tool_version: str
    rule_sha256: str | None
    code_sha256: str
    N: int
    k: int
    L: int | None
    decoder: dict
    master_seed: int
    p_grid: list[float]
    trials: int
    mismatch_policy: str
    started: str | None = None
    finished: str | None = None
    workers: int | None = None

    @classmethod
    def for_run(cls, code: CssCode, run, mismatch_policy: str) -> RunManifest:
        return cls(
            tool_version=__version__,
            rule_sha256=code.seed_meta.get("rule_sha256"),
            code_sha256=code_digest(code),
            N=code.N,
            k=code.k,
            L=code.seed_meta.get("L"),
            decoder=run.decoder.to_dict(),
            master_seed=run.master_seed,
            p_grid=list(run.p_grid),
            trials=run.trials,
            mismatch_policy=mismatch_policy,
            workers=run.workers,
        )

    def deterministic(self) -> dict:
        """Fields fixed by the inputs alone (no clock, no worker count)."""
        d = asdict(self)
        for key in ("started", "finished", "workers"):
            d.pop(key)
        return d

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> RunManifest:
        return cls(**d)


# curve CSV


def csv_header(k: int) -> list[str]:
    return ["N", "k", "p", "trials", "ler_block", "ci_lo", "ci_hi", "ler_slq_mean"] + [f"ler_slq_{i}" for i in range(k)]


def _row(pt: CurvePoint) -> list[str]:
    vals = [pt.N, pt.k, pt.p, pt.trials, pt.ler_block, *pt.ler_block_ci, pt.ler_slq_mean, *pt.ler_slq]
    return [repr(v) for v in vals]


class CurveWriter:
    """Streams CurvePoints to CSV, flushing after every row."""

    def __init__(self, stream: TextIO, k: int, manifest: dict | None = None):
        self.stream = stream
        self.k = k
        if manifest is not None:
            stream.write(MANIFEST_PREFIX + json.dumps(manifest, sort_keys=True) + "\n")
        self._csv = csv.writer(stream, lineterminator="\n")
        self._csv.writerow(csv_header(k))
        stream.flush()

    def write(self, pt: CurvePoint) -> None:
        if pt.k != self.k:
            raise ValueError(f"point has k={pt.k}, file has k={self.k}")
        self._csv.writerow(_row(pt))
        self.stream.flush()


def write_curve_csv(points: list[CurvePoint], path: str | Path, manifest: dict | None = None) -> None:
    if not points:
        raise ValueError("no points to write")
    with open(path, "w", newline="") as fh:
        w = CurveWriter(fh, points[0].k, manifest)
        for pt in points:
            w.write(pt)


@dataclass
class Curve:
    points: list[CurvePoint]
    manifest: dict | None = field(default=None)

    @property
    def N(self) -> int:
        return self.points[0].N


def parse_curve_csv(text: str, source: str = "<csv>") -> Curve:
    manifest = None
    lines = text.splitlines()
    body = []
    for line in lines:
        if line.startswith(MANIFEST_PREFIX):
            try:
                manifest = json.loads(line[len(MANIFEST_PREFIX) :])
            except json.JSONDecodeError as exc:
                raise ContainerError(f"{source}: bad manifest line ({exc})") from None
        elif not line.startswith("#"):
            body.append(line)
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    if not rows:
        raise ContainerError(f"{source}: empty curve file")
    header = rows[0]
    if header[:8] != csv_header(0):
        raise ContainerError(f"{source}: unexpected header {header[:8]}")
    k = len(header) - 8
    if header != csv_header(k):
        raise ContainerError(f"{source}: per-qubit columns must be ler_slq_0..ler_slq_{k - 1}")
    points = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ContainerError(f"{source}: row {lineno} has {len(row)} fields, expected {len(header)}")
        try:
            N, kk, trials = int(row[0]), int(row[1]), int(row[3])
            p, blk, lo, hi, mean = (float(row[i]) for i in (2, 4, 5, 6, 7))
            slq = [float(v) for v in row[8:]]
        except ValueError as exc:
            raise ContainerError(f"{source}: row {lineno}: {exc}") from None
        if kk != k:
            raise ContainerError(f"{source}: row {lineno} says k={kk} but the header has {k} qubit columns")
        points.append(CurvePoint(N, kk, p, trials, blk, (lo, hi), slq, mean))
    if not points:
        raise ContainerError(f"{source}: no data rows")
    if len({pt.N for pt in points}) != 1:
        raise ContainerError(f"{source}: rows mix several code lengths")
    return Curve(points, manifest)


def read_curve_csv(path: str | Path) -> Curve:
    return parse_curve_csv(Path(path).read_text(), source=str(path))


# summaries


def summary_dict(manifest: RunManifest, points: list[CurvePoint], threshold: dict | None = None) -> dict:
    return {
        "format": SUMMARY_FORMAT,
        "manifest": manifest.to_dict(),
        "points": [pt.to_dict() for pt in points],
        "threshold": threshold,
    }


def write_summary(summary: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2) + "\n")


def read_summary(path: str | Path) -> dict:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ContainerError(f"{path}: invalid JSON ({exc})") from None
    if d.get("format") != SUMMARY_FORMAT:
        raise ContainerError(f"{path}: not a summary (expected format {SUMMARY_FORMAT!r})")
    return d
