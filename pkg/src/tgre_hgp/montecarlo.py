"""Depolarizing-channel Monte Carlo: logical error rates and threshold crossings.

Every trial draws from its own Philox stream keyed by the master seed, with
the counter set from (point index, trial index). Trials are processed in
fixed-size blocks and only integer counts are summed, so results do not depend
on the worker count or completion order.

A trial whose residual has a nonzero syndrome (the decoder did not reach the
observed syndrome) counts as a failure of the block and of every logical qubit.
"""

from __future__ import annotations

import math
import statistics
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .bp import DecoderConfig, DecoupledDecoder
from .css import LogicalSet, PauliVector
from .gf2 import BinaryMatrix
from .hgp import CssCode

BLOCK_SIZE = 500
DEFAULT_P_GRID = tuple(round(0.06 + 0.01 * i, 2) for i in range(8))
MISMATCH_POLICY = "syndrome-mismatch counts as failure of the block and of every logical qubit"


def trial_rng(master_seed: int, point_index: int, trial_index: int) -> np.random.Generator:
    """Counter-based stream for one trial; independent of scheduling."""
    key = np.array([master_seed & 0xFFFFFFFFFFFFFFFF, 0], dtype=np.uint64)
    counter = np.array([0, trial_index, point_index, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def _sample_arrays(n: int, p: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    u = rng.random(n)
    third = p / 3.0
    x = u < 2.0 * third  # X or Y
    z = (u >= third) & (u < p)  # Y or Z
    return x.astype(np.uint8), z.astype(np.uint8)


def sample_depolarizing(n: int, p: float, rng: np.random.Generator) -> PauliVector:
    """Each qubit: I with prob 1-p, X, Y, Z with prob p/3 each."""
    if not 0.0 < p < 0.75:
        raise ValueError(f"p must lie in (0, 0.75), got {p}")
    return PauliVector.from_arrays(*_sample_arrays(n, p, rng))


@dataclass(frozen=True)
class TrialOutcome:
    converged: bool
    kind: str
    flips: np.ndarray | None
    iterations: int

    @property
    def success(self) -> bool:
        return self.kind == "success"


class TrialRunner:
    """Dense per-code state shared read-only by the trials of one worker."""

    def __init__(self, code: CssCode, logicals: LogicalSet, cfg: DecoderConfig | None = None):
        self.code = code
        self.cfg = cfg or DecoderConfig()
        self.n = code.N
        self.k = logicals.k
        self.hx = code.hx.to_dense()
        self.hz = code.hz.to_dense()
        # r_x . Zbar_z flips logical X; r_z . Xbar_x flips logical Z
        self.lz = logicals.z_matrix().to_dense() if self.k else np.zeros((0, self.n), np.uint8)
        self.lx = logicals.x_matrix().to_dense() if self.k else np.zeros((0, self.n), np.uint8)
        self.decoder = DecoupledDecoder(code, self.cfg)

    def run(
        self,
        p: float,
        rng: np.random.Generator | None = None,
        error: tuple[np.ndarray, np.ndarray] | None = None,
        decode: bool = True,
    ) -> TrialOutcome:
        if error is None:
            ex, ez = _sample_arrays(self.n, p, rng)
        else:
            ex, ez = (np.asarray(a, dtype=np.uint8) for a in error)
        s_x = (self.hx @ ez) & 1
        s_z = (self.hz @ ex) & 1
        if decode:
            cx, cz, converged, iters = self.decoder.decode_arrays(s_x, s_z, p)
        else:
            cx, cz, converged, iters = np.zeros_like(ex), np.zeros_like(ez), True, 0
        rx = ex ^ cx
        rz = ez ^ cz
        if ((self.hz @ rx) & 1).any() or ((self.hx @ rz) & 1).any():
            if converged and decode:
                raise AssertionError("decoder reported convergence with an inconsistent correction")
            return TrialOutcome(converged, "syndrome-mismatch", None, iters)
        flips = (((self.lz @ rx) & 1) | ((self.lx @ rz) & 1)).astype(np.uint8)
        return TrialOutcome(converged, "success" if not flips.any() else "logical-failure", flips, iters)


def run_trial(
    code: CssCode,
    logicals: LogicalSet,
    p: float,
    cfg: DecoderConfig | None,
    rng: np.random.Generator | None = None,
    error: PauliVector | None = None,
    decode: bool = True,
) -> TrialOutcome:
    """Sample (or take) an error, decode its syndrome, classify the residual."""
    forced = None if error is None else (error.x.to_array(), error.z.to_array())
    return TrialRunner(code, logicals, cfg).run(p, rng, forced, decode)


@dataclass
class Counts:
    trials: int = 0
    block_failures: int = 0
    mismatches: int = 0
    nonconverged: int = 0
    qubit_failures: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def add(self, other: Counts) -> None:
        self.trials += other.trials
        self.block_failures += other.block_failures
        self.mismatches += other.mismatches
        self.nonconverged += other.nonconverged
        if self.qubit_failures.size == 0:
            self.qubit_failures = other.qubit_failures.copy()
        else:
            self.qubit_failures += other.qubit_failures


def _run_block(runner: TrialRunner, p: float, master_seed: int, point_index: int, start: int, stop: int) -> Counts:
    c = Counts(qubit_failures=np.zeros(runner.k, dtype=np.int64))
    for t in range(start, stop):
        out = runner.run(p, trial_rng(master_seed, point_index, t))
        c.trials += 1
        c.nonconverged += not out.converged
        if out.kind == "success":
            continue
        c.block_failures += 1
        if out.kind == "syndrome-mismatch":
            c.mismatches += 1
            c.qubit_failures += 1
        else:
            c.qubit_failures += out.flips
    return c


_WORKER: TrialRunner | None = None


def _worker_init(hx: np.ndarray, hz: np.ndarray, lx: np.ndarray, lz: np.ndarray, cfg: dict) -> None:
    global _WORKER
    code = CssCode(BinaryMatrix.from_dense(hx), BinaryMatrix.from_dense(hz))
    zero = np.zeros(hx.shape[1], dtype=np.uint8)
    logicals = LogicalSet(
        logical_x=tuple(PauliVector.from_arrays(row, zero) for row in lx),
        logical_z=tuple(PauliVector.from_arrays(zero, row) for row in lz),
    )
    _WORKER = TrialRunner(code, logicals, DecoderConfig(**cfg))


def _worker_block(args) -> tuple[int, Counts]:
    job, p, master_seed, point_index, start, stop = args
    return job, _run_block(_WORKER, p, master_seed, point_index, start, stop)


def _execute(
    code: CssCode,
    logicals: LogicalSet,
    cfg: DecoderConfig,
    points: Sequence[tuple[float, int]],
    trials: int,
    master_seed: int,
    workers: int,
    on_point: Callable[[CurvePoint], None] | None = None,
) -> list[CurvePoint]:
    """Run ``trials`` per ``(p, point_index)``; emit points in input order."""
    blocks = [(s, min(s + BLOCK_SIZE, trials)) for s in range(0, trials, BLOCK_SIZE)]
    jobs = [(j, p, master_seed, idx, s, e) for j, (p, idx) in enumerate(points) for s, e in blocks]
    totals = [Counts(qubit_failures=np.zeros(logicals.k, dtype=np.int64)) for _ in points]
    pending = [len(blocks)] * len(points)
    done: list[CurvePoint | None] = [None] * len(points)
    emitted = 0

    def collect(job: int, counts: Counts) -> None:
        nonlocal emitted
        totals[job].add(counts)
        pending[job] -= 1
        if pending[job] == 0:
            done[job] = CurvePoint.from_counts(code.N, logicals.k, points[job][0], totals[job])
        while emitted < len(done) and done[emitted] is not None:
            if on_point:
                on_point(done[emitted])
            emitted += 1

    if workers == 1:
        runner = TrialRunner(code, logicals, cfg)
        for job, p, seed, idx, s, e in jobs:
            collect(job, _run_block(runner, p, seed, idx, s, e))
    else:
        lx = np.array([op.x.to_array() for op in logicals.logical_x], dtype=np.uint8).reshape(-1, code.N)
        lz = np.array([op.z.to_array() for op in logicals.logical_z], dtype=np.uint8).reshape(-1, code.N)
        init = (code.hx.to_dense(), code.hz.to_dense(), lx, lz, cfg.to_dict())
        with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init, initargs=init) as pool:
            for job, counts in pool.map(_worker_block, jobs):
                collect(job, counts)
    return [pt for pt in done if pt is not None]


def wilson_interval(fails: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= fails <= trials:
        raise ValueError(f"need 0 <= fails <= trials and trials >= 1, got {fails}/{trials}")
    phat = fails / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z / denom * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials))
    lo = 0.0 if fails == 0 else max(0.0, center - half)
    hi = 1.0 if fails == trials else min(1.0, center + half)
    return lo, hi


@dataclass
class CurvePoint:
    N: int
    k: int
    p: float
    trials: int
    ler_block: float
    ler_block_ci: tuple[float, float]
    ler_slq: list[float]
    ler_slq_mean: float
    mismatches: int = 0
    nonconverged: int = 0

    @classmethod
    def from_counts(cls, N: int, k: int, p: float, c: Counts) -> CurvePoint:
        slq = [int(f) / c.trials for f in c.qubit_failures]
        return cls(
            N=N,
            k=k,
            p=p,
            trials=c.trials,
            ler_block=c.block_failures / c.trials,
            ler_block_ci=wilson_interval(c.block_failures, c.trials),
            ler_slq=slq,
            ler_slq_mean=float(np.mean(slq)) if slq else 0.0,
            mismatches=c.mismatches,
            nonconverged=c.nonconverged,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ler_block_ci"] = list(self.ler_block_ci)
        return d


@dataclass(frozen=True)
class RunConfig:
    p_grid: tuple[float, ...] = DEFAULT_P_GRID
    trials: int = 10_000
    master_seed: int = 0
    workers: int = 1
    decoder: DecoderConfig = field(default_factory=DecoderConfig)

    def __post_init__(self):
        grid = tuple(self.p_grid)
        if not grid or any(not 0.0 < p < 0.75 for p in grid):
            raise ValueError("p values must lie in (0, 0.75)")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("p grid must be strictly increasing")
        if self.trials < 1 or self.workers < 1:
            raise ValueError("trials and workers must be positive")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")

    def to_dict(self) -> dict:
        return {
            "p_grid": list(self.p_grid),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "workers": self.workers,
            "decoder": self.decoder.to_dict(),
        }


def run_curve(
    code: CssCode,
    run: RunConfig,
    logicals: LogicalSet | None = None,
    on_point: Callable[[CurvePoint], None] | None = None,
) -> list[CurvePoint]:
    """One CurvePoint per grid value; ``on_point`` fires as each completes, in grid order."""
    logicals = logicals or code.logicals
    points = [(p, i) for i, p in enumerate(run.p_grid)]
    return _execute(code, logicals, run.decoder, points, run.trials, run.master_seed, run.workers, on_point)


def run_point(
    code: CssCode,
    logicals: LogicalSet,
    p: float,
    trials: int,
    master_seed: int,
    workers: int = 1,
    cfg: DecoderConfig | None = None,
    point_index: int = 0,
) -> CurvePoint:
    """Aggregate ``trials`` independent trials at physical error rate ``p``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0.0 < p < 0.75:
        raise ValueError(f"p must lie in (0, 0.75), got {p}")
    return _execute(code, logicals, cfg or DecoderConfig(), [(p, point_index)], trials, master_seed, workers)[0]


@dataclass
class ThresholdEstimate:
    crossings: list[dict]
    median_p: float | None
    method: str

    def to_dict(self) -> dict:
        return asdict(self)


def _crossing(ps: Sequence[float], small: Sequence[float], large: Sequence[float]) -> float | None:
    """First p where log(large) - log(small) changes sign, linear in (p, log LER)."""
    pts = [(p, math.log(b) - math.log(a)) for p, a, b in zip(ps, small, large) if a > 0 and b > 0]
    for i, (p, d) in enumerate(pts):
        if d == 0.0:
            before = [x for _, x in pts[:i] if x != 0.0]
            after = [x for _, x in pts[i + 1 :] if x != 0.0]
            if before and after and (before[-1] < 0) != (after[0] < 0):
                return p
        elif i + 1 < len(pts):
            p2, d2 = pts[i + 1]
            if d2 != 0.0 and (d < 0) != (d2 < 0):
                return p + (p2 - p) * (-d) / (d2 - d)
    return None


def estimate_threshold(curves: Mapping[int, Iterable[CurvePoint]], metric: str = "ler_slq_mean") -> ThresholdEstimate:
    """Median of pairwise crossings between consecutive code sizes.

    ``curves`` maps code length N to its points; all codes must share one p grid.
    Pairs that never cross inside the grid are listed with ``p = None``.
    """
    if metric not in ("ler_slq_mean", "ler_block"):
        raise ValueError(f"unknown metric {metric!r}")
    if len(curves) < 2:
        raise ValueError("need curves for at least two codes")
    series = {N: sorted(pts, key=lambda c: c.p) for N, pts in curves.items()}
    grids = {tuple(c.p for c in pts) for pts in series.values()}
    if len(grids) != 1:
        raise ValueError("curves do not share a p grid")
    grid = grids.pop()
    if len(grid) < 2:
        raise ValueError("each curve needs at least two points")
    sizes = sorted(series)
    crossings = []
    for small, large in zip(sizes, sizes[1:]):
        a = [getattr(c, metric) for c in series[small]]
        b = [getattr(c, metric) for c in series[large]]
        crossings.append({"small": small, "large": large, "p": _crossing(grid, a, b)})
    found = [c["p"] for c in crossings if c["p"] is not None]
    return ThresholdEstimate(
        crossings=crossings,
        median_p=statistics.median(found) if found else None,
        method=f"pairwise crossing of {metric}, linear in (p, log LER)",
    )
