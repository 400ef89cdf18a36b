"""Syndrome belief propagation for the depolarizing channel.

The X and Z components of an error are decoded separately: the X part against
H_Z and s_z, the Z part against H_X and s_x, each with binary sum-product BP in
the log-likelihood-ratio domain. An optional second Z pass raises the Z prior
on qubits where an X flip was inferred, since a Y error flips both parts.

Plain sum-product BP cannot break exact ties between degenerate errors (two
qubits with identical check columns keep identical messages forever). When
BP does not converge, the decoder decimates: it pins the bit most likely to be
flipped, then continues from the current messages for a few iterations, and
repeats up to ``decimation_rounds`` times.

``ml_oracle`` is an exhaustive most-likely-error decoder for tiny codes, used
as a test reference.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numba as nb
import numpy as np

from .css import PauliVector, Syndrome
from .gf2 import BinaryMatrix, BitVector, nullspace_basis, solve
from .hgp import CssCode

SCHEDULES = ("flooding", "serial")
ML_MAX_QUBITS = 20


@dataclass(frozen=True)
class DecoderConfig:
    max_iter: int = 100
    schedule: str = "serial"
    damping: float = 0.0
    llr_clip: float = 30.0
    y_reweight: bool = True
    decimation_rounds: int = 64
    decimation_iter: int = 5

    def __post_init__(self):
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be >= 0, got {self.max_iter}")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError(f"damping must lie in [0, 1), got {self.damping}")
        if self.decimation_rounds < 0:
            raise ValueError(f"decimation_rounds must be >= 0, got {self.decimation_rounds}")
        if self.decimation_iter < 1:
            raise ValueError(f"decimation_iter must be >= 1, got {self.decimation_iter}")
        if not self.llr_clip > 0:
            raise ValueError(f"llr_clip must be positive, got {self.llr_clip}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Priors:
    p_x: float
    p_z: float


def depolarizing_priors(p: float) -> Priors:
    """Marginal X- and Z-component flip probabilities: X or Y flips x, Z or Y flips z."""
    if not 0.0 < p < 0.75:
        raise ValueError(f"depolarizing p must lie in (0, 0.75), got {p}")
    q = 2.0 * p / 3.0
    return Priors(q, q)


# numba kernels


@nb.njit(cache=True)
def _syndrome_matches(check_ptr, check_vars, est, s):
    for c in range(check_ptr.size - 1):
        par = 0
        for e in range(check_ptr[c], check_ptr[c + 1]):
            par ^= est[check_vars[e]]
        if par != s[c]:
            return False
    return True


@nb.njit(cache=True)
def _check_update(check_ptr, check_vars, s, c, q, r, tbuf, pre, suf, damping, clip):
    """New check-to-variable messages for check ``c``; returns nothing, writes ``r``."""
    a = check_ptr[c]
    b = check_ptr[c + 1]
    deg = b - a
    for i in range(deg):
        tbuf[i] = math.tanh(0.5 * q[a + i])
    pre[0] = 1.0
    for i in range(deg):
        pre[i + 1] = pre[i] * tbuf[i]
    suf[deg] = 1.0
    for i in range(deg - 1, -1, -1):
        suf[i] = suf[i + 1] * tbuf[i]
    sign = -1.0 if s[c] else 1.0
    lim = 1.0 - 1e-15
    for i in range(deg):
        t = sign * pre[i] * suf[i + 1]
        if t > lim:
            t = lim
        elif t < -lim:
            t = -lim
        new = 2.0 * math.atanh(t)
        if new > clip:
            new = clip
        elif new < -clip:
            new = -clip
        if damping > 0.0:
            new = (1.0 - damping) * new + damping * r[a + i]
        r[a + i] = new


@nb.njit(cache=True)
def _bp_kernel(check_ptr, check_vars, s, prior, max_iter, serial, damping, clip, est, post, r, warm):
    m = check_ptr.size - 1
    n = prior.size
    E = check_vars.size
    maxdeg = 0
    for c in range(m):
        maxdeg = max(maxdeg, check_ptr[c + 1] - check_ptr[c])
    if not warm:
        r[:] = 0.0
    q = np.zeros(E)
    tbuf = np.empty(maxdeg + 1)
    pre = np.empty(maxdeg + 1)
    suf = np.empty(maxdeg + 1)
    for v in range(n):
        post[v] = prior[v]
    for e in range(E):
        post[check_vars[e]] += r[e]
    for v in range(n):
        est[v] = 1 if post[v] < 0.0 else 0
    if _syndrome_matches(check_ptr, check_vars, est, s):
        return True, 0
    for it in range(1, max_iter + 1):
        if serial:
            for c in range(m):
                a = check_ptr[c]
                b = check_ptr[c + 1]
                for e in range(a, b):
                    x = post[check_vars[e]] - r[e]
                    q[e] = min(max(x, -clip), clip)
                for e in range(a, b):
                    post[check_vars[e]] -= r[e]
                _check_update(check_ptr, check_vars, s, c, q, r, tbuf, pre, suf, damping, clip)
                for e in range(a, b):
                    post[check_vars[e]] += r[e]
        else:
            for e in range(E):
                x = post[check_vars[e]] - r[e]
                q[e] = min(max(x, -clip), clip)
            for c in range(m):
                _check_update(check_ptr, check_vars, s, c, q, r, tbuf, pre, suf, damping, clip)
            for v in range(n):
                post[v] = prior[v]
            for e in range(E):
                post[check_vars[e]] += r[e]
        for v in range(n):
            est[v] = 1 if post[v] < 0.0 else 0
        if _syndrome_matches(check_ptr, check_vars, est, s):
            return True, it
    return False, max_iter


def _llr(probs: np.ndarray, clip: float) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    with np.errstate(divide="ignore"):
        llr = np.log1p(-probs) - np.log(probs)
    return np.clip(llr, -clip, clip)


class BPDecoder:
    """Binary syndrome BP on the Tanner graph of ``H``; one instance per worker."""

    def __init__(self, H: BinaryMatrix, cfg: DecoderConfig | None = None):
        self.cfg = cfg or DecoderConfig()
        self.rows, self.cols = H.shape
        dense = H.to_dense()
        nz_rows, nz_cols = np.nonzero(dense)
        self.check_ptr = np.zeros(self.rows + 1, dtype=np.int64)
        np.add.at(self.check_ptr, nz_rows + 1, 1)
        self.check_ptr = np.cumsum(self.check_ptr)
        self.check_vars = nz_cols.astype(np.int64)

    def decode(self, s: np.ndarray, probs: np.ndarray) -> tuple[np.ndarray, bool, int]:
        """Array-level entry point: returns ``(estimate, converged, iterations)``."""
        s = np.ascontiguousarray(s, dtype=np.uint8)
        probs = np.broadcast_to(np.asarray(probs, dtype=np.float64), (self.cols,))
        if s.size != self.rows:
            raise ValueError(f"syndrome has length {s.size}, H has {self.rows} rows")
        est = np.zeros(self.cols, dtype=np.uint8)
        post = np.zeros(self.cols)
        cfg = self.cfg
        llr = _llr(probs, cfg.llr_clip)
        r = np.zeros(self.check_vars.size)
        serial = cfg.schedule == "serial"
        converged, iters = _bp_kernel(
            self.check_ptr, self.check_vars, s, llr, cfg.max_iter, serial, cfg.damping, cfg.llr_clip, est, post, r, False
        )
        fixed = np.zeros(self.cols, dtype=bool)
        for _ in range(cfg.decimation_rounds if cfg.max_iter else 0):
            if converged:
                break
            # force the unfixed bit most likely to be flipped; lowest index on ties
            v = int(np.argmin(np.where(fixed, np.inf, post)))
            fixed[v] = True
            llr[v] = -cfg.llr_clip
            converged, more = _bp_kernel(
                self.check_ptr, self.check_vars, s, llr, cfg.decimation_iter, serial, cfg.damping, cfg.llr_clip, est, post, r, True
            )
            iters += more
        return est, bool(converged), int(iters)


@dataclass(frozen=True)
class BPResult:
    estimate: BitVector
    converged: bool
    iterations: int


def bp_decode(H: BinaryMatrix, s: BitVector, priors, cfg: DecoderConfig | None = None) -> BPResult:
    """Decode ``H e = s`` given per-bit flip probabilities ``priors``."""
    if len(s) != H.rows:
        raise ValueError(f"syndrome has length {len(s)}, H has {H.rows} rows")
    priors = np.asarray(priors, dtype=np.float64)
    if priors.ndim and priors.size != H.cols:
        raise ValueError(f"{priors.size} priors for {H.cols} columns")
    est, ok, it = BPDecoder(H, cfg).decode(s.to_array(), priors)
    return BPResult(BitVector.from_bits(est), ok, it)


@dataclass(frozen=True)
class PauliDecode:
    correction: PauliVector
    converged: bool
    iterations: int


class DecoupledDecoder:
    """X component against H_Z, Z component against H_X, optional Y reweighting."""

    def __init__(self, code: CssCode, cfg: DecoderConfig | None = None):
        self.cfg = cfg or DecoderConfig()
        self.code = code
        self._x = BPDecoder(code.hz, self.cfg)
        self._z = BPDecoder(code.hx, self.cfg)

    def decode_arrays(self, s_x: np.ndarray, s_z: np.ndarray, p: float) -> tuple[np.ndarray, np.ndarray, bool, int]:
        pri = depolarizing_priors(p)
        cx, ok_x, it_x = self._x.decode(s_z, pri.p_x)
        cz, ok_z, it_z = self._z.decode(s_x, pri.p_z)
        iters = it_x + it_z
        if self.cfg.y_reweight and cx.any() and s_x.any():
            # P(z flip | x flip) = P(Y) / P(X or Y) = 1/2
            probs = np.full(cx.size, pri.p_z)
            probs[cx.astype(bool)] = 0.5
            cz2, ok_z2, it_z2 = self._z.decode(s_x, probs)
            iters += it_z2
            if ok_z2 or not ok_z:
                cz, ok_z = cz2, ok_z2
        return cx, cz, ok_x and ok_z, iters

    def decode(self, s: Syndrome, p: float) -> PauliDecode:
        if len(s.s_x) != self.code.hx.rows or len(s.s_z) != self.code.hz.rows:
            raise ValueError("syndrome sizes do not match the code")
        cx, cz, ok, it = self.decode_arrays(s.s_x.to_array(), s.s_z.to_array(), p)
        return PauliDecode(PauliVector.from_arrays(cx, cz), ok, it)


def decode_pauli(code: CssCode, s: Syndrome, p: float, cfg: DecoderConfig | None = None) -> PauliDecode:
    return DecoupledDecoder(code, cfg).decode(s, p)


def _coset_masks(H: BinaryMatrix, s: BitVector) -> np.ndarray:
    """All solutions of ``H x = s`` as integers, qubit ``i`` weighted ``2**i``."""
    x0 = solve(H, s)
    if x0 is None:
        raise ValueError("syndrome is inconsistent with the check matrix")
    n = H.cols
    weights = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
    base = int(x0.to_array().astype(np.int64) @ weights)
    kernel = nullspace_basis(H).to_dense().astype(np.int64) @ weights
    masks = np.array([base], dtype=np.int64)
    for g in kernel:
        masks = np.concatenate([masks, masks ^ g])
    return masks


def ml_oracle(code: CssCode, s: Syndrome, p: float) -> PauliVector:
    """Most likely depolarizing error with syndrome ``s``, by exhaustive search.

    Ties go to the smallest ``(x_part, z_part)`` pair, each part read as the
    integer ``sum(bit_i * 2**i)``; so X on qubit 0 beats X on qubit 1.
    """
    n = code.N
    if n > ML_MAX_QUBITS:
        raise ValueError(f"ml_oracle is limited to {ML_MAX_QUBITS} qubits, code has {n}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    xs = np.sort(_coset_masks(code.hz, s.s_z))
    zs = np.sort(_coset_masks(code.hx, s.s_x))
    # likelihood (p/3)^w (1-p)^(n-w) is monotone in the support size w
    prefer_small = p / 3.0 < 1.0 - p
    best_w = None
    best = (0, 0)
    for x in xs:
        w = np.bitwise_count(zs | x)
        target = w.min() if prefer_small else w.max()
        better = best_w is None or (target < best_w if prefer_small else target > best_w)
        if better:
            best_w = int(target)
            best = (int(x), int(zs[np.flatnonzero(w == target)[0]]))
    shifts = np.arange(n)
    x_bits = (best[0] >> shifts) & 1
    z_bits = (best[1] >> shifts) & 1
    return PauliVector.from_arrays(x_bits, z_bits)
