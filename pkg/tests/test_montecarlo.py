import math

import numpy as np
import pytest
from oracles import depolarizing_errors

from tgre_hgp.bp import DecoderConfig
from tgre_hgp.css import PauliVector
from tgre_hgp.montecarlo import (
    DEFAULT_P_GRID,
    Counts,
    CurvePoint,
    RunConfig,
    TrialRunner,
    _run_block,
    estimate_threshold,
    run_curve,
    run_point,
    run_trial,
    sample_depolarizing,
    trial_rng,
    wilson_interval,
)


def synthetic(N, ps, f):
    return [CurvePoint(N, 1, p, 100, f(p), (0.0, 1.0), [f(p)], f(p)) for p in ps]


def test_default_grid():
    assert DEFAULT_P_GRID == (0.06, 0.07, 0.08, 0.09, 0.1, 0.11, 0.12, 0.13)


def test_sampling_marginals():
    n, p = 1_000_000, 0.3
    e = sample_depolarizing(n, p, np.random.default_rng(0))
    x, z = e.x.to_array().astype(bool), e.z.to_array().astype(bool)
    counts = {
        "I": int((~x & ~z).sum()),
        "X": int((x & ~z).sum()),
        "Y": int((x & z).sum()),
        "Z": int((~x & z).sum()),
    }
    for label, prob in {"I": 0.7, "X": 0.1, "Y": 0.1, "Z": 0.1}.items():
        sigma = math.sqrt(n * prob * (1 - prob))
        assert abs(counts[label] - n * prob) < 3 * sigma, label


def test_sampling_low_noise_and_determinism():
    e = sample_depolarizing(1000, 1e-9, np.random.default_rng(1))
    assert e.is_identity()
    a = sample_depolarizing(50, 0.2, trial_rng(9, 2, 3))
    b = sample_depolarizing(50, 0.2, trial_rng(9, 2, 3))
    c = sample_depolarizing(50, 0.2, trial_rng(9, 2, 4))
    assert a == b and a != c
    with pytest.raises(ValueError):
        sample_depolarizing(5, 0.75, np.random.default_rng(0))


def test_run_trial_forced(code20):
    lg = code20.logicals
    assert run_trial(code20, lg, 0.05, None, error=PauliVector.identity(20)).success
    out = run_trial(code20, lg, 0.05, None, error=lg.logical_x[0], decode=False)
    assert out.kind == "logical-failure"
    assert out.flips.tolist() == [1, 0, 0, 0]
    stab = PauliVector.x_type(code20.hx.to_dense()[2])
    assert run_trial(code20, lg, 0.05, None, error=stab, decode=False).success
    out = run_trial(code20, lg, 0.05, None, error=PauliVector.single(20, 0, "X"), decode=False)
    assert out.kind == "syndrome-mismatch" and out.flips is None


def test_run_trial_sampled_is_deterministic(code20):
    lg = code20.logicals
    a = run_trial(code20, lg, 0.1, None, rng=trial_rng(3, 0, 17))
    b = run_trial(code20, lg, 0.1, None, rng=trial_rng(3, 0, 17))
    assert a.kind == b.kind and a.iterations == b.iterations


def test_run_point_low_noise(code5):
    pt = run_point(code5, code5.logicals, 1e-4, 100, master_seed=0)
    assert pt.trials == 100
    assert pt.ler_block <= 0.02


class _IdentityRunner(TrialRunner):
    def run(self, p, rng=None, error=None, decode=True):
        return super().run(p, rng, error, decode=False)


def test_identity_decoder_matches_exact_enumeration(code5):
    # with correction 0 a trial succeeds iff e lies in the stabilizer group
    p, trials = 0.3, 20_000
    lg = code5.logicals
    exact_success = 0.0
    hx, hz = code5.hx.to_dense().astype(int), code5.hz.to_dense().astype(int)
    lx = lg.x_matrix().to_dense().astype(int)
    lz = lg.z_matrix().to_dense().astype(int)
    for x, z, w in depolarizing_errors(5):
        in_group = not (((hz @ x) % 2).any() or ((hx @ z) % 2).any() or ((lz @ x) % 2).any() or ((lx @ z) % 2).any())
        if in_group:
            exact_success += (p / 3) ** w * (1 - p) ** (5 - w)
    exact = 1 - exact_success
    runner = _IdentityRunner(code5, lg)
    counts = _run_block(runner, p, master_seed=5, point_index=0, start=0, stop=trials)
    pt = CurvePoint.from_counts(5, 1, p, counts)
    sigma = math.sqrt(exact * (1 - exact) / trials)
    assert abs(pt.ler_block - exact) < 3 * sigma


def test_workers_do_not_change_results(code20):
    lg = code20.logicals
    a = run_point(code20, lg, 0.08, 1200, master_seed=42, workers=1)
    b = run_point(code20, lg, 0.08, 1200, master_seed=42, workers=3)
    assert a == b


def test_run_point_index_matches_curve(code20):
    run = RunConfig(p_grid=(0.07, 0.09), trials=600, master_seed=8)
    curve = run_curve(code20, run)
    lone = run_point(code20, code20.logicals, 0.09, 600, master_seed=8, point_index=1)
    assert curve[1] == lone


def test_point_invariants(code20):
    run = RunConfig(p_grid=(0.06, 0.1, 0.13), trials=1500, master_seed=1)
    seen = []
    pts = run_curve(code20, run, on_point=seen.append)
    assert seen == pts
    for pt in pts:
        assert 0 <= pt.ler_slq_mean <= 1
        assert pt.ler_block >= max(pt.ler_slq) >= 0
        assert pt.ler_slq_mean == pytest.approx(np.mean(pt.ler_slq))
        lo, hi = pt.ler_block_ci
        assert lo <= pt.ler_block <= hi
    # nondecreasing in p up to CI overlap
    for a, b in zip(pts, pts[1:]):
        assert b.ler_block >= a.ler_block or b.ler_block_ci[1] >= a.ler_block_ci[0]


def test_wilson_examples():
    lo, hi = wilson_interval(0, 100)
    z2 = 1.96**2
    assert lo == 0.0
    assert hi == pytest.approx((z2 / 100) / (1 + z2 / 100), abs=1e-12)
    assert hi == pytest.approx(0.0370, abs=5e-5)
    lo, hi = wilson_interval(50, 100)
    assert (lo + hi) / 2 == pytest.approx(0.5)
    assert wilson_interval(100, 100)[1] == 1.0
    with pytest.raises(ValueError):
        wilson_interval(5, 4)
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


def test_threshold_synthetic_crossing():
    ps = [0.06, 0.08, 0.1, 0.12, 0.14]
    est = estimate_threshold({20: synthetic(20, ps, lambda p: p), 80: synthetic(80, ps, lambda p: 10 * p * p)})
    assert est.median_p == pytest.approx(0.1)
    assert est.crossings == [{"small": 20, "large": 80, "p": pytest.approx(0.1)}]


def test_threshold_interpolates_between_points():
    ps = [0.05, 0.07, 0.09, 0.11, 0.13]
    est = estimate_threshold({20: synthetic(20, ps, lambda p: p), 80: synthetic(80, ps, lambda p: 10 * p * p)})
    # linear in (p, log LER): log(10 p) is not linear in p, so the estimate is close, not exact
    assert est.median_p == pytest.approx(0.1, abs=2e-3)


def test_threshold_identical_curves_absent():
    ps = [0.06, 0.08, 0.1]
    est = estimate_threshold({20: synthetic(20, ps, lambda p: p), 80: synthetic(80, ps, lambda p: p)})
    assert est.median_p is None
    assert est.crossings[0]["p"] is None


def test_threshold_median_of_pairs():
    ps = [0.06, 0.08, 0.1, 0.12, 0.14]
    curves = {
        20: synthetic(20, ps, lambda p: p),
        80: synthetic(80, ps, lambda p: 10 * p * p),
        320: synthetic(320, ps, lambda p: 0.1),  # meets 10 p^2 at p = 0.1
    }
    est = estimate_threshold(curves)
    assert [c["p"] for c in est.crossings] == [pytest.approx(0.1), pytest.approx(0.1)]
    assert est.median_p == pytest.approx(0.1)
    block = estimate_threshold(curves, metric="ler_block")
    assert block.median_p == pytest.approx(0.1)


def test_threshold_errors():
    ps = [0.06, 0.08]
    with pytest.raises(ValueError, match="at least two"):
        estimate_threshold({20: synthetic(20, ps, lambda p: p)})
    with pytest.raises(ValueError, match="share"):
        estimate_threshold({20: synthetic(20, ps, lambda p: p), 80: synthetic(80, [0.06, 0.09], lambda p: p)})
    with pytest.raises(ValueError, match="metric"):
        estimate_threshold({20: synthetic(20, ps, lambda p: p), 80: synthetic(80, ps, lambda p: p)}, metric="x")


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(p_grid=(0.1, 0.05))
    with pytest.raises(ValueError):
        RunConfig(p_grid=(0.8,))
    with pytest.raises(ValueError):
        RunConfig(trials=0)
    with pytest.raises(ValueError):
        RunConfig(master_seed=-1)
    d = RunConfig(decoder=DecoderConfig(max_iter=7)).to_dict()
    assert d["decoder"]["max_iter"] == 7


def test_counts_add():
    a = Counts(2, 1, 0, 0, np.array([1, 0]))
    b = Counts(3, 2, 1, 1, np.array([1, 1]))
    a.add(b)
    assert (a.trials, a.block_failures, a.mismatches, a.nonconverged) == (5, 3, 1, 1)
    assert a.qubit_failures.tolist() == [2, 1]
