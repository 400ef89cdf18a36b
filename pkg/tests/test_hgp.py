import math

import numpy as np
import pytest
from conftest import HX5, HZ5
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from oracles import dense_rank

from tgre_hgp.gf2 import BinaryMatrix
from tgre_hgp.hgp import CssCode, CssError, build_tgre_hgp, code_params, hgp, weight_gate, weight_stats
from tgre_hgp.tanner import build_tgre, default_rule, repetition_fallback_seed

EXPECTED_PARAMS = {1: (5, 1), 2: (20, 4), 3: (80, 16), 4: (320, 64)}


def test_hgp_of_parity_checks_by_hand():
    one = BinaryMatrix.from_dense([[1, 1]])
    code = hgp(one, one)
    assert code.N == 5
    assert code.hx.to_dense().tolist() == HX5.tolist()
    assert code.hz.to_dense().tolist() == HZ5.tolist()
    assert not ((HX5.astype(int) @ HZ5.T) % 2).any()


@pytest.mark.parametrize("L", [1, 2, 3, 4])
def test_tgre_product_params(L):
    code = build_tgre_hgp(L)
    N, k = code_params(code)
    assert (N, k) == EXPECTED_PARAMS[L]
    # k from ranks computed by an independent eliminator
    if L <= 3:
        assert k == N - dense_rank(code.hx.to_dense()) - dense_rank(code.hz.to_dense())
    assert k / N == pytest.approx(0.2)
    n = 2**L
    assert (N, k) == (5 * n * n // 4, n * n // 4)


def test_build_l1_is_the_5_1_code(code5):
    assert code5.hx.to_dense().tolist() == HX5.tolist()
    assert code5.hz.to_dense().tolist() == HZ5.tolist()
    meta = code5.seed_meta
    assert meta["n"] == 2 and meta["L"] == 1 and meta["H1"] == "Z-TGRE" and meta["H2"] == "X-TGRE"
    assert meta["rule_sha256"] == default_rule().digest()


def test_fallback_seed_product():
    H = repetition_fallback_seed(2, 3)
    code = hgp(H, H)
    assert code.N == 3 * 3 + 2 * 2
    assert code.k == code.N - dense_rank(code.hx.to_dense()) - dense_rank(code.hz.to_dense())
    assert code.is_css()


def test_hgp_rejects_empty():
    with pytest.raises(ValueError, match="nonempty"):
        hgp(BinaryMatrix(0, 3), BinaryMatrix.from_dense([[1, 1]]))


def test_css_code_validation():
    with pytest.raises(CssError):
        CssCode(BinaryMatrix.zeros(1, 3), BinaryMatrix.zeros(1, 4))
    bad = CssCode(BinaryMatrix.from_dense([[1, 0]]), BinaryMatrix.from_dense([[1, 0]]))
    assert not bad.is_css()


def test_weight_stats_5_1(code5):
    max_row, mean_row, max_col = weight_stats(code5)
    assert max_row == 3
    assert mean_row == 3.0
    assert max_col == 2


@pytest.mark.parametrize("L", [3, 4, 5])
def test_weight_gate(L):
    code = build_tgre_hgp(L)
    ok, ratio = weight_gate(code)
    assert ok
    assert abs(ratio - 3 / math.sqrt(5)) <= 0.1 * 3 / math.sqrt(5)


def test_no_arrow_seed_weight_is_constant():
    # block-diagonal seeds: rows of weight 2, columns of weight 1, so every
    # product stabilizer has weight 2 + 1 = 3 whatever L is
    for L in (2, 3, 4):
        H = BinaryMatrix.from_dense(np.kron(np.eye(2 ** (L - 1), dtype=np.uint8), np.array([[1, 1]], dtype=np.uint8)))
        assert H.row_weights().max() == 2 and H.col_weights().max() == 1
        assert weight_stats(hgp(H, H))[0] == 3


def test_row_weights_follow_seed_structure():
    # row (c1, v2) of H_X has weight |row c1 of H1| + |column v2 of H2|
    rule = default_rule()
    H1, H2 = build_tgre(3, rule, "Z"), build_tgre(3, rule, "X")
    code = hgp(H1, H2)
    r1, c2 = H1.row_weights(), H2.col_weights()
    expect = (r1[:, None] + c2[None, :]).ravel()
    assert code.hx.row_weights().tolist() == expect.tolist()
    c1, r2 = H1.col_weights(), H2.row_weights()
    assert code.hz.row_weights().tolist() == (c1[:, None] + r2[None, :]).ravel().tolist()


def test_rebuild_is_bit_identical():
    assert build_tgre_hgp(3) == build_tgre_hgp(3)


@pytest.mark.parametrize("L", [1, 2, 3, 4, 5])
def test_tgre_orthogonality(L):
    code = build_tgre_hgp(L)
    assert code.is_css()


@settings(max_examples=100, deadline=None)
@given(
    arrays(np.uint8, st.tuples(st.integers(1, 6), st.integers(1, 8)), elements=st.integers(0, 1)),
    arrays(np.uint8, st.tuples(st.integers(1, 6), st.integers(1, 8)), elements=st.integers(0, 1)),
)
def test_random_products_are_orthogonal(a, b):
    code = hgp(BinaryMatrix.from_dense(a), BinaryMatrix.from_dense(b))
    hx, hz = code.hx.to_dense().astype(int), code.hz.to_dense().astype(int)
    assert not ((hx @ hz.T) % 2).any()
    assert code.N == a.shape[1] * b.shape[1] + a.shape[0] * b.shape[0]
    assert code.k >= 0
