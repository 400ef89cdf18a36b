import numpy as np
import pytest
from conftest import HZ5
from oracles import all_vectors, brute_quantum_distance, dense_rank, in_rowspace

from tgre_hgp.css import (
    LogicalSet,
    Outcome,
    PauliVector,
    classify_residual,
    quantum_distance_bruteforce,
    standard_form,
    syndrome,
)
from tgre_hgp.gf2 import BinaryMatrix, symplectic_inner
from tgre_hgp.hgp import build_tgre_hgp, hgp
from tgre_hgp.tanner import build_tgre, classical_distance, repetition_fallback_seed


def symplectic_matrix(a_ops, b_ops):
    return np.array([[symplectic_inner(a, b) for b in b_ops] for a in a_ops], dtype=int)


def stabilizers(code):
    n = code.N
    zero = np.zeros(n, dtype=np.uint8)
    return [PauliVector.from_arrays(r, zero) for r in code.hx.to_dense()] + [
        PauliVector.from_arrays(zero, r) for r in code.hz.to_dense()
    ]


def test_pauli_vector_basics():
    p = PauliVector.from_string("IXYZ")
    assert str(p) == "IXYZ"
    assert p.weight() == 3
    assert p.x.to_array().tolist() == [0, 1, 1, 0]
    assert p.z.to_array().tolist() == [0, 0, 1, 1]
    assert (p ^ p).is_identity()
    with pytest.raises(ValueError):
        PauliVector.from_arrays([1, 0], [1])


def test_standard_form_5_1(code5):
    L = standard_form(code5)
    assert L.k == 1
    stabs = stabilizers(code5)
    ops = list(L.logical_x) + list(L.logical_z)
    # exhaustive symplectic checks against every stabilizer row
    assert not symplectic_matrix(ops, stabs).any()
    assert symplectic_matrix(L.logical_x, L.logical_z).tolist() == [[1]]
    assert str(L.logical_x[0]) == "IIXXI"
    assert str(L.logical_z[0]) == "IZIZI"


def test_standard_form_l2(code20):
    L = standard_form(code20)
    assert L.k == 4
    assert np.array_equal(symplectic_matrix(L.logical_x, L.logical_z), np.eye(4, dtype=int))
    assert np.array_equal(L.pairing_matrix(), np.eye(4, dtype=np.uint8))


@pytest.mark.parametrize("L", [1, 2, 3, 4])
def test_logical_invariants_all_levels(L):
    code = build_tgre_hgp(L)
    logicals = code.logicals
    assert logicals.k == code.k
    assert logicals.verify(code) == {"count": True, "commute": True, "pairing": True, "outside_stabilizer": True}


def test_logicals_outside_stabilizer_space_oracle(code20):
    L = standard_form(code20)
    hx, hz = code20.hx.to_dense(), code20.hz.to_dense()
    for op in L.logical_x:
        assert not in_rowspace(op.x.to_array(), hx)
    for op in L.logical_z:
        assert not in_rowspace(op.z.to_array(), hz)


def test_verify_detects_bad_logicals(code5):
    good = code5.logicals
    stab = PauliVector.from_arrays(code5.hx.to_dense()[0], np.zeros(5, dtype=np.uint8))
    fake = LogicalSet(logical_x=(stab,), logical_z=good.logical_z)
    v = fake.verify(code5)
    assert not v["outside_stabilizer"] and not v["pairing"]


def test_syndrome_examples(code5):
    n = code5.N
    s = syndrome(code5, PauliVector.identity(n))
    assert s.is_zero()
    s = syndrome(code5, PauliVector.single(n, 0, "X"))
    assert s.s_z.to_array().tolist() == HZ5[:, 0].tolist() == [1, 0]
    assert s.s_x.to_array().tolist() == [0, 0]
    row = PauliVector.x_type(code5.hx.to_dense()[1])
    assert syndrome(code5, row).is_zero()
    with pytest.raises(ValueError):
        syndrome(code5, PauliVector.identity(4))


def test_syndrome_is_linear(code20):
    rng = np.random.default_rng(2)
    for _ in range(20):
        a = PauliVector.from_arrays(*rng.integers(0, 2, (2, 20)))
        b = PauliVector.from_arrays(*rng.integers(0, 2, (2, 20)))
        sa, sb, sab = syndrome(code20, a), syndrome(code20, b), syndrome(code20, a ^ b)
        assert sab.s_x == sa.s_x ^ sb.s_x and sab.s_z == sa.s_z ^ sb.s_z


def test_classify_residual_examples(code20):
    L = code20.logicals
    n = code20.N
    assert classify_residual(code20, PauliVector.identity(n), L).kind == "success"
    stab = PauliVector.z_type(code20.hz.to_dense()[3])
    assert classify_residual(code20, stab, L).success
    # a logical X anticommutes only with its partner logical Z: f_x[0] = <r, Z_0> = 1
    out = classify_residual(code20, L.logical_x[0], L)
    assert out.kind == "logical-failure"
    assert out.flips_x.tolist() == [1, 0, 0, 0]
    assert out.flips_z.tolist() == [0, 0, 0, 0]
    out = classify_residual(code20, L.logical_z[2], L)
    assert out.flips_z.tolist() == [0, 0, 1, 0]
    assert out.flips_x.tolist() == [0, 0, 0, 0]
    assert classify_residual(code20, PauliVector.single(n, 0, "Y"), L).kind == "syndrome-mismatch"
    assert Outcome("syndrome-mismatch").failed_qubits() is None


def test_classify_invariant_under_stabilizers(code20):
    L = code20.logicals
    rng = np.random.default_rng(4)
    stabs = stabilizers(code20)
    for _ in range(30):
        # make a random logical-class residual by summing logicals and stabilizers
        r = PauliVector.identity(20)
        for op in list(L.logical_x) + list(L.logical_z) + stabs:
            if rng.random() < 0.3:
                r = r ^ op
        s = stabs[int(rng.integers(len(stabs)))]
        a, b = classify_residual(code20, r, L), classify_residual(code20, r ^ s, L)
        assert a.kind == b.kind
        assert np.array_equal(a.flips_x, b.flips_x) and np.array_equal(a.flips_z, b.flips_z)


def test_distance_5_1(code5):
    assert quantum_distance_bruteforce(code5) == 2
    assert brute_quantum_distance(code5.hx.to_dense(), code5.hz.to_dense()) == 2


def test_distance_l2_equals_seed_distance(code20):
    d = quantum_distance_bruteforce(code20)
    seed_d = classical_distance(build_tgre(2))
    assert d == seed_d == 2
    assert brute_quantum_distance(code20.hx.to_dense(), code20.hz.to_dense()) == 2


def test_distance_repetition_product():
    H = repetition_fallback_seed(1, 2)
    assert quantum_distance_bruteforce(hgp(H, H)) == 2
    H = repetition_fallback_seed(2, 3)
    code = hgp(H, H)
    assert quantum_distance_bruteforce(code) == brute_quantum_distance(code.hx.to_dense(), code.hz.to_dense()) == 3


def test_distance_cap_refused(code80):
    with pytest.raises(ValueError, match="cap"):
        quantum_distance_bruteforce(code80, cap=10)


def test_standard_form_on_random_products():
    rng = np.random.default_rng(7)
    for _ in range(15):
        a = rng.integers(0, 2, (rng.integers(1, 4), rng.integers(2, 6)))
        b = rng.integers(0, 2, (rng.integers(1, 4), rng.integers(2, 6)))
        code = hgp(BinaryMatrix.from_dense(a), BinaryMatrix.from_dense(b))
        assert code.k == code.N - dense_rank(code.hx.to_dense()) - dense_rank(code.hz.to_dense())
        if code.k:
            assert all(code.logicals.verify(code).values())


def test_kernel_oracle_agrees_for_5_1(code5):
    hz = code5.hz.to_dense().astype(int)
    kern = [v for v in all_vectors(5) if not ((hz @ v) % 2).any()]
    assert len(kern) == 8
