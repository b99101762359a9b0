"""Code construction: index matrices, parity-check structure, generators."""

import numpy as np
import pytest

from flexscatter.code import (
    CodeConfig,
    CodeConstructionError,
    Frame,
    IndexMatrixParams,
    _shift_matrix,
    build_index_matrix,
    build_instance,
    build_parity_check,
    derive_generator,
    encode_frame,
    instance_for_attempt,
    sample_exponents,
)
from flexscatter.gf2 import BinaryMatrix, gf2_mul

DEFAULT = CodeConfig()


def test_index_matrix_hand_example():
    p = IndexMatrixParams(a=3, b=7, x=0, y=0, m=1, n=1)
    assert build_index_matrix(p).tolist() == [[1, 3], [7, 21]]


def test_index_matrix_degenerate_span():
    p = IndexMatrixParams(a=3, b=7, x=2, y=1, m=0, n=0)
    assert build_index_matrix(p).tolist() == [[3**2 * 7]]


def test_shift_matrix_is_index_matrix_mod_z():
    p = IndexMatrixParams(a=3, b=7, x=5, y=3, m=4, n=4)
    raw = build_index_matrix(p)
    shifts = _shift_matrix(p, 131)
    for i in range(5):
        for j in range(5):
            assert shifts[i, j] == int(raw[i, j]) % 131


def test_params_require_distinct_primes():
    with pytest.raises(ValueError):
        IndexMatrixParams(a=4, b=7)
    with pytest.raises(ValueError):
        IndexMatrixParams(a=7, b=7)


def test_parity_check_z1_reduces_to_all_ones_grid():
    cfg = CodeConfig(z=1, params=IndexMatrixParams(m=2, n=3))
    h = build_parity_check(cfg).to_dense()
    assert h.shape == (4, 7)
    assert h[:, :3].all()  # every shifted 1x1 circulant is [1]


def test_parity_check_default_dimensions():
    h = build_parity_check(DEFAULT)
    assert (h.rows, h.cols) == (655, 1310)


def test_staircase_block_weights():
    cfg = CodeConfig(z=5, params=IndexMatrixParams(m=2, n=2))
    h = build_parity_check(cfg).to_dense()
    h2 = h[:, 3 * 5 :]
    assert h2.shape == (15, 15)
    row_w = h2.sum(axis=1)
    assert (row_w <= 2).all()
    # first block column carries only the top diagonal identity
    assert (h2[:, :5].sum(axis=0) == 1).all()


def test_derive_generator_hand_example():
    h = BinaryMatrix.from_dense(np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8))
    inst = derive_generator(h)
    assert inst.g.to_dense().tolist() == [[1, 1, 1]]
    assert not gf2_mul(inst.h, inst.g.transpose()).to_dense().any()


def test_derive_generator_default_dimensions():
    inst = build_instance(DEFAULT, 0, 0)
    assert (inst.g.rows, inst.g.cols) == (655, 1310)
    assert (inst.h.rows, inst.h.cols) == (655, 1310)


def test_generator_systematic_identity_block():
    inst = build_instance(DEFAULT, 1, 2)
    g = inst.g.to_dense()
    m = inst.m_bits
    assert np.array_equal(g[:, m:], np.eye(inst.n_bits - m, dtype=np.uint8))


def test_instance_satisfies_original_construction_matrix():
    cfg = CodeConfig(z=17, params=IndexMatrixParams(m=2, n=2))
    inst = build_instance(cfg, 3, 1)
    h_built = build_parity_check(CodeConfig(z=17, params=IndexMatrixParams(m=2, n=2, x=3, y=1)))
    u = np.random.default_rng(0).integers(0, 2, cfg.k_bits).astype(np.uint8)
    c_perm = encode_frame(inst, Frame(u))
    c_orig = np.zeros_like(c_perm)
    c_orig[inst.perm.mapping] = c_perm
    assert not (h_built.to_dense() @ c_orig % 2).any()


def test_rank_deficient_h_raises_with_rank():
    h = BinaryMatrix.from_dense(np.array([[1, 1, 0, 0], [1, 1, 0, 0]], dtype=np.uint8))
    with pytest.raises(CodeConstructionError) as err:
        derive_generator(h)
    assert err.value.rank == 1


def test_encode_zero_frame_is_zero_codeword():
    inst = build_instance(DEFAULT, 0, 0)
    c = encode_frame(inst, Frame(np.zeros(DEFAULT.k_bits, dtype=np.uint8)))
    assert not c.any()


def test_encode_roundtrips_systematic_bits():
    rng = np.random.default_rng(5)
    inst = build_instance(DEFAULT, 4, 4)
    u = rng.integers(0, 2, DEFAULT.k_bits).astype(np.uint8)
    c = encode_frame(inst, Frame(u))
    assert np.array_equal(c[DEFAULT.m_bits :], u)
    assert not (inst.h.to_dense() @ c % 2).any()


def test_encode_rejects_wrong_length():
    inst = build_instance(DEFAULT, 0, 0)
    with pytest.raises(ValueError):
        encode_frame(inst, Frame(np.zeros(10, dtype=np.uint8)))


def test_new_exponents_change_parity_not_info():
    rng = np.random.default_rng(9)
    a = build_instance(DEFAULT, 0, 0)
    b = build_instance(DEFAULT, 5, 3)
    m = DEFAULT.m_bits
    differing = 0
    for _ in range(100):
        u = rng.integers(0, 2, DEFAULT.k_bits).astype(np.uint8)
        ca, cb = encode_frame(a, Frame(u)), encode_frame(b, Frame(u))
        assert np.array_equal(ca[m:], cb[m:])
        differing += not np.array_equal(ca[:m], cb[:m])
    assert differing >= 95


def test_default_prime_bases():
    p = IndexMatrixParams()
    assert (p.a, p.b) == (3, 7)


def test_noiseless_roundtrip_thousand_frames():
    rng = np.random.default_rng(31)
    inst = build_instance(DEFAULT, 2, 5)
    from flexscatter.decoder import bp_decode

    for _ in range(1000):
        u = rng.integers(0, 2, DEFAULT.k_bits).astype(np.uint8)
        c = encode_frame(inst, Frame(u))
        out = bp_decode(inst, (1.0 - 2.0 * c.astype(np.float64)) * 20.0)
        assert out.ack
        assert np.array_equal(out.hard[DEFAULT.m_bits :], u)


def test_sample_exponents_deterministic():
    assert sample_exponents(42, 7, 3, (0, 9)) == sample_exponents(42, 7, 3, (0, 9))


def test_sample_exponents_singleton_range():
    assert sample_exponents(1, 0, 0, (3, 3)) == (3, 3)


def test_sample_exponents_uniform_frequencies():
    counts = np.zeros(10, dtype=np.int64)
    for attempt in range(10_000):
        x, _ = sample_exponents(17, 0, attempt, (0, 9))
        counts[x] += 1
    sigma = np.sqrt(10_000 * 0.1 * 0.9)
    assert (np.abs(counts - 1000) < 5 * sigma).all()


def test_attempt_regeneration_is_bit_identical():
    a = instance_for_attempt(DEFAULT, seed=3, frame_id=12, attempt=2)
    b = instance_for_attempt(DEFAULT, seed=3, frame_id=12, attempt=2)
    assert a.h == b.h and a.g == b.g and a.exponents == b.exponents


def test_distinct_attempts_draw_fresh_exponents():
    seen = {instance_for_attempt(DEFAULT, seed=3, frame_id=0, attempt=k).exponents for k in range(1, 9)}
    assert len(seen) > 1
