import numpy as np
import pytest

from tcjam.bch import (BCH63, BCH63_GENERATOR, EBCH128, Mode, Status, bch63_decode_hard, bch63_decode_hard_batch,
                       bch63_encode, bch63_hard_cer_analytic, bch_generator, ebch128_encode, minimal_polynomial)


def coeffs(poly_int):
    """Integer bitmask -> coefficient list, highest degree first."""
    return [int(b) for b in bin(poly_int)[2:]]


def long_division_remainder(dividend, divisor):
    """Schoolbook GF(2) long division on coefficient lists (highest degree first)."""
    rem = list(dividend)
    d = len(divisor)
    for i in range(len(rem) - d + 1):
        if rem[i]:
            for j in range(d):
                rem[i + j] ^= divisor[j]
    return rem[-(d - 1):]


def test_generator_divides_x63_plus_1():
    x63 = [1] + [0] * 62 + [1]
    assert not any(long_division_remainder(x63, coeffs(BCH63_GENERATOR)))


def test_zero_message():
    assert not bch63_encode(np.zeros(56, dtype=np.uint8)).any()
    assert not ebch128_encode(np.zeros(64, dtype=np.uint8)).any()


def test_parity_is_division_remainder(rng):
    g = coeffs(BCH63_GENERATOR)
    for _ in range(200):
        m = rng.integers(0, 2, 56).tolist()
        cw = bch63_encode(m)
        assert cw[:56].tolist() == m
        assert cw[56:].tolist() == long_division_remainder(m + [0] * 7, g)


def test_random_codewords_have_zero_syndrome(rng):
    msgs = rng.integers(0, 2, (10_000, 56), dtype=np.uint8)
    cws = bch63_encode(msgs)
    assert not ((cws.astype(int) @ BCH63.H.T) % 2).any()


def test_minimum_distance_is_four():
    # distinct nonzero H columns rule out weights 1 and 2; no column is the sum of two others rules out 3
    ids = BCH63.H.T.astype(int) @ (1 << np.arange(6, -1, -1))
    s = set(ids.tolist())
    assert len(s) == 63 and 0 not in s
    for a in range(63):
        for b in range(a + 1, 63):
            assert (ids[a] ^ ids[b]) not in s
    # and weight 4 is reached
    assert bch63_encode(np.eye(56, dtype=np.uint8)).sum(axis=1).min() == 4


def test_sec_clean_and_single_flips(rng):
    for _ in range(64):
        m = rng.integers(0, 2, 56, dtype=np.uint8)
        cw = bch63_encode(m)
        out, st = bch63_decode_hard(cw, Mode.SEC)
        assert st is Status.CLEAN and np.array_equal(out, m)
        words = np.tile(cw, (63, 1))
        words[np.arange(63), np.arange(63)] ^= 1
        msgs, codes = bch63_decode_hard_batch(words, Mode.SEC)
        assert (codes == 1).all()
        assert (msgs == m).all()


def test_ted_flags_double_errors(rng):
    m = rng.integers(0, 2, 56, dtype=np.uint8)
    cw = bch63_encode(m)
    pairs = [(a, b) for a in range(63) for b in range(a + 1, 63)]
    words = np.tile(cw, (len(pairs), 1))
    idx = np.array(pairs)
    words[np.arange(len(pairs)), idx[:, 0]] ^= 1
    words[np.arange(len(pairs)), idx[:, 1]] ^= 1
    _, codes = bch63_decode_hard_batch(words, Mode.TED)
    assert (codes == 2).all()
    # SEC never reports a double error as clean
    _, codes = bch63_decode_hard_batch(words, Mode.SEC)
    assert (codes != 0).all()


def test_ted_corrects_nothing(rng):
    cw = bch63_encode(rng.integers(0, 2, 56, dtype=np.uint8))
    cw[5] ^= 1
    msg, st = bch63_decode_hard(cw, Mode.TED)
    assert st is Status.DETECTED
    assert np.array_equal(msg, cw[:56])


def test_length_mismatch():
    with pytest.raises(ValueError):
        bch63_encode(np.zeros(55, dtype=np.uint8))
    with pytest.raises(ValueError):
        bch63_decode_hard(np.zeros(62, dtype=np.uint8))
    with pytest.raises(ValueError):
        ebch128_encode(np.zeros(63, dtype=np.uint8))


def sec_failure(p, n=63):
    return 1 - (1 - p) ** n - n * p * (1 - p) ** (n - 1)


def test_analytic_trivial_cases():
    assert bch63_hard_cer_analytic(0.0, 0.0, 0.5, False) == 0.0
    assert bch63_hard_cer_analytic(0.0, 0.0, 0.5, True) == 0.0
    for p in (1e-3, 0.02):
        a = bch63_hard_cer_analytic(1e-4, p, 1.0, False)
        b = bch63_hard_cer_analytic(1e-4, p, 1.0, True)
        assert a == pytest.approx(sec_failure(p), rel=1e-12)
        assert b == pytest.approx(sec_failure(p), rel=1e-9)


def test_analytic_rejects_bad_input():
    with pytest.raises(ValueError):
        bch63_hard_cer_analytic(-0.1, 0.0, 0.5, False)
    with pytest.raises(ValueError):
        bch63_hard_cer_analytic(0.1, 0.0, 0.0, False)


@pytest.mark.parametrize("interleaved", [False, True])
def test_analytic_matches_bit_flip_monte_carlo(interleaved):
    rng = np.random.default_rng(7)
    pc, pj, rho, N = 2e-3, 0.02, 0.5, 10_000_000
    if interleaved:
        J = rng.binomial(63, rho, N)
        errs = rng.binomial(J, pj) + rng.binomial(63 - J, pc)
    else:
        jam = rng.random(N) < rho
        errs = np.where(jam, rng.binomial(63, pj, N), rng.binomial(63, pc, N))
    mc = (errs >= 2).mean()
    exact = bch63_hard_cer_analytic(pc, pj, rho, interleaved)
    assert abs(mc - exact) < 3 * np.sqrt(exact * (1 - exact) / N)


def test_ebch_generator_structure():
    g = EBCH128.generator
    assert g.bit_length() - 1 == 63
    x127 = [1] + [0] * 126 + [1]
    assert not any(long_division_remainder(x127, coeffs(g)))
    # roots alpha^1..alpha^20 all covered: each minimal polynomial divides g
    for i in range(1, 21):
        assert not any(long_division_remainder(coeffs(g), coeffs(minimal_polynomial(i))))
    assert bch_generator(127, 64) == g


def test_ebch_codewords(rng):
    msgs = rng.integers(0, 2, (10_000, 64), dtype=np.uint8)
    cws = ebch128_encode(msgs)
    assert (cws.sum(axis=1) % 2 == 0).all()
    assert np.array_equal(cws[:, :64], msgs)
    g = coeffs(EBCH128.generator)
    # parity-check built from the generator polynomial: column j of H is x^(126-j) mod g(x)
    H = np.array([long_division_remainder([1] + [0] * (126 - j), g) if 126 - j >= 63 else
                  [0] * (63 - (127 - j)) + [1] + [0] * (126 - j) for j in range(127)], dtype=int).T
    H = np.vstack([np.hstack([H, np.zeros((63, 1), dtype=int)]), np.ones((1, 128), dtype=int)])
    assert not ((cws.astype(int) @ H.T) % 2).any()
