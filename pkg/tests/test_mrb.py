import itertools

import numpy as np
import pytest

from tcjam.bch import EBCH128
from tcjam.gf2 import RankError, rank
from tcjam.mrb import MrbConfig, MrbDecoder, mrb_decode

EXT_HAMMING_G = np.array([
    [1, 0, 0, 0, 0, 1, 1, 1],
    [0, 1, 0, 0, 1, 0, 1, 1],
    [0, 0, 1, 0, 1, 1, 0, 1],
    [0, 0, 0, 1, 1, 1, 1, 0],
], dtype=np.uint8)


def all_codewords(G):
    k = G.shape[0]
    msgs = np.array(list(itertools.product([0, 1], repeat=k)), dtype=np.uint8)
    return (msgs.astype(int) @ G.astype(int)) % 2


def ml_decode(llr, book):
    return book[np.argmax(((1 - 2 * book) * llr).sum(axis=1))]


def osd0_oracle(llr, G):
    """Order-0 OSD written from scratch: greedy independent columns, solve for the message."""
    k = G.shape[0]
    order = sorted(range(len(llr)), key=lambda j: (-abs(llr[j]), j))
    chosen = []
    for j in order:
        if rank(G[:, chosen + [j]]) > len(chosen):
            chosen.append(j)
        if len(chosen) == k:
            break
    hard = (np.asarray(llr) < 0).astype(int)
    # brute-force the unique message agreeing with the hard decisions on the basis
    for m in itertools.product([0, 1], repeat=k):
        c = (np.array(m) @ G.astype(int)) % 2
        if np.array_equal(c[chosen], hard[chosen]):
            return c


def noisy_llrs(rng, G, frames, sigma):
    book = all_codewords(G)
    cw = book[rng.integers(0, len(book), frames)]
    y = (1 - 2 * cw) + sigma * rng.standard_normal(cw.shape)
    return 2 * y / sigma ** 2


def test_noiseless_codeword(rng):
    dec = MrbDecoder(EBCH128.G, MrbConfig(order=2))
    msg = rng.integers(0, 2, 64, dtype=np.uint8)
    cw = (msg.astype(int) @ EBCH128.G) % 2
    llr = 5.0 * (1 - 2 * cw)
    out, m, metric = dec.decode(llr)
    assert np.array_equal(out, cw)
    assert np.array_equal(m, msg)
    assert metric == pytest.approx(np.abs(llr).sum())


def test_full_order_is_ml_on_extended_hamming():
    rng = np.random.default_rng(3)
    book = all_codewords(EXT_HAMMING_G)
    llrs = noisy_llrs(rng, EXT_HAMMING_G, 10_000, 0.9)
    cws, _, _ = MrbDecoder(EXT_HAMMING_G, MrbConfig(order=4)).decode_batch(llrs)
    ml = np.array([ml_decode(l, book) for l in llrs])
    assert np.array_equal(cws, ml)


def test_order_zero_matches_osd0_oracle():
    rng = np.random.default_rng(4)
    llrs = noisy_llrs(rng, EXT_HAMMING_G, 500, 1.0)
    cws, _, _ = MrbDecoder(EXT_HAMMING_G, MrbConfig(order=0)).decode_batch(llrs)
    for l, c in zip(llrs, cws):
        assert np.array_equal(c, osd0_oracle(l, EXT_HAMMING_G))


@pytest.mark.parametrize("n,k", [(8, 4), (16, 8)])
def test_full_order_is_ml_on_random_codes(n, k):
    rng = np.random.default_rng(n)
    while True:
        G = rng.integers(0, 2, (k, n), dtype=np.uint8)
        if rank(G) == k:
            break
    book = all_codewords(G)
    llrs = noisy_llrs(rng, G, 1000, 1.0)
    cws, _, metrics = MrbDecoder(G, MrbConfig(order=k)).decode_batch(llrs)
    for l, c, mt in zip(llrs, cws.astype(int), metrics):
        best = ml_decode(l, book)
        assert ((1 - 2 * c) * l).sum() == pytest.approx(((1 - 2 * best) * l).sum())
        assert mt == pytest.approx(((1 - 2 * c) * l).sum())


def test_metric_monotone_in_order_and_outputs_are_codewords():
    rng = np.random.default_rng(5)
    dec = MrbDecoder(EBCH128.G)
    msgs = rng.integers(0, 2, (60, 64), dtype=np.uint8)
    cw = (msgs.astype(int) @ EBCH128.G) % 2
    y = (1 - 2 * cw) + 0.8 * rng.standard_normal(cw.shape)
    llrs = 2 * y / 0.64
    prev = None
    for order in range(4):
        cws, m, metrics = dec.decode_batch(llrs, order=order)
        assert np.array_equal((m.astype(int) @ EBCH128.G) % 2, cws)
        if prev is not None:
            assert (metrics >= prev - 1e-9).all()
        prev = metrics


def test_column_permutation_equivariance(rng):
    G = EXT_HAMMING_G
    perm = rng.permutation(8)
    llrs = noisy_llrs(rng, G, 200, 1.0)
    a, _, _ = MrbDecoder(G, MrbConfig(order=2)).decode_batch(llrs)
    b, _, _ = MrbDecoder(G[:, perm], MrbConfig(order=2)).decode_batch(llrs[:, perm])
    assert np.array_equal(a[:, perm], b)


def test_pattern_budget_limits_search(rng):
    llrs = noisy_llrs(rng, EXT_HAMMING_G, 200, 1.2)
    full = MrbDecoder(EXT_HAMMING_G, MrbConfig(order=4)).decode_batch(llrs)[2]
    one = MrbDecoder(EXT_HAMMING_G, MrbConfig(order=4, pattern_budget=1)).decode_batch(llrs)[2]
    zero = MrbDecoder(EXT_HAMMING_G, MrbConfig(order=0)).decode_batch(llrs)[2]
    assert np.allclose(one, zero)
    assert (full >= one - 1e-9).all()


def test_errors():
    with pytest.raises(RankError):
        MrbDecoder(np.array([[1, 1, 0], [1, 1, 0]], dtype=np.uint8))
    with pytest.raises(ValueError):
        MrbConfig(order=-1)
    with pytest.raises(ValueError):
        MrbConfig(pattern_budget=0)
    with pytest.raises(ValueError):
        mrb_decode(np.full(8, np.nan), EXT_HAMMING_G)
    with pytest.raises(ValueError):
        mrb_decode(np.ones(7), EXT_HAMMING_G)
