import numpy as np
import pytest
from conftest import random_rationals

from tdce.clustering import ClusteredFilter, kmeans_cluster, reconstruct_taps
from tdce.engine import (
    OpCounter,
    clustered_complexity,
    clustered_convolve,
    direct_convolve,
    presum_parallel,
    presum_sequential,
    window_routing,
)
from tdce.fixedpoint import TDCE_FORMAT, quantize_complex_block
from tdce.signal import SignalBlock
from tdce.taps import ChannelSpec, generate_taps


def _brute_presum(window, q, n_c):
    return np.array([window[q == c].sum() if np.any(q == c) else 0 for c in range(n_c)], dtype=complex)


def _rand(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def test_presum_sequential_matches_grouping():
    rng = np.random.default_rng(0)
    q = np.array([0, 2, 1, 0, 2, 2, 1])
    w = _rand(rng, 7)
    np.testing.assert_allclose(presum_sequential(w, q), _brute_presum(w, q, 3))


def test_presum_parallel_lanes_are_sequential_windows():
    rng = np.random.default_rng(1)
    q = rng.integers(0, 4, 11)
    q[:4] = np.arange(4)
    L = 6
    x = _rand(rng, 11 + L - 1)
    st = presum_parallel(x, q, L)
    assert (st.lanes, st.n_clusters) == (L, 4)
    for j in range(L):
        np.testing.assert_array_equal(st.lane(j), presum_sequential(x[j : j + 11], q))


def test_presum_length_checks():
    with pytest.raises(ValueError):
        presum_sequential(np.zeros(3), [0, 1])
    with pytest.raises(ValueError):
        presum_parallel(np.zeros(5), [0, 1], 3)
    with pytest.raises(ValueError):
        presum_parallel(np.zeros(2), [0, 1], 0)


def test_direct_convolve_matches_numpy():
    rng = np.random.default_rng(2)
    g = _rand(rng, 9)
    x = _rand(rng, 100)
    np.testing.assert_allclose(direct_convolve(x, g), np.convolve(x, g, mode="valid"), rtol=1e-12)


def test_direct_identity_tap():
    x = np.arange(5) + 0j
    np.testing.assert_array_equal(direct_convolve(x, [1.0]), x)


def test_direct_rejects_short_input():
    with pytest.raises(ValueError):
        direct_convolve(np.zeros(3), np.ones(5))


def test_clustered_equals_direct_on_reconstruction():
    taps = generate_taps(ChannelSpec(), 31)
    cf = kmeans_cluster(taps, 9, seed=0)
    rng = np.random.default_rng(3)
    x = np.stack([_rand(rng, 500), _rand(rng, 500)])
    ref = direct_convolve(x, reconstruct_taps(cf))
    for L in (1, 7, 64, 1000):
        np.testing.assert_allclose(clustered_convolve(x, cf, L), ref, rtol=1e-12, atol=1e-12)


def test_clustered_with_all_clusters_is_direct():
    taps = generate_taps(ChannelSpec(), 21)
    cf = kmeans_cluster(taps, 21)
    x = _rand(np.random.default_rng(4), 200)
    np.testing.assert_allclose(clustered_convolve(x, cf), direct_convolve(x, taps), rtol=1e-12, atol=1e-13)


def test_clustered_exact_in_rationals():
    rng = np.random.default_rng(5)
    M, n_c = 7, 3
    routing = np.array([0, 1, 2, 1, 0, 2, 2])
    cents = random_rationals(rng, n_c)
    cf = ClusteredFilter(cents, routing)
    x = random_rationals(rng, 20)
    got = clustered_convolve(x, cf, L=4)
    ref = direct_convolve(x, cents[routing])
    assert got.dtype == object
    assert all(a == b for a, b in zip(got, ref))


def test_fixed_point_mode_equals_direct_on_quantized_inputs():
    taps = generate_taps(ChannelSpec(), 15)
    cf = kmeans_cluster(taps, 5, seed=0)
    x = 0.5 * _rand(np.random.default_rng(6), 300)
    got = clustered_convolve(x, cf, 16, TDCE_FORMAT)
    gq = quantize_complex_block(cf.centroids, TDCE_FORMAT)[cf.routing]
    ref = direct_convolve(quantize_complex_block(x, TDCE_FORMAT), gq)
    np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-13)


def test_signal_block_round_trip_and_metadata():
    taps = generate_taps(ChannelSpec(), 11)
    cf = kmeans_cluster(taps, 4, seed=0)
    blk = SignalBlock(np.ones((2, 40)), role="rx", metadata={"run": 1})
    out = clustered_convolve(blk, cf)
    assert isinstance(out, SignalBlock)
    assert out.role == "equalized" and out.metadata["run"] == 1
    assert out.samples.shape == (2, 30)


def test_op_counter_reports_nc_products_per_output():
    taps = generate_taps(ChannelSpec(), 31)
    cf = kmeans_cluster(taps, 9, seed=0)
    c = OpCounter()
    clustered_convolve(np.ones(200, complex), cf, 16, counter=c)
    assert c.outputs == 170
    assert c.complex_mults_per_sample == 9
    assert c.real_mults_per_sample == clustered_complexity(9) == 36


def test_window_routing_is_reversed():
    cf = ClusteredFilter([1, 2], [0, 0, 1])
    assert window_routing(cf).tolist() == [1, 0, 0]


@pytest.mark.parametrize("nc,c", [(9, 36), (10, 40), (12, 48), (6, 24), (8, 32)])
def test_clustered_complexity(nc, c):
    assert clustered_complexity(nc) == c


def test_clustered_complexity_rejects_zero():
    with pytest.raises(ValueError):
        clustered_complexity(0)
