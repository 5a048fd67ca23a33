import numpy as np
import pytest

from tdce.modulation import (
    constellation,
    count_bit_errors,
    demap_symbols,
    generate_symbols,
    map_bits,
    pulse_taps,
    rrc_taps,
    shape_and_upsample,
)


def test_constellation_unit_power_and_gray():
    pts, labels = constellation()
    assert np.mean(np.abs(pts) ** 2) == pytest.approx(1.0)
    # nearest neighbours differ in exactly one bit
    for a in range(16):
        d = np.abs(pts - pts[a])
        d[a] = np.inf
        for b in np.flatnonzero(np.isclose(d, d.min())):
            assert np.sum(labels[a] != labels[b]) == 1


def test_axis_levels():
    np.testing.assert_allclose(map_bits([0, 0, 1, 0]) * np.sqrt(10), [-3 + 3j])
    np.testing.assert_allclose(map_bits([0, 1, 1, 1]) * np.sqrt(10), [-1 + 1j])


def test_map_demap_round_trip():
    bits = np.random.default_rng(0).integers(0, 2, 4000)
    np.testing.assert_array_equal(demap_symbols(map_bits(bits)), bits)


def test_demap_with_noise_saturates_outer_levels():
    assert demap_symbols([5 + 5j]).tolist() == [1, 0, 1, 0]


def test_generate_symbols_shapes_and_seed():
    a = generate_symbols(100, seed=1)
    b = generate_symbols(100, seed=1)
    assert a["bits"].shape == (2, 400) and a["symbols"].shape == (2, 100)
    np.testing.assert_array_equal(a["bits"], b["bits"])
    assert generate_symbols(10, dual_pol=False)["symbols"].shape == (1, 10)
    with pytest.raises(ValueError):
        generate_symbols(0)


def test_rrc_unit_energy_symmetric_and_nyquist():
    h = rrc_taps(2, 0.1, 64)
    assert np.sum(h**2) == pytest.approx(1.0)
    np.testing.assert_allclose(h, h[::-1])
    # RRC * RRC is a raised cosine with zeros at nonzero symbol instants
    rc = np.convolve(h, h)
    c = rc.size // 2
    assert np.max(np.abs(rc[c + 2 :: 2][:20])) < 0.01 * rc[c]


def test_pulse_resolution():
    assert pulse_taps("rect", 2).tolist() == [1, 1]
    assert pulse_taps(("rrc", 0.2), 2).size == 257
    with pytest.raises(ValueError):
        pulse_taps("gauss", 2)


def test_shape_rect_offsets():
    blk = shape_and_upsample(np.array([[1, -1j]]), 2, "rect")
    np.testing.assert_array_equal(blk.samples[0], [1, 1, -1j, -1j])
    assert blk.metadata == {"sps": 2, "symbol_offset": 0}


def test_shape_rrc_length_and_offset():
    blk = shape_and_upsample(np.ones((2, 10)), 2)
    assert len(blk) == 9 * 2 + 257
    assert blk.metadata["symbol_offset"] == 128
    assert blk.sample_rate_hz == 64e9


def test_count_bit_errors():
    bits = np.array([0, 0, 1, 0, 1, 1, 1, 1])
    sym = map_bits(bits)
    assert count_bit_errors(bits, sym) == (0, 8)
    sym[0] = -sym[0]
    assert count_bit_errors(bits, sym)[0] == 2
    with pytest.raises(ValueError):
        count_bit_errors(bits[:4], sym)


def test_impulse_gives_pulse():
    blk = shape_and_upsample(np.array([[1.0]]), 2)
    np.testing.assert_allclose(blk.samples[0].real, rrc_taps(2))


def test_back_to_back_isi_free():
    d = generate_symbols(2000, seed=9, dual_pol=False)
    tx = shape_and_upsample(d["symbols"], 2)
    h = rrc_taps(2)
    z = np.convolve(tx.samples[0], h)
    c = 2 * tx.metadata["symbol_offset"]
    est = z[c : c + 2 * 2000 : 2]
    # only the truncation of the 128-symbol filter is left
    assert np.max(np.abs(est[200:-200] - d["symbols"][0, 200:-200])) < 1e-3
