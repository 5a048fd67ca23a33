import math

import numpy as np
import pytest

from tdce.taps import (
    C_LIGHT,
    ChannelSpec,
    TapSet,
    angle_histogram,
    generate_taps,
    max_taps,
    tap_phases,
    uniformity_rho,
)


@pytest.mark.parametrize("spans,expected", [(1, 45), (2, 89), (4, 177), (8, 353)])
def test_max_taps_design_table(spans, expected):
    assert max_taps(ChannelSpec().with_spans(spans)) == expected


def test_max_taps_by_hand():
    spec = ChannelSpec()
    T = 1 / 64e9
    arg = 16.8e-6 * (1550e-9) ** 2 * 80e3 / (C_LIGHT * T**2)
    assert max_taps(spec) == 2 * math.floor(arg / 2) + 1


def test_max_taps_zero_length_is_one():
    assert max_taps(ChannelSpec(span_length_km=0.0)) == 1


def test_taps_follow_closed_form():
    spec = ChannelSpec()
    ts = generate_taps(spec, 31)
    T = spec.sampling_period_s
    a = C_LIGHT * T**2 / (16.8e-6 * (1550e-9) ** 2 * 80e3)
    m = np.arange(-15, 16)
    ref = np.sqrt(1j * a) * np.exp(-1j * np.pi * a * m**2)
    np.testing.assert_allclose(ts.taps, ref, rtol=1e-13)
    assert ts.center_index == 15


def test_taps_lie_on_a_circle_and_are_symmetric():
    g = generate_taps(ChannelSpec().with_spans(4)).taps
    np.testing.assert_allclose(np.abs(g), np.abs(g[0]), rtol=1e-12)
    np.testing.assert_allclose(g, g[::-1], rtol=1e-12)


def test_single_tap():
    ts = generate_taps(ChannelSpec(), 1)
    assert ts.m == 1


@pytest.mark.parametrize("bad", [0, 2, 44, 47, -1])
def test_bad_lengths_rejected(bad):
    with pytest.raises(ValueError):
        generate_taps(ChannelSpec(), bad)


def test_tapset_needs_odd_length():
    with pytest.raises(ValueError):
        TapSet(np.ones(4))


def test_spec_validation():
    with pytest.raises(ValueError):
        ChannelSpec(dispersion_ps_nm_km=0)
    with pytest.raises(ValueError):
        ChannelSpec(span_count=0)
    with pytest.raises(ValueError):
        ChannelSpec(samples_per_symbol=1.5)


def test_phases_in_range():
    ph = tap_phases(np.array([1, 1j, -1, -1j, complex(1, -1e-18)]))
    assert np.all((ph >= 0) & (ph < 2 * np.pi))
    np.testing.assert_allclose(ph[:4], [0, np.pi / 2, np.pi, 3 * np.pi / 2])


def test_histogram_sums_to_tap_count():
    g = generate_taps(ChannelSpec().with_spans(3))
    assert angle_histogram(g).sum() == g.m
    assert angle_histogram(g, 7).size == 7


def test_histogram_bins_are_half_open():
    # phase exactly on a bin edge falls into the upper bin
    edge = np.exp(1j * 2 * np.pi / 4)
    counts = angle_histogram(np.array([edge]), 4)
    assert counts.tolist() == [0, 1, 0, 0]


def test_rho_of_uniform_phases_is_zero():
    g = np.exp(1j * (np.arange(30) + 0.5) * 2 * np.pi / 30)
    assert uniformity_rho(g) == 0.0


def test_rho_of_single_bin():
    # all mass in one of 30 bins: (M - 0) / (M / 30) = 30
    assert uniformity_rho(np.ones(9, complex)) == pytest.approx(30.0)


def test_rho_values():
    assert uniformity_rho(generate_taps(ChannelSpec())) == pytest.approx(4.0)
    far = uniformity_rho(generate_taps(ChannelSpec().with_spans(100)))
    assert 0 <= far < 1
