"""Chromatic-dispersion compensation taps and their angular statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

C_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class ChannelSpec:
    """Physical and sampling parameters of an optical link.

    Units follow the usual datasheet conventions; SI conversion happens in
    the derived properties.
    """

    dispersion_ps_nm_km: float = 16.8
    wavelength_nm: float = 1550.0
    baud_rate_hz: float = 32e9
    samples_per_symbol: int = 2
    span_length_km: float = 80.0
    span_count: int = 1
    nonlinearity_w_km: float = 1.2
    attenuation_db_km: float = 0.21
    amp_noise_figure_db: float = 4.5

    def __post_init__(self):
        if self.dispersion_ps_nm_km == 0:
            raise ValueError("dispersion must be nonzero")
        if not self.baud_rate_hz > 0:
            raise ValueError("baud_rate_hz must be positive")
        if int(self.samples_per_symbol) != self.samples_per_symbol or self.samples_per_symbol < 1:
            raise ValueError("samples_per_symbol must be a positive integer")
        if int(self.span_count) != self.span_count or self.span_count < 1:
            raise ValueError("span_count must be a positive integer")
        if self.span_length_km < 0:
            raise ValueError("span_length_km must be nonnegative")

    @property
    def sampling_period_s(self) -> float:
        return 1.0 / (self.baud_rate_hz * self.samples_per_symbol)

    @property
    def sample_rate_hz(self) -> float:
        return self.baud_rate_hz * self.samples_per_symbol

    @property
    def total_length_m(self) -> float:
        return self.span_length_km * 1e3 * self.span_count

    @property
    def dispersion_si(self) -> float:
        """D in s/m^2."""
        return self.dispersion_ps_nm_km * 1e-6

    @property
    def wavelength_m(self) -> float:
        return self.wavelength_nm * 1e-9

    def with_spans(self, span_count: int) -> "ChannelSpec":
        return replace(self, span_count=span_count)


@dataclass
class TapSet:
    """Odd-length complex FIR filter; ``taps[center_index]`` is the m = 0 tap."""

    taps: np.ndarray
    center_index: int = field(default=-1)

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=complex).ravel()
        if self.taps.size % 2 != 1:
            raise ValueError(f"tap count must be odd, got {self.taps.size}")
        if self.center_index < 0:
            self.center_index = self.taps.size // 2

    def __len__(self):
        return self.taps.size

    @property
    def m(self) -> int:
        return self.taps.size


def _dispersion_argument(spec: ChannelSpec) -> float:
    """|D| lambda^2 z / (c T^2), the dimensionless dispersion strength."""
    T = spec.sampling_period_s
    return abs(spec.dispersion_si) * spec.wavelength_m**2 * spec.total_length_m / (C_LIGHT * T**2)


def max_taps(spec: ChannelSpec) -> int:
    """Largest useful CD filter length before aliasing sets in."""
    return 2 * math.floor(_dispersion_argument(spec) / 2) + 1


def generate_taps(spec: ChannelSpec, M: int | None = None) -> TapSet:
    """Truncated CD compensation filter with ``M`` taps centred on m = 0.

    Parameters
    ----------
    spec : ChannelSpec
        Link whose accumulated dispersion is compensated.
    M : int, optional
        Odd filter length, at most :func:`max_taps`. Defaults to the maximum.

    Returns
    -------
    TapSet
        ``taps[k] = sqrt(j c T^2 / (D lambda^2 z)) exp(-j pi c T^2 m^2 / (D lambda^2 z))``
        with ``m = k - M // 2``.
    """
    n_max = max_taps(spec)
    if M is None:
        M = n_max
    if int(M) != M or M < 1 or M % 2 == 0:
        raise ValueError(f"M must be a positive odd integer, got {M}")
    if M > n_max:
        raise ValueError(f"M={M} exceeds the maximum tap count {n_max}")
    M = int(M)
    T = spec.sampling_period_s
    a = C_LIGHT * T**2 / (spec.dispersion_si * spec.wavelength_m**2 * spec.total_length_m)
    m = np.arange(M) - M // 2
    amp = np.sqrt(1j * a)
    taps = amp * np.exp(-1j * np.pi * a * (m * m).astype(float))
    return TapSet(taps, M // 2)


def tap_phases(taps) -> np.ndarray:
    """Phase of every tap mapped into [0, 2 pi)."""
    g = taps.taps if isinstance(taps, TapSet) else np.asarray(taps, dtype=complex)
    ph = np.arctan2(g.imag, g.real)
    ph = np.where(ph < 0, ph + 2 * np.pi, ph)
    # arctan2 of values just below zero can land exactly on 2 pi after the shift
    return np.where(ph >= 2 * np.pi, 0.0, ph)


def angle_histogram(taps, bin_count: int = 30) -> np.ndarray:
    """Count taps per angular bin of width 2 pi / bin_count.

    Bins are half-open, ``[b, b + 1) * 2 pi / bin_count``.
    """
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    ph = tap_phases(taps)
    idx = np.floor(ph / (2 * np.pi / bin_count)).astype(int)
    idx = np.clip(idx, 0, bin_count - 1)
    return np.bincount(idx, minlength=bin_count)


def uniformity_rho(taps, bin_count: int = 30) -> float:
    """(most populated - least populated bin) / mean taps per bin."""
    counts = angle_histogram(taps, bin_count)
    total = counts.sum()
    if total == 0:
        raise ValueError("empty tap set")
    mu = total / bin_count
    return float((counts.max() - counts.min()) / mu)
