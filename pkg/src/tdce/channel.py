"""Dual-polarization fiber link: 16-QAM transmitter, split-step Manakov
propagation with lumped amplification, and a simple receiver front end."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.fft import fft, fftfreq, ifft
from scipy.constants import h as PLANCK

from .modulation import generate_symbols, shape_and_upsample
from .signal import SignalBlock
from .taps import C_LIGHT, ChannelSpec

log = logging.getLogger(__name__)

MANAKOV_FACTOR = 8.0 / 9.0


@dataclass
class LinkRun:
    spec: ChannelSpec
    launch_power_dbm: float = 0.0
    symbol_count: int = 2**16
    seed: int = 0
    nonlinear: bool = False
    step_size_m: float | None = None
    pulse: tuple = ("rrc", 0.1)
    noise: bool = True

    def __post_init__(self):
        if self.symbol_count < 1:
            raise ValueError("symbol_count must be >= 1")
        span_m = self.spec.span_length_km * 1e3
        if self.step_size_m is not None:
            if self.step_size_m <= 0:
                raise ValueError("step_size_m must be positive")
            if span_m > 0 and self.step_size_m > span_m:
                raise ValueError(f"step size {self.step_size_m} m exceeds the span length {span_m} m")

    @property
    def steps_per_span(self) -> int:
        span_m = self.spec.span_length_km * 1e3
        if span_m == 0:
            return 0
        if self.step_size_m is None:
            return int(np.ceil(span_m / 100.0)) if self.nonlinear else 1
        return int(np.ceil(span_m / self.step_size_m))


def beta2(spec: ChannelSpec) -> float:
    """Group-velocity dispersion in s^2/m."""
    return -spec.dispersion_si * spec.wavelength_m**2 / (2 * np.pi * C_LIGHT)


def alpha_neper(spec: ChannelSpec) -> float:
    """Power attenuation in 1/m."""
    return spec.attenuation_db_km / (10 * np.log10(np.e)) / 1e3


def ase_variance(spec: ChannelSpec) -> float:
    """Complex ASE variance per polarization and sample added by one amplifier.

    Gain exactly offsets the span loss; ``n_sp = (G F - 1) / (2 (G - 1))``
    and the noise PSD ``(G - 1) n_sp h nu`` is integrated over the sampling
    bandwidth.
    """
    G = 10 ** (spec.attenuation_db_km * spec.span_length_km / 10)
    if G <= 1:
        return 0.0
    F = 10 ** (spec.amp_noise_figure_db / 10)
    nu = C_LIGHT / spec.wavelength_m
    nsp = (G * F - 1) / (2 * (G - 1))
    return (G - 1) * nsp * PLANCK * nu * spec.sample_rate_hz


def dispersion_operator(spec: ChannelSpec, n: int, length_m: float) -> np.ndarray:
    """Frequency-domain response of lossless CD over ``length_m`` meters."""
    omega = 2 * np.pi * spec.sample_rate_hz * fftfreq(n)
    return np.exp(1j * beta2(spec) / 2 * omega**2 * length_m)


def transmit(run: LinkRun) -> tuple[SignalBlock, dict]:
    """Shaped dual-pol 16-QAM waveform at the launch power, plus bits/symbols."""
    spec = run.spec
    data = generate_symbols(run.symbol_count, run.seed, dual_pol=True)
    tx = shape_and_upsample(data["symbols"], spec.samples_per_symbol, run.pulse, spec.baud_rate_hz)
    power_w = 1e-3 * 10 ** (run.launch_power_dbm / 10)
    mean_p = np.mean(np.abs(tx.samples) ** 2, axis=1, keepdims=True)
    tx.samples = tx.samples * np.sqrt(power_w / 2 / mean_p)
    tx.metadata.update(seed=run.seed, launch_power_dbm=run.launch_power_dbm, symbol_count=run.symbol_count)
    return tx, data


def propagate(tx: SignalBlock, run: LinkRun) -> SignalBlock:
    """Symmetric split-step propagation over every span, then amplification.

    Each step applies half the linear operator (dispersion and loss), the
    Manakov nonlinear phase ``8/9 gamma (|Ex|^2 + |Ey|^2) h_eff`` when
    enabled, and the other half. In linear mode a span is one step. After
    the span an amplifier restores the span loss and adds ASE noise.
    """
    spec = run.spec
    rng = np.random.default_rng(np.random.SeedSequence([run.seed, 0x5EED]))
    E = np.array(tx.samples, dtype=complex)
    n = E.shape[1]
    span_m = spec.span_length_km * 1e3
    steps = run.steps_per_span
    alpha = alpha_neper(spec)
    gamma = spec.nonlinearity_w_km / 1e3
    sigma2 = ase_variance(spec) if run.noise else 0.0
    if span_m > 0 and steps > 0:
        h = span_m / steps
        omega = 2 * np.pi * spec.sample_rate_hz * fftfreq(n)
        half = np.exp((-alpha / 2 + 1j * beta2(spec) / 2 * omega**2) * h / 2)
        # nonlinear phase integrates power over the step, referenced to its midpoint
        h_eff = 2 * np.sinh(alpha * h / 2) / alpha if alpha > 0 else h
        for span in range(spec.span_count):
            if run.nonlinear:
                Ef = fft(E, axis=1)
                for _ in range(steps):
                    E = ifft(Ef * half, axis=1)
                    power = np.sum(np.abs(E) ** 2, axis=0)
                    E = E * np.exp(1j * MANAKOV_FACTOR * gamma * power * h_eff)
                    Ef = fft(E, axis=1) * half
                E = ifft(Ef, axis=1)
            else:
                E = ifft(fft(E, axis=1) * half ** (2 * steps), axis=1)
            G = np.exp(alpha * span_m)
            if G > 1:
                E = E * np.sqrt(G)
                if sigma2 > 0:
                    noise = rng.normal(size=E.shape) + 1j * rng.normal(size=E.shape)
                    E = E + noise * np.sqrt(sigma2 / 2)
            log.debug("span %d done", span + 1)
    out = SignalBlock(E, spec.sample_rate_hz, "rx", dict(tx.metadata))
    out.metadata.update(spans=spec.span_count, nonlinear=run.nonlinear, noise=run.noise)
    return out


def receiver_frontend(rx: SignalBlock) -> SignalBlock:
    """Scale every polarization to unit mean power."""
    p = np.mean(np.abs(rx.samples) ** 2, axis=1, keepdims=True)
    return rx.derive(rx.samples / np.sqrt(p))


def simulate(run: LinkRun) -> dict:
    """Transmit, propagate and normalize one link run."""
    tx, data = transmit(run)
    rx = receiver_frontend(propagate(tx, run))
    return {"tx": tx, "rx": rx, "bits": data["bits"], "symbols": data["symbols"]}
