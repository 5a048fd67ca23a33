"""Symbol recovery and BER for equalized waveforms.

An equalizer with ``M`` taps in valid mode returns ``y[n]`` aligned with
input sample ``n + (M - 1) // 2``; :func:`evaluate_ber` undoes that delay,
applies the receive matched filter, samples at the symbol instants and
counts hard-decision bit errors, ignoring ``guard`` symbols at each end.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modulation import BITS_PER_SYMBOL, demap_symbols, pulse_taps
from .signal import SignalBlock

PRE_FEC_THRESHOLD = 3.8e-3


@dataclass
class BerResult:
    ber: float
    errors: int
    bits: int
    symbols: np.ndarray
    symbol_index: np.ndarray

    def __float__(self):
        return self.ber


def recover_symbols(y, delay: int, symbol_offset: int, sps: int, pulse=("rrc", 0.1), n_symbols: int | None = None):
    """Matched-filter and decimate an equalized waveform.

    Parameters
    ----------
    y : array_like, shape (pols, n)
        Equalized samples; ``y[:, n]`` lines up with transmitted sample
        ``n + delay``.
    delay : int
        Equalizer group delay in samples, ``(M - 1) // 2``.
    symbol_offset : int
        Transmit-side index of symbol 0's sampling instant.

    Returns
    -------
    symbols, index
        Unit-power symbol estimates and the transmit symbol index of each.
    """
    y = np.atleast_2d(np.asarray(y, dtype=complex))
    p = pulse_taps(pulse, sps)
    rect = p.size == sps and np.all(p == 1)
    if rect:
        z = y
        base = symbol_offset - delay
    else:
        z = np.stack([np.convolve(row, p) for row in y])
        base = symbol_offset - delay + (p.size - 1) // 2
    # first symbol whose sampling instant lands inside z
    k0 = max(0, -(base // sps) if base < 0 else 0)
    while base + k0 * sps < 0:
        k0 += 1
    k1 = (z.shape[1] - 1 - base) // sps
    if n_symbols is not None:
        k1 = min(k1, n_symbols - 1)
    k = np.arange(k0, k1 + 1)
    est = z[:, base + k * sps]
    # remove the overall gain; carrier recovery is out of scope so only power is fixed
    est = est / np.sqrt(np.mean(np.abs(est) ** 2, axis=1, keepdims=True))
    return est, k


def evaluate_ber(y, bits, delay: int, symbol_offset: int, sps: int = 2, pulse=("rrc", 0.1), guard: int = 128) -> BerResult:
    """Bit error ratio of an equalized dual-pol waveform against sent bits."""
    if isinstance(y, SignalBlock):
        y = y.samples
    bits = np.atleast_2d(np.asarray(bits))
    n_sym = bits.shape[1] // BITS_PER_SYMBOL
    est, k = recover_symbols(y, delay, symbol_offset, sps, pulse, n_sym)
    # drop symbols near either end of the signal and of the recovered stretch
    keep = (k >= guard) & (k < n_sym - guard) & (k >= k[0] + guard) & (k <= k[-1] - guard)
    if not np.any(keep):
        raise ValueError("no symbols left after discarding the guard intervals")
    est, k = est[:, keep], k[keep]
    errors = 0
    total = 0
    for p in range(est.shape[0]):
        got = demap_symbols(est[p])
        ref = bits[p].reshape(-1, BITS_PER_SYMBOL)[k].ravel()
        errors += int(np.sum(got != ref))
        total += ref.size
    return BerResult(errors / total, errors, total, est, k)
