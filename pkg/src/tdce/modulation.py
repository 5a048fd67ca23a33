"""Gray-coded 16-QAM mapping, pulse shaping and hard-decision BER."""
from __future__ import annotations

import numpy as np

from .signal import SignalBlock

BITS_PER_SYMBOL = 4
_NORM = np.sqrt(10.0)


def constellation() -> tuple[np.ndarray, np.ndarray]:
    """All 16 points (unit mean power) and their 4-bit labels, row = point."""
    labels = np.array([[(v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1] for v in range(16)], dtype=np.int8)
    return map_bits(labels.ravel()), labels


def map_bits(bits) -> np.ndarray:
    """Map groups of 4 bits (b0 b1 -> I, b2 b3 -> Q) onto 16-QAM points."""
    b = np.asarray(bits, dtype=np.int64).reshape(-1, BITS_PER_SYMBOL)
    # Gray code per axis: 00 -> -3, 01 -> -1, 11 -> 1, 10 -> 3
    lut = np.array([-3, -1, 3, 1])
    i = lut[2 * b[:, 0] + b[:, 1]]
    q = lut[2 * b[:, 2] + b[:, 3]]
    return (i + 1j * q) / _NORM


def demap_symbols(symbols) -> np.ndarray:
    """Nearest-point hard decisions back to bits."""
    s = np.asarray(symbols, dtype=complex).ravel() * _NORM

    def axis_bits(v):
        level = np.clip(2 * np.round((v - 1) / 2) + 1, -3, 3).astype(int)
        first = (level > 0).astype(np.int8)
        second = (np.abs(level) == 1).astype(np.int8)
        return first, second

    b0, b1 = axis_bits(s.real)
    b2, b3 = axis_bits(s.imag)
    return np.stack([b0, b1, b2, b3], axis=1).ravel()


def generate_symbols(count: int, seed: int = 0, dual_pol: bool = True) -> dict:
    """Random bits and their 16-QAM symbols, shape ``(pols, count)``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    pols = 2 if dual_pol else 1
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(pols, count * BITS_PER_SYMBOL), dtype=np.int8)
    symbols = np.stack([map_bits(b) for b in bits])
    return {"bits": bits, "symbols": symbols}


def rrc_taps(sps: int, rolloff: float = 0.1, span: int = 128) -> np.ndarray:
    """Root-raised-cosine impulse response over ``span`` symbols, unit energy."""
    n = np.arange(-span * sps // 2, span * sps // 2 + 1)
    t = n / sps
    b = rolloff
    h = np.empty(t.size)
    for k, tk in enumerate(t):
        if tk == 0:
            h[k] = 1 + b * (4 / np.pi - 1)
        elif b > 0 and np.isclose(abs(tk), 1 / (4 * b)):
            h[k] = b / np.sqrt(2) * ((1 + 2 / np.pi) * np.sin(np.pi / (4 * b)) + (1 - 2 / np.pi) * np.cos(np.pi / (4 * b)))
        else:
            h[k] = (np.sin(np.pi * tk * (1 - b)) + 4 * b * tk * np.cos(np.pi * tk * (1 + b))) / (
                np.pi * tk * (1 - (4 * b * tk) ** 2)
            )
    return h / np.sqrt(np.sum(h**2))


def pulse_taps(pulse, sps: int) -> np.ndarray:
    """Resolve ``"rect"``, ``"rrc"``, ``("rrc", rolloff)`` or explicit taps."""
    if isinstance(pulse, str):
        pulse = (pulse,)
    if isinstance(pulse, tuple):
        kind = pulse[0]
        if kind == "rect":
            return np.ones(sps)
        if kind == "rrc":
            return rrc_taps(sps, *pulse[1:])
        raise ValueError(f"unknown pulse {kind!r}")
    return np.asarray(pulse, dtype=float)


def shape_and_upsample(symbols, sps: int = 2, pulse=("rrc", 0.1), baud_rate_hz: float = 32e9) -> SignalBlock:
    """Upsample by ``sps`` and filter with the transmit pulse.

    Output length is ``(n - 1) * sps + len(pulse)``; the sampling instant of
    symbol ``k`` sits at ``offset + k * sps`` where ``offset`` is the pulse
    delay stored in ``metadata["symbol_offset"]`` (0 for rectangular pulses).
    """
    if sps < 1:
        raise ValueError("sps must be >= 1")
    s = np.atleast_2d(np.asarray(symbols, dtype=complex))
    p = pulse_taps(pulse, sps)
    n = s.shape[1]
    up = np.zeros((s.shape[0], n * sps), dtype=complex)
    up[:, ::sps] = s
    length = (n - 1) * sps + p.size
    out = np.stack([np.convolve(u, p)[:length] for u in up])
    is_rect = isinstance(pulse, (str, tuple)) and (pulse if isinstance(pulse, str) else pulse[0]) == "rect"
    offset = 0 if is_rect else (p.size - 1) // 2
    return SignalBlock(out, baud_rate_hz * sps, "tx", {"sps": sps, "symbol_offset": offset})


def count_bit_errors(sent_bits, symbols) -> tuple[int, int]:
    got = demap_symbols(symbols)
    sent = np.asarray(sent_bits).ravel()
    if got.size != sent.size:
        raise ValueError("bit count mismatch")
    return int(np.sum(got != sent)), int(sent.size)
