"""Frequency-domain equalizer baseline.

Radix-2 FFT, overlap-save block filtering and the FDE multiplication count
used to pick the FFT size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .fixedpoint import FDE_FORMAT, FixedFormat, quantize_complex_block
from .signal import as_block, unwrap
from .taps import TapSet

RADIX_BETA = {"radix2": 0.5, "radix4": 3.0 / 8.0}


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _is_pow4(n: int) -> bool:
    return _is_pow2(n) and (n.bit_length() - 1) % 2 == 0


@lru_cache(maxsize=64)
def _bitrev(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@lru_cache(maxsize=64)
def _twiddles(n: int) -> np.ndarray:
    return np.exp(-2j * np.pi * np.arange(n // 2) / n)


def fft(x, inverse: bool = False) -> np.ndarray:
    """Iterative decimation-in-time radix-2 FFT along the last axis.

    The inverse transform carries the 1/N factor.
    """
    a = np.asarray(x, dtype=complex)
    n = a.shape[-1]
    if not _is_pow2(n):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    a = a[..., _bitrev(n)].copy()
    tw_full = _twiddles(n)
    if inverse:
        tw_full = tw_full.conj()
    lead = a.shape[:-1]
    half = 1
    while half < n:
        span = 2 * half
        tw = tw_full[:: n // span][:half]
        a = a.reshape(*lead, n // span, span)
        top = a[..., :half]
        bot = a[..., half:] * tw
        a = np.concatenate([top + bot, top - bot], axis=-1)
        half = span
    a = a.reshape(*lead, n)
    if inverse:
        a = a / n
    return a


def ifft(x) -> np.ndarray:
    return fft(x, inverse=True)


@dataclass
class FdeConfig:
    fft_size: int
    filter: TapSet
    radix: str = "radix2"
    fmt: FixedFormat | None = None
    _h: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not isinstance(self.filter, TapSet):
            self.filter = TapSet(self.filter)
        if self.radix not in RADIX_BETA:
            raise ValueError(f"unknown radix {self.radix!r}")
        if not _is_pow2(self.fft_size):
            raise ValueError(f"fft_size must be a power of two, got {self.fft_size}")
        if self.radix == "radix4" and not _is_pow4(self.fft_size):
            raise ValueError(f"radix4 needs a power of four, got {self.fft_size}")
        if self.fft_size <= self.filter.m:
            raise ValueError(f"fft_size {self.fft_size} must exceed the filter length {self.filter.m}")

    def transfer_function(self) -> np.ndarray:
        """FFT of the zero-padded taps, computed once per config."""
        if self._h is None:
            g = self.filter.taps
            if self.fmt is not None:
                g = quantize_complex_block(g, self.fmt)
            padded = np.zeros(self.fft_size, dtype=complex)
            padded[: g.size] = g
            self._h = fft(padded)
        return self._h


def overlap_save_equalize(x, cfg: FdeConfig):
    """Overlap-save filtering matching :func:`tdce.engine.direct_convolve`.

    Each block of ``N_FFT`` inputs overlaps the previous one by ``M - 1``
    samples; after IFFT the first ``M - 1`` outputs are circularly corrupted
    and dropped, leaving ``N_FFT - M + 1`` valid outputs per block.
    """
    block, was_block = as_block(x)
    samples = block.samples
    if cfg.fmt is not None:
        samples = np.stack([quantize_complex_block(p, cfg.fmt) for p in samples])
    n_fft, M = cfg.fft_size, cfg.filter.m
    n = samples.shape[1]
    if n < n_fft:
        raise ValueError(f"input of {n} samples is shorter than the FFT size {n_fft}")
    n_out = n - M + 1
    step = n_fft - M + 1
    n_blocks = math.ceil(n_out / step)
    H = cfg.transfer_function()
    # pad the tail so every block is full; padded outputs are discarded
    need = (n_blocks - 1) * step + n_fft
    padded = np.zeros((samples.shape[0], need), dtype=complex)
    padded[:, :n] = samples
    starts = np.arange(n_blocks) * step
    idx = starts[:, None] + np.arange(n_fft)[None, :]
    out = np.empty((samples.shape[0], n_out), dtype=complex)
    for p in range(samples.shape[0]):
        blocks = padded[p][idx]
        y = ifft(fft(blocks) * H)
        out[p] = y[:, M - 1 :].reshape(-1)[:n_out]
    res = block.derive(out, role="equalized", equalizer="fde", fft_size=n_fft, taps=M)
    return unwrap(res, was_block, x)


def fde_complexity(n_fft: int, m: int, radix: str = "radix2") -> float:
    """Real multiplications per recovered sample of an overlap-save FDE."""
    if radix not in RADIX_BETA:
        raise ValueError(f"unknown radix {radix!r}")
    if not _is_pow2(n_fft) or (radix == "radix4" and not _is_pow4(n_fft)):
        raise ValueError(f"{n_fft} is not a valid {radix} FFT size")
    if not 1 <= m < n_fft:
        raise ValueError(f"need 1 <= m < n_fft, got m={m}, n_fft={n_fft}")
    beta = RADIX_BETA[radix]
    return n_fft * (8 * beta * math.log2(n_fft) + 4) / (n_fft - m + 1)


def valid_fft_sizes(radix: str, min_size: int = 2**2, max_size: int = 2**16) -> list[int]:
    sizes = []
    n = 1
    while n <= max_size:
        if n >= min_size and (radix != "radix4" or _is_pow4(n)):
            sizes.append(n)
        n *= 2
    return sizes


def optimal_fft_size(m: int, radix: str = "radix2", search_range=(2**2, 2**16)) -> int:
    """FFT size minimizing :func:`fde_complexity`; ties go to the smaller size.

    ``search_range`` is either ``(min, max)`` bounds or an explicit iterable
    of sizes.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if isinstance(search_range, tuple) and len(search_range) == 2:
        sizes = valid_fft_sizes(radix, *search_range)
    else:
        sizes = sorted(search_range)
    cands = [n for n in sizes if n > m and _is_pow2(n) and (radix != "radix4" or _is_pow4(n))]
    if not cands:
        raise ValueError(f"no valid {radix} FFT size larger than m={m} in range")
    best = cands[0]
    best_c = fde_complexity(best, m, radix)
    for n in cands[1:]:
        c = fde_complexity(n, m, radix)
        if c < best_c:
            best, best_c = n, c
    return best
