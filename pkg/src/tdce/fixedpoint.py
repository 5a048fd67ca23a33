"""Two's-complement fixed-point quantization.

Values are kept as float64 holding the exact number the fixed-point word
represents; with at most 52 fraction bits this is lossless.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FixedFormat:
    """Signed fixed-point format; ``integer_bits`` includes the sign bit."""

    total_bits: int = 16
    integer_bits: int = 5

    def __post_init__(self):
        if not 1 <= self.integer_bits <= self.total_bits <= 64:
            raise ValueError(
                f"need 1 <= integer_bits <= total_bits <= 64, got Q{self.integer_bits}.{self.fraction_bits}"
            )

    @property
    def fraction_bits(self) -> int:
        return self.total_bits - self.integer_bits

    @property
    def lsb(self) -> float:
        return 2.0 ** (-self.fraction_bits)

    @property
    def min_value(self) -> float:
        return -(2.0 ** (self.integer_bits - 1))

    @property
    def max_value(self) -> float:
        return 2.0 ** (self.integer_bits - 1) - self.lsb

    @classmethod
    def parse(cls, text: str) -> "FixedFormat":
        """Build a format from ``"Q<int>.<frac>"``, e.g. ``"Q5.11"``."""
        m = re.fullmatch(r"\s*[Qq](\d+)\.(\d+)\s*", text)
        if m is None:
            raise ValueError(f"bad fixed-point format {text!r}, expected Q<int>.<frac>")
        i, f = int(m.group(1)), int(m.group(2))
        return cls(total_bits=i + f, integer_bits=i)

    def __str__(self):
        return f"Q{self.integer_bits}.{self.fraction_bits}"


TDCE_FORMAT = FixedFormat(16, 5)
FDE_FORMAT = FixedFormat(16, 1)


def _quantize_real(x: np.ndarray, fmt: FixedFormat) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot quantize non-finite values")
    scale = 2.0**fmt.fraction_bits
    # np.rint rounds half to even
    q = np.rint(x * scale) / scale
    return np.clip(q, fmt.min_value, fmt.max_value)


def quantize(value, fmt: FixedFormat):
    """Round to nearest (ties to even) on the format grid, then saturate."""
    arr = np.asarray(value, dtype=float)
    out = _quantize_real(arr, fmt)
    return float(out) if out.ndim == 0 else out


def quantize_complex_block(values, fmt: FixedFormat) -> np.ndarray:
    """Quantize real and imaginary parts independently."""
    v = np.asarray(values, dtype=complex)
    if v.size == 0:
        return v.copy()
    return _quantize_real(v.real, fmt) + 1j * _quantize_real(v.imag, fmt)
