"""Dual-polarization sample container shared by the simulator and equalizers."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

ROLES = ("tx", "rx", "equalized")


@dataclass
class SignalBlock:
    """Complex samples of shape ``(polarizations, n)``."""

    samples: np.ndarray
    sample_rate_hz: float = 64e9
    role: str = "rx"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.dtype != object:
            s = s.astype(complex, copy=False)
        if s.ndim == 1:
            s = s[None, :]
        if s.ndim != 2 or s.shape[0] not in (1, 2):
            raise ValueError(f"samples must be (1|2, n), got shape {s.shape}")
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        self.samples = s

    @property
    def polarizations(self) -> int:
        return self.samples.shape[0]

    def __len__(self):
        return self.samples.shape[1]

    def derive(self, samples, role: str | None = None, **meta) -> "SignalBlock":
        md = dict(self.metadata)
        md.update(meta)
        return replace(self, samples=samples, role=role or self.role, metadata=md)


def as_block(x, sample_rate_hz: float = 64e9, role: str = "rx") -> tuple[SignalBlock, bool]:
    """Wrap raw arrays; the flag says whether the caller passed a SignalBlock."""
    if isinstance(x, SignalBlock):
        return x, True
    return SignalBlock(x, sample_rate_hz, role), False


def unwrap(block: SignalBlock, was_block: bool, like):
    if was_block:
        return block
    out = block.samples
    return out[0] if np.ndim(like) == 1 else out
