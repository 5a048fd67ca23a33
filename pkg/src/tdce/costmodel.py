"""Analytical hardware cost and throughput of the TDCE and FDE designs.

Two multiplication conventions coexist on purpose. Algorithmic complexity
counts 4 real multiplications per complex product; the DSP budget of the
hardware counts 2 multipliers per complex multiplier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .fde import fde_complexity

COMPLEXITY_REAL_PER_COMPLEX = 4
HW_MULTIPLIERS_PER_COMPLEX = 2
DEFAULT_CLOCK_HZ = 250e6
# 16-QAM at 2 samples/symbol: 4 bits per symbol spread over 2 samples
DEFAULT_BITS_PER_SAMPLE = 2.0
# dataflow overhead implied by 107 -> 110 cycles for M=97, N_C=10
DEFAULT_ALPHA = 1.03
MATCH_TOLERANCE = 0.07
# FDE dataflow constant with latency = N_FFT; fits the measured FDE
# throughputs of all four design points to within 5 %. No single TDCE alpha
# does the same, so TDCE overhead is calibrated per design.
FDE_DELTA_FIT = 5.78


class InfeasibleError(ValueError):
    """No parameter choice satisfies the requested constraint."""


@dataclass(frozen=True)
class TdceHwConfig:
    m: int
    n_c: int
    lanes: int | None = None
    lp: int | None = None
    alpha: float = DEFAULT_ALPHA
    clock_hz: float = DEFAULT_CLOCK_HZ
    bits_per_sample: float = DEFAULT_BITS_PER_SAMPLE

    def __post_init__(self):
        if self.lanes is None:
            object.__setattr__(self, "lanes", self.lp or 1)
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.n_c < 1:
            raise ValueError("n_c must be >= 1")
        if self.n_c > self.m:
            raise ValueError("n_c cannot exceed m")
        if self.lanes < 1:
            raise ValueError("lanes must be >= 1")
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")
        if self.lp is not None and (self.lp < 1 or self.lanes % self.lp):
            raise ValueError(f"lanes={self.lanes} must be a multiple of lp={self.lp}")


@dataclass(frozen=True)
class FdeHwConfig:
    n_fft: int
    m: int
    delta: float = 1.0
    latency_cycles: float | None = None
    clock_hz: float = DEFAULT_CLOCK_HZ
    bits_per_sample: float = DEFAULT_BITS_PER_SAMPLE
    radix: str = "radix4"

    def __post_init__(self):
        if self.n_fft <= self.m:
            raise ValueError("n_fft must exceed m")
        if self.delta < 1:
            raise ValueError("delta must be >= 1")

    @property
    def latency(self) -> float:
        return float(self.n_fft if self.latency_cycles is None else self.latency_cycles)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def tdce_cycles_per_block(m: int, n_c: int, alpha: float) -> int:
    """Summation (about M cycles) plus bank transfer (about N_C), times overhead."""
    return _round_half_up(alpha * (m + n_c))


def tdce_throughput(cfg: TdceHwConfig) -> dict:
    per_cycle = cfg.lanes / (cfg.alpha * cfg.m)
    sps = per_cycle * cfg.clock_hz
    return {"samples_per_cycle": per_cycle, "samples_per_s": sps, "mbps": sps * cfg.bits_per_sample / 1e6}


def minimal_lp(lanes: int, n_c: int, cycles: int) -> int:
    """Smallest divisor of ``lanes`` whose multiply schedule fits in ``cycles``."""
    for lp in range(1, lanes + 1):
        if lanes % lp == 0 and math.ceil(lanes * n_c / lp) <= cycles:
            return lp
    return lanes


def tdce_cost(cfg: TdceHwConfig) -> dict:
    """Cycle, multiplier, memory and throughput figures of one TDCE design.

    ``lp`` is derived when the config leaves it open. A given ``lp`` that is
    too small to finish ``L * N_C`` products inside the block is reported as
    infeasible together with the minimal workable value.
    """
    cycles = tdce_cycles_per_block(cfg.m, cfg.n_c, cfg.alpha)
    mults = cfg.lanes * cfg.n_c
    lp_min = minimal_lp(cfg.lanes, cfg.n_c, cycles)
    lp = lp_min if cfg.lp is None else cfg.lp
    feasible = math.ceil(mults / lp) <= cycles
    tp = tdce_throughput(cfg)
    return {
        "m": cfg.m,
        "n_c": cfg.n_c,
        "lanes": cfg.lanes,
        "lp": lp,
        "lp_min": lp_min,
        "feasible": feasible,
        "cycles_per_block": cycles,
        "complex_mults_per_block": mults,
        "complex_multipliers": lp,
        "real_multipliers": HW_MULTIPLIERS_PER_COMPLEX * lp,
        "real_mults_per_sample": COMPLEXITY_REAL_PER_COMPLEX * cfg.n_c,
        "presum_memory_positions": 2 * cfg.n_c,
        "throughput_samples_per_cycle": tp["samples_per_cycle"],
        "throughput_samples_per_s": tp["samples_per_s"],
        "throughput_mbps": tp["mbps"],
    }


def fde_cost(cfg: FdeHwConfig) -> dict:
    per_cycle = (cfg.n_fft - cfg.m + 1) / (cfg.delta * cfg.latency)
    sps = per_cycle * cfg.clock_hz
    return {
        "n_fft": cfg.n_fft,
        "m": cfg.m,
        "throughput_samples_per_cycle": per_cycle,
        "throughput_samples_per_s": sps,
        "throughput_mbps": sps * cfg.bits_per_sample / 1e6,
        "c_fft": fde_complexity(cfg.n_fft, cfg.m, cfg.radix),
    }


def calibrate_alpha(lanes: int, m: int, mbps: float, clock_hz: float = DEFAULT_CLOCK_HZ,
                    bits_per_sample: float = DEFAULT_BITS_PER_SAMPLE) -> float:
    """Invert the TDCE throughput model for the overhead constant."""
    return lanes * clock_hz * bits_per_sample / (m * mbps * 1e6)


def calibrate_fde_latency(n_fft: int, m: int, mbps: float, clock_hz: float = DEFAULT_CLOCK_HZ,
                          bits_per_sample: float = DEFAULT_BITS_PER_SAMPLE) -> float:
    """Product delta * latency reproducing a measured FDE throughput."""
    return (n_fft - m + 1) * clock_hz * bits_per_sample / (mbps * 1e6)


def match_throughput(cfg: TdceHwConfig, target_mbps: float, max_lanes: int = 4096,
                     tolerance: float = MATCH_TOLERANCE) -> TdceHwConfig:
    """Smallest lane count whose throughput lands within ``tolerance`` of the target.

    Lane counts step in multiples of ``cfg.lp`` (1 when unset). A target
    below what the minimum lane count delivers returns that minimum.
    """
    if not target_mbps > 0:
        raise ValueError("target throughput must be positive")
    step = cfg.lp or 1
    lo, hi = target_mbps * (1 - tolerance), target_mbps * (1 + tolerance)
    first = tdce_throughput(replace(cfg, lanes=step))["mbps"]
    if first > hi:
        return replace(cfg, lanes=step)
    for lanes in range(step, max_lanes + 1, step):
        tp = tdce_throughput(replace(cfg, lanes=lanes))["mbps"]
        if lo <= tp <= hi:
            return replace(cfg, lanes=lanes)
        if tp > hi:
            break
    raise InfeasibleError(f"no lane count up to {max_lanes} reaches {target_mbps} Mb/s within {tolerance:.0%}")
