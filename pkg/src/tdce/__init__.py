"""Clustered time-domain chromatic dispersion equalizer and its baselines.

The main entry points are re-exported here; the submodules hold the rest.
"""
from .channel import LinkRun, propagate, simulate, transmit
from .clustering import ClusteredFilter, best_of_restarts, kmeans_cluster, reconstruct_taps
from .costmodel import FdeHwConfig, InfeasibleError, TdceHwConfig, fde_cost, match_throughput, tdce_cost
from .engine import (
    OpCounter,
    clustered_complexity,
    clustered_convolve,
    direct_convolve,
    presum_parallel,
    presum_sequential,
)
from .fde import FdeConfig, fde_complexity, fft, ifft, optimal_fft_size, overlap_save_equalize
from .finetune import TrainSet, adam_finetune, build_trainset, wirtinger_gradient
from .fixedpoint import FDE_FORMAT, TDCE_FORMAT, FixedFormat, quantize
from .metrics import PRE_FEC_THRESHOLD, evaluate_ber
from .signal import SignalBlock
from .taps import ChannelSpec, TapSet, angle_histogram, generate_taps, max_taps, uniformity_rho

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec", "ClusteredFilter", "FDE_FORMAT", "FdeConfig", "FdeHwConfig", "FixedFormat",
    "InfeasibleError", "LinkRun", "OpCounter", "PRE_FEC_THRESHOLD", "SignalBlock", "TDCE_FORMAT",
    "TapSet", "TdceHwConfig", "TrainSet", "adam_finetune", "angle_histogram", "best_of_restarts",
    "build_trainset", "clustered_complexity", "clustered_convolve", "direct_convolve", "evaluate_ber",
    "fde_complexity", "fde_cost", "fft", "generate_taps", "ifft", "kmeans_cluster", "match_throughput",
    "max_taps", "optimal_fft_size", "overlap_save_equalize", "presum_parallel", "presum_sequential",
    "propagate", "quantize", "reconstruct_taps", "simulate", "tdce_cost", "transmit", "uniformity_rho",
    "wirtinger_gradient",
]
