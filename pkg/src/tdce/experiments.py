"""End-to-end runs tying the simulator, the equalizers and the BER counter."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LinkRun, simulate
from .clustering import ClusteredFilter, best_of_restarts
from .engine import clustered_convolve, direct_convolve
from .fde import FdeConfig, overlap_save_equalize
from .finetune import adam_finetune, build_trainset
from .fixedpoint import FDE_FORMAT, TDCE_FORMAT, FixedFormat
from .metrics import evaluate_ber
from .signal import SignalBlock
from .taps import ChannelSpec, generate_taps

# Design points per span count (80 km spans, 32 GBaud, 2 sps): maximum tap
# count, TDCE and FDE filter lengths, cluster counts for plain k-means and
# after fine-tuning, FFT size, and the lane settings used in hardware.
DESIGN_POINTS = {
    1: dict(n=45, m_tdce=31, m_fde=29, nc_knn=9, nc_gd=6, n_fft=256, l_gd=8, l_knn=10, lp=2,
            th_gd=81.6, th_knn=83.3, th_fde=80.5),
    2: dict(n=89, m_tdce=53, m_fde=55, nc_knn=10, nc_gd=8, n_fft=256, l_gd=10, l_knn=12, lp=2,
            th_gd=66.7, th_knn=75.9, th_fde=71.3),
    4: dict(n=177, m_tdce=97, m_fde=103, nc_knn=10, nc_gd=8, n_fft=1024, l_gd=18, l_knn=20, lp=2,
            th_gd=75.6, th_knn=81.3, th_fde=79.5),
    8: dict(n=353, m_tdce=189, m_fde=201, nc_knn=12, nc_gd=12, n_fft=4096, l_gd=36, l_knn=36, lp=2,
            th_gd=76.9, th_knn=76.9, th_fde=78.6),
}

DESIGNS = ("direct", "tdce-knn", "tdce-gd", "fde")
DEFAULT_LANES = 4096
DEFAULT_RESTARTS = 10


def fit_to_format(samples: np.ndarray, fmt: FixedFormat | None, crest: float = 4.0) -> np.ndarray:
    """Scale unit-power samples down when ``crest`` RMS would overflow ``fmt``."""
    if fmt is None:
        return samples
    rms = np.sqrt(np.mean(np.abs(samples) ** 2))
    scale = min(1.0, fmt.max_value / (crest * rms)) if rms > 0 else 1.0
    return samples * scale


@dataclass
class EqualizerResult:
    output: SignalBlock
    ber: float
    errors: int
    bits: int
    delay: int
    filter: ClusteredFilter | None = None


def cluster_taps(spec: ChannelSpec, m: int, n_c: int, seed: int = 0, restarts: int = DEFAULT_RESTARTS) -> ClusteredFilter:
    return best_of_restarts(generate_taps(spec, m), n_c, restarts=restarts, seed=seed)


def equalize(sim: dict, spec: ChannelSpec, design: str, m: int, n_c: int | None = None, *,
             fmt: FixedFormat | None | str = "default", lanes: int = DEFAULT_LANES, fft_size: int = 256,
             radix: str = "radix2", seed: int = 0, restarts: int = DEFAULT_RESTARTS,
             cf: ClusteredFilter | None = None, guard: int = 128) -> EqualizerResult:
    """Run one equalizer on a simulated link and count bit errors.

    ``fmt="default"`` picks Q5.11 for the TDCE designs, Q1.15 for the FDE and
    floating point for direct convolution.
    """
    if design not in DESIGNS:
        raise ValueError(f"unknown design {design!r}; choose from {DESIGNS}")
    if fmt == "default":
        fmt = {"direct": None, "fde": FDE_FORMAT}.get(design, TDCE_FORMAT)
    rx = sim["rx"]
    tx_meta = sim["tx"].metadata
    x = rx.derive(fit_to_format(rx.samples, fmt))
    if design == "direct":
        y = direct_convolve(x, generate_taps(spec, m), fmt)
    elif design == "fde":
        y = overlap_save_equalize(x, FdeConfig(fft_size, generate_taps(spec, m), radix, fmt))
    else:
        if cf is None:
            cf = cluster_taps(spec, m, n_c, seed, restarts)
            if design == "tdce-gd":
                cf = finetune_filter(sim, cf)
        m = cf.source_filter_len
        y = clustered_convolve(x, cf, lanes, fmt)
    delay = (m - 1) // 2
    res = evaluate_ber(y, sim["bits"], delay, tx_meta["symbol_offset"], tx_meta.get("sps", 2), guard=guard)
    return EqualizerResult(y, res.ber, res.errors, res.bits, delay, cf)


def finetune_filter(sim: dict, cf: ClusteredFilter, **kw) -> ClusteredFilter:
    """Adam-refined copy of ``cf`` trained on the given simulation."""
    ts = build_trainset(sim["rx"], sim["tx"], cf, bits=sim["bits"])
    out = adam_finetune(ts, cf.centroids, **kw)
    md = dict(cf.metadata)
    md.update(method="kmeans+adam", epochs_run=out["epochs_run"], final_score=out["history"][-1]["best"] if out["history"] else None)
    return ClusteredFilter(out["centroids"], cf.routing, md)


def simulate_link(spec: ChannelSpec, symbols: int = 2**16, seed: int = 0, launch_power_dbm: float = 0.0,
                  nonlinear: bool = False, noise: bool = True) -> dict:
    return simulate(LinkRun(spec, launch_power_dbm, symbols, seed, nonlinear, noise=noise))
