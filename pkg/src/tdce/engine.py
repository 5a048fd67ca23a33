"""Time-domain clustered equalizer.

Convolution is evaluated as a sliding dot product: output ``y[n]`` uses the
input window ``x[n : n + M]`` against the reversed filter, so window position
``i`` meets tap ``M - 1 - i``. Only fully overlapped outputs are produced,
``len(x) - M + 1`` per polarization.

The clustered path splits every output into

1. pre-summation: input samples whose tap shares a cluster are added into
   one accumulator per cluster, either for a single output or for ``L``
   consecutive outputs sharing one pass over the routing map;
2. a short dot product of the ``N_C`` accumulators with the centroids.

Both paths accept ``dtype=object`` arrays so exact rational arithmetic can
be pushed through the same code.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import ClusteredFilter
from .fixedpoint import FixedFormat, quantize_complex_block
from .signal import as_block, unwrap
from .taps import TapSet

COMPLEX_MULT_REAL_OPS = 4  # real multiplications per complex product, complexity convention


@dataclass
class OpCounter:
    """Tally of arithmetic done by the clustered engine."""

    complex_mults: int = 0
    additions: int = 0
    outputs: int = 0

    @property
    def complex_mults_per_sample(self) -> float:
        return self.complex_mults / self.outputs if self.outputs else 0.0

    @property
    def real_mults_per_sample(self) -> float:
        return COMPLEX_MULT_REAL_OPS * self.complex_mults_per_sample


@dataclass
class PreSumState:
    """Accumulators ``x_S[j][w]`` for ``L`` lanes and ``N_C`` clusters."""

    presums: np.ndarray

    @property
    def lanes(self) -> int:
        return self.presums.shape[0]

    @property
    def n_clusters(self) -> int:
        return self.presums.shape[1]

    def lane(self, j: int) -> np.ndarray:
        return self.presums[j]


def _routing(cf, n_clusters=None):
    if isinstance(cf, ClusteredFilter):
        return cf.routing, cf.n_clusters
    q = np.asarray(cf, dtype=np.int64)
    return q, int(n_clusters if n_clusters is not None else q.max() + 1)


def _zeros(shape, like: np.ndarray):
    return np.zeros(shape, dtype=object if like.dtype == object else complex)


def presum_sequential(window, cf, n_clusters: int | None = None) -> np.ndarray:
    """Sum window samples per cluster with a single pass over the routing map.

    ``cf`` is a :class:`ClusteredFilter` or a bare routing array; the routing
    is applied to window positions as given.
    """
    q, n_c = _routing(cf, n_clusters)
    window = np.asarray(window)
    if window.shape != (q.size,):
        raise ValueError(f"window length {window.shape} does not match routing length {q.size}")
    xs = _zeros(n_c, window)
    for i in range(q.size):
        w = q[i]
        xs[w] = xs[w] + window[i]
    return xs


def presum_parallel(x, cf, L: int, n_clusters: int | None = None) -> PreSumState:
    """Pre-sum ``L`` consecutive windows at once.

    For each routing position the cluster index is read once and the ``L``
    samples ``x[i : i + L]`` are accumulated into lane ``j``'s slot. Lane
    ``j`` ends up equal to ``presum_sequential(x[j : j + M])`` with the same
    addition order.
    """
    q, n_c = _routing(cf, n_clusters)
    x = np.asarray(x)
    M = q.size
    if L < 1:
        raise ValueError("L must be >= 1")
    if x.shape != (M + L - 1,):
        raise ValueError(f"expected {M + L - 1} input samples for M={M}, L={L}, got {x.shape}")
    xs = _zeros((L, n_c), x)
    for i in range(M):
        w = q[i]
        xs[:, w] = xs[:, w] + x[i : i + L]
    return PreSumState(xs)


def _prepare(x, fmt):
    block, was_block = as_block(x)
    samples = block.samples
    if fmt is not None:
        samples = np.stack([quantize_complex_block(p, fmt) for p in samples])
    return block, was_block, samples


def direct_convolve(x, taps, fmt: FixedFormat | None = None):
    """Valid-mode FIR filtering of every polarization, y = sum_i g[M-1-i] x[n+i].

    Parameters
    ----------
    x : SignalBlock or array_like
        Input; 1-D arrays are treated as a single polarization.
    taps : TapSet or array_like
        Filter coefficients.
    fmt : FixedFormat, optional
        Quantize inputs and taps before filtering; arithmetic stays exact.
    """
    g = taps.taps if isinstance(taps, TapSet) else np.asarray(taps)
    if g.dtype != object:
        g = g.astype(complex)
    if fmt is not None:
        g = quantize_complex_block(g, fmt)
    block, was_block, samples = _prepare(x, fmt)
    M = g.size
    n = samples.shape[1]
    if n < M:
        raise ValueError(f"input of {n} samples is shorter than the filter ({M} taps)")
    n_out = n - M + 1
    g_rev = g[::-1]
    out = _zeros((samples.shape[0], n_out), samples)
    for p in range(samples.shape[0]):
        acc = g_rev[0] * samples[p, 0:n_out]
        for i in range(1, M):
            acc = acc + g_rev[i] * samples[p, i : i + n_out]
        out[p] = acc
    res = block.derive(out, role="equalized", equalizer="direct", taps=M)
    return unwrap(res, was_block, x)


def window_routing(cf: ClusteredFilter) -> np.ndarray:
    """Routing indexed by window position (the reversed tap routing)."""
    return cf.routing[::-1].copy()


def clustered_convolve(x, cf: ClusteredFilter, L: int = 64, fmt: FixedFormat | None = None,
                       counter: OpCounter | None = None):
    """Filter with a clustered filter via block pre-summation.

    Output ``n`` equals ``direct_convolve(x, reconstruct_taps(cf))[n]`` up to
    reassociation of the sums. Outputs are produced ``L`` at a time; the
    last block runs with however many lanes remain.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    gc = cf.centroids
    if fmt is not None:
        gc = quantize_complex_block(gc, fmt)
    block, was_block, samples = _prepare(x, fmt)
    M = cf.source_filter_len
    n = samples.shape[1]
    if n < M:
        raise ValueError(f"input of {n} samples is shorter than the filter ({M} taps)")
    n_out = n - M + 1
    qw = window_routing(cf)
    n_c = cf.n_clusters
    if samples.dtype == object:
        gc = np.asarray(list(gc), dtype=object) if gc.dtype != object else gc
    out = _zeros((samples.shape[0], n_out), samples)
    for p in range(samples.shape[0]):
        for start in range(0, n_out, L):
            lanes = min(L, n_out - start)
            state = presum_parallel(samples[p, start : start + M + lanes - 1], qw, lanes, n_c)
            out[p, start : start + lanes] = state.presums @ gc
            if counter is not None:
                counter.complex_mults += lanes * n_c
                counter.additions += lanes * (M - n_c) + lanes * (n_c - 1)
                counter.outputs += lanes
    res = block.derive(out, role="equalized", equalizer="tdce", taps=M, clusters=n_c)
    return unwrap(res, was_block, x)


def clustered_complexity(n_clusters: int) -> int:
    """Real multiplications per recovered sample, 4 per complex product."""
    if n_clusters < 1:
        raise ValueError("n_clusters must be >= 1")
    return COMPLEX_MULT_REAL_OPS * n_clusters
