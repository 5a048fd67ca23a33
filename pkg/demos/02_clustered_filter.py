"""
Clustering taps and filtering with pre-sums
===========================================

k-means replaces the M taps by N_C centroids. The filter then adds the input
samples that share a centroid first and multiplies once per centroid, so each
output costs N_C complex products instead of M.
"""
import numpy as np

from tdce.clustering import best_of_restarts, clustering_error, reconstruct_taps
from tdce.engine import OpCounter, clustered_convolve, direct_convolve, presum_parallel, window_routing
from tdce.taps import ChannelSpec, generate_taps

taps = generate_taps(ChannelSpec(), 31)
cf = best_of_restarts(taps, 9, restarts=10)
print("31 taps -> 9 centroids")
print("routing map:", cf.routing.tolist())
print("cluster sizes:", np.bincount(cf.routing).tolist())
err = clustering_error(taps, cf)
print(f"per-tap error: max {err['max_abs']:.4f}, rms {err['rms']:.4f} (tap radius {abs(taps.taps[0]):.4f})")

rng = np.random.default_rng(0)
x = rng.normal(size=400) + 1j * rng.normal(size=400)

# four outputs at once: one pass over the routing map fills 4 x 9 accumulators
state = presum_parallel(x[: 31 + 4 - 1], window_routing(cf), 4, cf.n_clusters)
print("\npre-sum array for L=4 lanes has shape", state.presums.shape)
print("lane outputs:", np.round(state.presums @ cf.centroids, 4))

counter = OpCounter()
y = clustered_convolve(x, cf, L=64, counter=counter)
ref = direct_convolve(x, reconstruct_taps(cf))
print("\nclustered vs direct on reconstructed taps, max |diff| =", np.max(np.abs(y - ref)))
print("complex products per output:", counter.complex_mults_per_sample)
print("real multiplications per output:", counter.real_mults_per_sample, "(direct filter would need", 4 * 31, ")")
