"""
BER on a simulated link
=======================

Simulate one 80 km span of dual-polarization 16-QAM, then compare the
direct filter, the clustered equalizer (plain k-means and fine-tuned) and
the overlap-save FDE. Takes a few seconds.
"""
from tdce.experiments import equalize, finetune_filter, simulate_link
from tdce.metrics import PRE_FEC_THRESHOLD
from tdce.taps import ChannelSpec

spec = ChannelSpec()
sim = simulate_link(spec, symbols=2**16, seed=0)
print(f"simulated {sim['bits'].size} bits; pre-FEC threshold {PRE_FEC_THRESHOLD:.1e}\n")

print("direct filter, float")
for m in (29, 31, 45):
    print(f"  M={m:2d}  BER {equalize(sim, spec, 'direct', m).ber:.2e}")

print("\nclustered, M=31, Q5.11")
for nc in (6, 8, 9, 12):
    print(f"  N_C={nc:2d}  BER {equalize(sim, spec, 'tdce-knn', 31, nc).ber:.2e}")

res = equalize(sim, spec, "tdce-knn", 31, 6)
tuned = finetune_filter(sim, res.filter)
after = equalize(sim, spec, "tdce-gd", 31, cf=tuned)
print(f"\nN_C=6 after fine-tuning ({tuned.metadata['epochs_run']} epochs): BER {res.ber:.2e} -> {after.ber:.2e}")

print("\nFDE, M=29, N_FFT=256, Q1.15")
print(f"  BER {equalize(sim, spec, 'fde', 29, fft_size=256).ber:.2e}")
