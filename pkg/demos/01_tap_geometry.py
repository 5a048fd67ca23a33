"""
Where the CD taps live
======================

Every tap of a chromatic-dispersion compensation filter has the same
magnitude; only the phase changes, quadratically in the tap index. So the
taps sit on one circle in the complex plane, and for short links many of
them pile up at the same angle. This script prints that picture in numbers.
"""
import numpy as np

from tdce.taps import ChannelSpec, angle_histogram, generate_taps, max_taps, uniformity_rho

spacer = "_" * 60

spec = ChannelSpec()
print("One 80 km span at 32 GBaud, 2 samples per symbol")
print("maximum filter length N =", max_taps(spec))

taps = generate_taps(spec)
print("tap magnitudes (all equal):", np.unique(np.round(np.abs(taps.taps), 12)))

# phases of the centre taps change slowly, the outer ones wrap fast
print("\nfirst few tap phases from the centre outward [rad]:")
ph = np.angle(taps.taps[taps.center_index:])
print(np.round(ph[:8], 3))

print("\nangle histogram, 30 bins of 12 degrees:")
counts = angle_histogram(taps, 30)
for b, c in enumerate(counts):
    if c:
        print(f"  {b * 12:3d}-{b * 12 + 12:3d} deg  " + "#" * int(c))

print(spacer)
print("\nrho = (fullest bin - emptiest bin) / mean bin count")
print("large rho: taps crowd a few angles, clustering them costs little")
for spans in (1, 2, 4, 8, 25, 100):
    s = spec.with_spans(spans)
    print(f"  {spans:3d} spans  N={max_taps(s):5d}  rho={uniformity_rho(generate_taps(s)):.3f}")
