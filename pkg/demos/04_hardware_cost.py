"""
Multipliers, cycles and throughput
==================================

The clustered design sums for about M + N_C cycles per block of L outputs.
Its L * N_C products can be spread over that time, so only L_P complex
multipliers are needed. The FDE instead multiplies in every butterfly.
"""
from tdce.costmodel import FdeHwConfig, TdceHwConfig, calibrate_alpha, calibrate_fde_latency, fde_cost, match_throughput, tdce_cost
from tdce.experiments import DESIGN_POINTS

print("spans  design    M   N_C   L  L_P  cycles  real mults  mults/sample")
for spans, dp in DESIGN_POINTS.items():
    for kind in ("knn", "gd"):
        c = tdce_cost(TdceHwConfig(dp["m_tdce"], dp[f"nc_{kind}"], dp[f"l_{kind}"]))
        print(f"{spans:5d}  tdce-{kind:3s} {c['m']:4d} {c['n_c']:4d} {c['lanes']:4d} {c['lp']:3d} "
              f"{c['cycles_per_block']:7d} {c['real_multipliers']:10d} {c['real_mults_per_sample']:12d}")
    f = fde_cost(FdeHwConfig(dp["n_fft"], dp["m_fde"]))
    print(f"{spans:5d}  fde      {dp['m_fde']:4d}   N_FFT={dp['n_fft']:<5d}{'':18s}{f['c_fft']:12.2f}")

# throughput matching at 4 spans: find the lane count that keeps up with the FDE
dp = DESIGN_POINTS[4]
lat = calibrate_fde_latency(dp["n_fft"], dp["m_fde"], dp["th_fde"])
target = fde_cost(FdeHwConfig(dp["n_fft"], dp["m_fde"], latency_cycles=lat))["throughput_mbps"]
alpha = calibrate_alpha(dp["l_knn"], dp["m_tdce"], dp["th_knn"])
cfg = match_throughput(TdceHwConfig(dp["m_tdce"], dp["nc_knn"], lp=2, alpha=alpha), target)
print(f"\n4 spans: FDE at {target:.1f} Mb/s is matched by L={cfg.lanes} lanes "
      f"(measured-throughput overhead {alpha:.3f})")
