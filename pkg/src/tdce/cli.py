"""Command-line front end.

Exit codes: 0 success, 2 configuration or I/O error, 3 numerically
infeasible request (for instance no lane count meets a throughput target).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .channel import LinkRun, simulate
from .clustering import best_of_restarts, clustering_error
from .costmodel import (
    FdeHwConfig,
    InfeasibleError,
    TdceHwConfig,
    calibrate_alpha,
    calibrate_fde_latency,
    fde_cost,
    match_throughput,
    tdce_cost,
)
from .engine import clustered_complexity
from .experiments import DESIGN_POINTS, DESIGNS, equalize, finetune_filter
from .fde import fde_complexity, optimal_fft_size, valid_fft_sizes
from .finetune import adam_finetune, build_trainset
from .fixedpoint import FixedFormat
from .io import ConfigError
from .taps import ChannelSpec, angle_histogram, generate_taps, max_taps, uniformity_rho

log = logging.getLogger("tdce")

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3


def _spec(args) -> ChannelSpec:
    spec = io.load_channel_spec(args.spec) if args.spec else ChannelSpec()
    if getattr(args, "spans", None) is not None:
        spec = spec.with_spans(args.spans)
    return spec


def _fmt(text):
    if text is None or text.lower() in ("none", "float"):
        return None
    try:
        return FixedFormat.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _parse_range(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("TDCE_WORKERS", "1")))
    except ValueError:
        raise ConfigError("TDCE_WORKERS must be an integer") from None


def cmd_taps(args) -> int:
    spec = _spec(args)
    out = Path(args.out)
    n = max_taps(spec)
    m = args.taps or n
    taps = generate_taps(spec, m)
    counts = angle_histogram(taps, args.bins)
    io.write_taps_csv(out / "taps.csv", taps)
    width = 360.0 / args.bins
    io.write_csv(
        out / "histogram.csv",
        [{"bin": b, "start_deg": b * width, "stop_deg": (b + 1) * width, "count": int(c)} for b, c in enumerate(counts)],
    )
    report = {"max_taps": n, "taps": m, "bins": args.bins, "rho": uniformity_rho(taps, args.bins),
              "total_length_km": spec.total_length_m / 1e3}
    io.write_json(out / "rho.json", report)
    if args.sweep_spans:
        rows = []
        for s in _parse_range(args.sweep_spans):
            sp = spec.with_spans(s)
            rows.append({"spans": s, "length_km": sp.total_length_m / 1e3, "taps": max_taps(sp),
                         "rho": uniformity_rho(generate_taps(sp), args.bins)})
        io.write_csv(out / "rho_sweep.csv", rows)
    print(f"N={n} M={m} rho={report['rho']:.4f} -> {out}")
    return EXIT_OK


def _run_from_args(args) -> LinkRun:
    return LinkRun(_spec(args), args.launch_dbm, args.symbols, args.seed, args.nonlinear,
                   args.step_m, noise=not args.no_noise)


def _save_run(out: Path, sim: dict, run: LinkRun):
    meta = {"spec": json.loads(json.dumps(run.spec.__dict__)), "seed": run.seed, "launch_power_dbm": run.launch_power_dbm,
            "nonlinear": run.nonlinear, "noise": run.noise, "symbol_count": run.symbol_count}
    io.write_signal(out / "tx.bin", sim["tx"], run=meta)
    io.write_signal(out / "rx.bin", sim["rx"], run=meta)
    io.write_bits(out / "bits.bin", sim["bits"])
    from .signal import SignalBlock

    io.write_signal(out / "symbols.bin", SignalBlock(sim["symbols"], run.spec.baud_rate_hz, "tx"), run=meta)
    io.write_json(out / "run.json", meta)


def _load_run(path) -> tuple[dict, ChannelSpec]:
    d = Path(path)
    meta_file = d / "run.json"
    if not meta_file.exists():
        raise ConfigError(f"{d} is not a simulation directory (run.json missing)")
    meta = json.loads(meta_file.read_text())
    try:
        spec = ChannelSpec(**meta["spec"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{meta_file}: bad spec ({exc})") from None
    sim = {"tx": io.read_signal(d / "tx.bin"), "rx": io.read_signal(d / "rx.bin"), "bits": io.read_bits(d / "bits.bin")}
    return sim, spec


def cmd_simulate(args) -> int:
    run = _run_from_args(args)
    sim = simulate(run)
    out = Path(args.out)
    _save_run(out, sim, run)
    print(f"simulated {run.symbol_count} symbols over {run.spec.span_count} span(s) -> {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _spec(args)
    m = args.taps or max_taps(spec)
    rows = []
    for p in [float(v) for v in args.powers.split(",")]:
        sim = simulate(LinkRun(spec, p, args.symbols, args.seed, args.nonlinear, args.step_m))
        r = equalize(sim, spec, "direct", m)
        rows.append({"launch_power_dbm": p, "taps": m, "ber": r.ber, "errors": r.errors, "bits": r.bits})
        print(f"{p:+.1f} dBm: BER {r.ber:.3e}")
    io.write_csv(Path(args.out) / "power_sweep.csv", rows)
    return EXIT_OK


def cmd_cluster(args) -> int:
    taps = io.read_taps_csv(args.taps_file)
    if not 1 <= args.clusters <= taps.m:
        raise ConfigError(f"--clusters must be in 1..{taps.m}")
    cf = best_of_restarts(taps, args.clusters, restarts=args.restarts, seed=args.seed)
    err = clustering_error(taps, cf)
    io.save_clustered_filter(args.out, cf, restarts=args.restarts, max_abs_error=err["max_abs"], rms_error=err["rms"])
    print(f"{args.clusters} clusters, rms error {err['rms']:.4g} -> {args.out}")
    return EXIT_OK


def cmd_equalize(args) -> int:
    sim, spec = _load_run(args.run)
    cf = io.load_clustered_filter(args.filter) if args.filter else None
    if args.design.startswith("tdce") and cf is None and args.clusters is None:
        raise ConfigError("TDCE designs need --filter or --clusters")
    m = cf.source_filter_len if cf is not None else (args.taps or max_taps(spec))
    fmt = "default" if args.format is None else _fmt(args.format)
    cost = None
    if args.design.startswith("tdce"):
        n_c = cf.n_clusters if cf is not None else args.clusters
        cost = tdce_cost(TdceHwConfig(m, n_c, lp=args.lp, lanes=_lanes_for(args.lanes, args.lp)))
        if not cost["feasible"]:
            raise InfeasibleError(f"lp={args.lp} cannot finish {cost['complex_mults_per_block']} products in "
                                  f"{cost['cycles_per_block']} cycles; minimum lp is {cost['lp_min']}")
    res = equalize(sim, spec, args.design, m, args.clusters, fmt=fmt, lanes=args.lanes, fft_size=args.fft_size,
                   radix=args.radix, seed=args.seed, restarts=args.restarts, cf=cf)
    out = Path(args.out)
    io.write_signal(out / "equalized.bin", res.output, design=args.design)
    report = {"design": args.design, "taps": m, "clusters": None if res.filter is None else res.filter.n_clusters,
              "format": None if fmt is None else str(fmt) if fmt != "default" else "default",
              "ber": res.ber, "errors": res.errors, "bits": res.bits, "group_delay": res.delay}
    if cost is not None:
        report["cost"] = cost
    io.write_json(out / "ber.json", report)
    if res.filter is not None and args.filter is None:
        io.save_clustered_filter(out / "filter.json", res.filter)
    print(f"{args.design}: BER {res.ber:.3e} ({res.errors}/{res.bits})")
    return EXIT_OK


def _lanes_for(lanes, lp):
    if lp is None:
        return lanes
    return max(lp, lanes - lanes % lp)


def cmd_finetune(args) -> int:
    sim, spec = _load_run(args.run)
    cf = io.load_clustered_filter(args.filter)
    ts = build_trainset(sim["rx"], sim["tx"], cf, bits=sim["bits"])
    res = adam_finetune(ts, cf.centroids, lr=args.lr, epochs=args.epochs, batch=args.batch, patience=args.patience,
                        seed=args.seed, minibatch=args.minibatch)
    from .clustering import ClusteredFilter

    tuned = ClusteredFilter(res["centroids"], cf.routing, dict(cf.metadata))
    out = Path(args.out)
    final = res["history"][-1]["best"] if res["history"] else res["initial_score"]
    io.save_clustered_filter(out / "filter.json", tuned, method="kmeans+adam", lr=args.lr,
                             epochs_run=res["epochs_run"], initial_ber=res["initial_score"], final_ber=final)
    io.write_csv(out / "history.csv", res["history"], ["epoch", "loss", "score", "best"])
    print(f"fine-tuned for {res['epochs_run']} epochs, BER {res['initial_score']:.3e} -> {final:.3e}")
    return EXIT_OK


def _ber_row(key):
    spans, seed, symbols = key
    from .experiments import simulate_link

    spec = ChannelSpec().with_spans(spans)
    dp = DESIGN_POINTS[spans]
    sim = simulate_link(spec, symbols, seed)
    return {
        "spans": spans,
        "ber_knn": equalize(sim, spec, "tdce-knn", dp["m_tdce"], dp["nc_knn"], seed=seed).ber,
        "ber_gd": equalize(sim, spec, "tdce-gd", dp["m_tdce"], dp["nc_gd"], seed=seed).ber,
        "ber_fde": equalize(sim, spec, "fde", dp["m_fde"], fft_size=dp["n_fft"], radix="radix4").ber,
    }


def complexity_rows(spec: ChannelSpec, spans_list) -> list[dict]:
    rows = []
    for s in spans_list:
        dp = DESIGN_POINTS[s]
        sp = spec.with_spans(s)
        rows.append({
            "spans": s,
            "max_taps": max_taps(sp),
            "m_tdce": dp["m_tdce"],
            "m_fde": dp["m_fde"],
            "nc_knn": dp["nc_knn"],
            "nc_gd": dp["nc_gd"],
            "n_fft": dp["n_fft"],
            "n_fft_optimal_radix4": optimal_fft_size(dp["m_fde"], "radix4"),
            "c_cv_knn": clustered_complexity(dp["nc_knn"]),
            "c_cv_gd": clustered_complexity(dp["nc_gd"]),
            "c_fft": fde_complexity(dp["n_fft"], dp["m_fde"], "radix4"),
        })
    return rows


def cost_rows(spans_list, alpha: float | None = None) -> list[dict]:
    rows = []
    for s in spans_list:
        dp = DESIGN_POINTS[s]
        lat = calibrate_fde_latency(dp["n_fft"], dp["m_fde"], dp["th_fde"])
        fde = fde_cost(FdeHwConfig(dp["n_fft"], dp["m_fde"], latency_cycles=lat))
        rows.append({"design": "fde", "spans": s, "m": dp["m_fde"], "n_c": "", "lanes": "", "lp": "",
                     "cycles_per_block": "", "real_multipliers": "", "c": fde["c_fft"],
                     "throughput_mbps": fde["throughput_mbps"]})
        for kind in ("knn", "gd"):
            m, nc, lanes = dp["m_tdce"], dp[f"nc_{kind}"], dp[f"l_{kind}"]
            a_tp = alpha if alpha is not None else calibrate_alpha(lanes, m, dp[f"th_{kind}"])
            try:
                matched = match_throughput(TdceHwConfig(m, nc, lp=dp["lp"], alpha=max(a_tp, 1.0)), fde["throughput_mbps"])
                matched_lanes = matched.lanes
            except InfeasibleError:
                matched_lanes = ""
            c = tdce_cost(TdceHwConfig(m, nc, lanes, lp=dp["lp"]))
            rows.append({"design": f"tdce-{kind}", "spans": s, "m": m, "n_c": nc, "lanes": lanes, "lp": c["lp"],
                         "lp_min": c["lp_min"], "feasible": c["feasible"],
                         "cycles_per_block": c["cycles_per_block"], "real_multipliers": c["real_multipliers"],
                         "c": c["real_mults_per_sample"], "throughput_mbps": dp[f"th_{kind}"],
                         "matched_lanes": matched_lanes})
    return rows


def cmd_report(args) -> int:
    spec = _spec(args) if args.spec else ChannelSpec()
    spans_list = _parse_range(args.spans_list)
    unknown = [s for s in spans_list if s not in DESIGN_POINTS]
    if unknown:
        raise ConfigError(f"no design point for spans {unknown}; known: {sorted(DESIGN_POINTS)}")
    out = Path(args.out)
    comp = complexity_rows(spec, spans_list)
    io.write_csv(out / "complexity.csv", comp)
    cost = cost_rows(spans_list)
    cols = ["design", "spans", "m", "n_c", "lanes", "lp", "lp_min", "feasible", "cycles_per_block",
            "real_multipliers", "c", "throughput_mbps", "matched_lanes"]
    io.write_csv(out / "cost.csv", [{**{k: "" for k in cols}, **r} for r in cost], cols)
    fde_rows = [
        {"n_fft": n, "m": DESIGN_POINTS[s]["m_fde"], "radix": r, "c_fft": fde_complexity(n, DESIGN_POINTS[s]["m_fde"], r)}
        for s in spans_list
        for r in ("radix2", "radix4")
        for n in valid_fft_sizes(r, 2 ** 7, 2 ** 13)
        if n > DESIGN_POINTS[s]["m_fde"]
    ]
    io.write_csv(out / "fde_complexity.csv", fde_rows, ["n_fft", "m", "radix", "c_fft"])
    report = {"complexity": comp, "cost": cost}
    if args.ber:
        keys = [(s, args.seed, args.symbols) for s in spans_list]
        workers = _workers()
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                bers = list(pool.map(_ber_row, keys))
        else:
            bers = [_ber_row(k) for k in keys]
        bers.sort(key=lambda r: r["spans"])
        io.write_csv(out / "ber.csv", bers)
        report["ber"] = bers
    io.write_json(out / "report.json", report)
    print(f"report for spans {spans_list} -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tdce", description="Clustered time-domain CD equalizer toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, spans=True):
        sp.add_argument("--spec", help="channel spec file (key = value lines or JSON)")
        if spans:
            sp.add_argument("--spans", type=int, help="override the span count")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", required=True)

    def link(sp):
        sp.add_argument("--symbols", type=int, default=2**16)
        sp.add_argument("--launch-dbm", type=float, default=0.0)
        sp.add_argument("--nonlinear", action="store_true")
        sp.add_argument("--step-m", type=float, default=None, help="split-step size in meters")

    sp = sub.add_parser("taps", help="write CD taps, angle histogram and rho")
    common(sp)
    sp.add_argument("--taps", type=int, help="filter length M (default: maximum)")
    sp.add_argument("--bins", type=int, default=30)
    sp.add_argument("--sweep-spans", help="also write rho for span counts, e.g. 1-100")
    sp.set_defaults(func=cmd_taps)

    sp = sub.add_parser("simulate", help="simulate a link and store tx/rx waveforms")
    common(sp)
    link(sp)
    sp.add_argument("--no-noise", action="store_true")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="direct-CDC BER against launch power")
    common(sp)
    link(sp)
    sp.add_argument("--powers", default="-4,-2,0,2,4", help="comma list in dBm; write --powers=-2,0 when it starts with a minus")
    sp.add_argument("--taps", type=int)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("cluster", help="k-means cluster a tap file")
    sp.add_argument("--taps-file", required=True)
    sp.add_argument("--clusters", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=10)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_cluster)

    sp = sub.add_parser("equalize", help="equalize a stored simulation and count bit errors")
    sp.add_argument("--run", required=True, help="directory written by 'simulate'")
    sp.add_argument("--design", choices=DESIGNS, default="tdce-knn")
    sp.add_argument("--filter", help="clustered filter JSON (TDCE designs)")
    sp.add_argument("--taps", type=int)
    sp.add_argument("--clusters", type=int)
    sp.add_argument("--format", help="Q<int>.<frac> or 'float' (default per design)")
    sp.add_argument("--lanes", type=int, default=4096)
    sp.add_argument("--lp", type=int, default=None, help="parallel multipliers (cost accounting only)")
    sp.add_argument("--fft-size", type=int, default=256)
    sp.add_argument("--radix", choices=("radix2", "radix4"), default="radix2")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=10)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_equalize)

    sp = sub.add_parser("finetune", help="Adam fine-tuning of clustered filter centroids")
    sp.add_argument("--run", required=True)
    sp.add_argument("--filter", required=True)
    sp.add_argument("--lr", type=float, default=1e-5)
    sp.add_argument("--epochs", type=int, default=400)
    sp.add_argument("--batch", type=int, default=2**16)
    sp.add_argument("--minibatch", type=int, default=256)
    sp.add_argument("--patience", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_finetune)

    sp = sub.add_parser("report", help="complexity, cost and optional BER tables per span count")
    sp.add_argument("--spec")
    sp.add_argument("--spans-list", default="1,2,4,8")
    sp.add_argument("--ber", action="store_true", help="also simulate and measure BER (slow)")
    sp.add_argument("--symbols", type=int, default=2**16)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
