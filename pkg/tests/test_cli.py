import json

import pytest

from tdce import io
from tdce.cli import complexity_rows, cost_rows, main
from tdce.costmodel import TdceHwConfig, tdce_cost
from tdce.engine import clustered_complexity
from tdce.fde import fde_complexity
from tdce.taps import ChannelSpec


def test_taps_default_one_span(tmp_path):
    assert main(["taps", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "rho.json").read_text())
    assert rep["max_taps"] == 45 and rep["taps"] == 45
    hist = io.read_csv(tmp_path / "histogram.csv")
    assert sum(int(r["count"]) for r in hist) == 45
    assert len(io.read_csv(tmp_path / "taps.csv")) == 45


def test_taps_rho_sweep_trend(tmp_path):
    assert main(["taps", "--out", str(tmp_path), "--sweep-spans", "1-100"]) == 0
    rows = io.read_csv(tmp_path / "rho_sweep.csv")
    rho = [float(r["rho"]) for r in rows]
    assert len(rho) == 100 and min(rho) >= 0
    assert rho[0] > rho[-1]


def test_spec_file_and_errors(tmp_path, capsys):
    cfg = tmp_path / "link.cfg"
    cfg.write_text("span_count = 4\n")
    assert main(["taps", "--spec", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert json.loads((tmp_path / "a" / "rho.json").read_text())["max_taps"] == 177
    cfg.write_text("span_count = 4\nspeed = 3\n")
    assert main(["taps", "--spec", str(cfg), "--out", str(tmp_path / "b")]) == 2
    assert "link.cfg:2" in capsys.readouterr().err
    assert main(["taps", "--taps", "46", "--out", str(tmp_path / "c")]) == 2


def test_pipeline(tmp_path):
    sim, out = tmp_path / "sim", tmp_path / "out"
    assert main(["simulate", "--symbols", "2048", "--seed", "1", "--out", str(sim)]) == 0
    assert main(["taps", "--taps", "31", "--out", str(tmp_path / "t")]) == 0
    assert main(["cluster", "--taps-file", str(tmp_path / "t" / "taps.csv"), "--clusters", "9",
                 "--out", str(tmp_path / "f.json")]) == 0
    assert main(["equalize", "--run", str(sim), "--design", "tdce-knn", "--filter", str(tmp_path / "f.json"),
                 "--format", "Q5.11", "--lanes", "20", "--lp", "5", "--out", str(out / "knn")]) == 0
    rep = json.loads((out / "knn" / "ber.json").read_text())
    assert rep["taps"] == 31 and rep["clusters"] == 9 and rep["ber"] < 0.01
    assert rep["cost"]["lp"] == 5
    assert io.read_signal(out / "knn" / "equalized.bin").samples.shape == (2, (2047 * 2 + 257) - 30)
    assert main(["equalize", "--run", str(sim), "--design", "fde", "--taps", "29", "--fft-size", "256",
                 "--out", str(out / "fde")]) == 0
    assert main(["finetune", "--run", str(sim), "--filter", str(tmp_path / "f.json"), "--epochs", "5",
                 "--out", str(out / "ft")]) == 0
    tuned = json.loads((out / "ft" / "filter.json").read_text())
    assert tuned["metadata"]["method"] == "kmeans+adam" and "final_ber" in tuned["metadata"]
    assert len(io.read_csv(out / "ft" / "history.csv")) <= 5


def test_equalize_infeasible_and_bad_inputs(tmp_path):
    sim = tmp_path / "sim"
    main(["simulate", "--symbols", "1024", "--out", str(sim)])
    assert main(["equalize", "--run", str(sim), "--design", "tdce-knn", "--clusters", "9", "--taps", "31",
                 "--lanes", "20", "--lp", "2", "--out", str(tmp_path / "x")]) == 3
    assert main(["equalize", "--run", str(sim), "--design", "tdce-knn", "--out", str(tmp_path / "x")]) == 2
    assert main(["equalize", "--run", str(tmp_path), "--design", "direct", "--out", str(tmp_path / "x")]) == 2
    assert main(["equalize", "--run", str(sim), "--design", "direct", "--format", "Z1", "--out",
                 str(tmp_path / "x")]) == 2


def test_simulate_is_byte_stable(tmp_path):
    for d in ("a", "b"):
        main(["simulate", "--symbols", "512", "--seed", "7", "--out", str(tmp_path / d)])
    for f in ("rx.bin", "tx.bin", "bits.bin", "run.json", "rx.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_report_tables_agree_with_models(tmp_path):
    assert main(["report", "--out", str(tmp_path)]) == 0
    comp = io.read_csv(tmp_path / "complexity.csv")
    assert [int(r["max_taps"]) for r in comp] == [45, 89, 177, 353]
    assert [int(r["c_cv_knn"]) for r in comp] == [36, 40, 40, 48]
    assert [int(r["c_cv_gd"]) for r in comp] == [24, 32, 32, 48]
    for r in comp:
        assert float(r["c_fft"]) == fde_complexity(int(r["n_fft"]), int(r["m_fde"]), "radix4")
    cost = [r for r in io.read_csv(tmp_path / "cost.csv") if r["design"] != "fde"]
    for r in cost:
        c = tdce_cost(TdceHwConfig(int(r["m"]), int(r["n_c"]), int(r["lanes"]), lp=int(r["lp"])))
        assert int(r["cycles_per_block"]) == c["cycles_per_block"]
        assert int(r["real_multipliers"]) == c["real_multipliers"]
        assert int(r["lp_min"]) == c["lp_min"] and r["feasible"] == str(c["feasible"])
    four = {r["design"]: r for r in cost if r["spans"] == "4"}
    assert four["tdce-knn"]["real_multipliers"] == "4" and four["tdce-gd"]["real_multipliers"] == "4"
    assert four["tdce-knn"]["feasible"] == "True" and four["tdce-knn"]["lp_min"] == "2"
    assert four["tdce-knn"]["matched_lanes"] == "20" and four["tdce-gd"]["matched_lanes"] == "18"
    rows = io.read_csv(tmp_path / "fde_complexity.csv")
    assert list(rows[0]) == ["n_fft", "m", "radix", "c_fft"]


def test_report_unknown_span(tmp_path):
    assert main(["report", "--spans-list", "3", "--out", str(tmp_path)]) == 2


def test_report_with_ber_uses_workers(tmp_path, monkeypatch):
    monkeypatch.setenv("TDCE_WORKERS", "2")
    assert main(["report", "--spans-list", "1", "--ber", "--symbols", "2048", "--out", str(tmp_path)]) == 0
    rows = io.read_csv(tmp_path / "ber.csv")
    assert rows[0]["spans"] == "1" and float(rows[0]["ber_fde"]) < 0.05
    monkeypatch.setenv("TDCE_WORKERS", "lots")
    assert main(["report", "--spans-list", "1", "--ber", "--out", str(tmp_path)]) == 2


def test_helper_rows_match():
    rows = complexity_rows(ChannelSpec(), [4])
    assert rows[0]["c_cv_knn"] == clustered_complexity(10)
    assert any(r["design"] == "fde" for r in cost_rows([1]))


def test_sweep(tmp_path):
    assert main(["sweep", "--powers=-2,0", "--symbols", "1024", "--out", str(tmp_path)]) == 0
    assert len(io.read_csv(tmp_path / "power_sweep.csv")) == 2
