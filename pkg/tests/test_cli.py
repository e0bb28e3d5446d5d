import csv
import math

import pytest

from rydcnot.cli import (ConfigError, RunConfig, default_config, dump_config,
                         load_config, main)
from rydcnot.noise import NoiseConfig


def run_cli(args):
    return main(args)


class TestConfig:
    def test_round_trip(self, tmp_path):
        cfg = default_config()
        path = tmp_path / "run.ini"
        path.write_text(dump_config(cfg))
        loaded = load_config(path)
        assert loaded == cfg

    def test_round_trip_with_overrides(self, tmp_path):
        cfg = RunConfig(params=default_config().params,
                        trap=default_config().trap,
                        noise=NoiseConfig(temperature=5e-5,
                                          enable_se=False,
                                          fixed_blockade=1.0e7),
                        seed=7, shots=321, workers=2, out_dir="x")
        path = tmp_path / "run.ini"
        path.write_text(dump_config(cfg))
        assert load_config(path) == cfg

    def test_unknown_key_is_hard_error(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[noise]\nlaser_linewidth = 1.0\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_unknown_section_is_hard_error(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[lasers]\npower = 1.0\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.ini")

    def test_bad_value_exit_code(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[noise]\np_bg_single = 1.7\n")
        code = run_cli(["error-budget", "--config", str(path),
                        "--out", str(tmp_path / "o")])
        assert code == 2


class TestErrorBudget:
    def test_outputs_and_values(self, tmp_path):
        out = tmp_path / "eb"
        assert run_cli(["error-budget", "--out", str(out)]) == 0
        with open(out / "quadrature_budget.csv") as fh:
            rows = {r["error_source"]: r for r in csv.DictReader(fh)}
        assert float(rows["total_quadrature"]["this_work"]) \
            == pytest.approx(0.064, abs=2e-3)
        assert float(rows["total_quadrature"]["earlier_work"]) \
            == pytest.approx(0.1463, abs=2e-3)
        report = (out / "report.txt").read_text()
        assert "6.53" in report and "0.41" in report

    def test_dephasing_curve_reparses(self, tmp_path):
        from rydcnot.noise import max_fidelity_from_dephasing

        out = tmp_path / "eb"
        run_cli(["error-budget", "--out", str(out)])
        with open(out / "dephasing_vs_temperature.csv") as fh:
            for row in csv.DictReader(fh):
                factor = float(row["dephasing_factor"])
                fid = float(row["stochastic_phase_limited_fidelity"])
                assert fid == max_fidelity_from_dephasing(factor)


class TestBlockadeProfile:
    def test_csv_columns_recompute(self, tmp_path):
        from rydcnot.sequence import PhysicalParams
        from rydcnot.thermal import double_excitation_prob

        out = tmp_path / "bp"
        assert run_cli(["blockade-profile", "--out", str(out),
                        "--shots", "10000"]) == 0
        omega = PhysicalParams().omega_ryd
        with open(out / "blockade_vs_separation.csv") as fh:
            for row in csv.DictReader(fh):
                b = float(row["blockade_rad_s"])
                p2 = float(row["double_excitation_probability"])
                assert p2 == double_excitation_prob(omega, b)
        assert (out / "separation_hist_axial.txt").exists()
        assert (out / "separation_hist_3d.txt").exists()


class TestTruthTableCommand:
    def test_no_noise_permutation(self, tmp_path):
        out = tmp_path / "tt"
        assert run_cli(["truth-table", "--no-noise", "--shots", "400",
                        "--out", str(out)]) == 0
        with open(out / "truth_table_raw.csv") as fh:
            rows = list(csv.DictReader(fh))
        perm = {"00": "p01", "01": "p00", "10": "p10", "11": "p11"}
        for row in rows:
            assert float(row[perm[row["input"]]]) == pytest.approx(1.0)

    def test_deterministic_across_workers(self, tmp_path):
        digests = []
        for workers, tag in ((1, "a"), (2, "b")):
            out = tmp_path / tag
            assert run_cli(["truth-table", "--shots", "1000", "--seed", "3",
                            "--workers", str(workers),
                            "--out", str(out)]) == 0
            digests.append((out / "truth_table_raw.csv").read_bytes())
        assert digests[0] == digests[1]


class TestParityCommand:
    def test_outputs(self, tmp_path):
        out = tmp_path / "par"
        assert run_cli(["parity", "--no-noise", "--shots", "600",
                        "--out", str(out)]) == 0
        assert (out / "parity_scan.csv").exists()
        with open(out / "parity_fit.csv") as fh:
            rows = {r["parameter"]: float(r["value"])
                    for r in csv.DictReader(fh)}
        assert rows["abs_c1"] == pytest.approx(0.5, abs=0.05)
        assert rows["oscillation_rad_s"] \
            == pytest.approx(2 * math.pi * 0.25e6, rel=0.05)
        with open(out / "fidelity_report.csv") as fh:
            fid = {r["quantity"]: float(r["value"])
                   for r in csv.DictReader(fh)}
        assert fid["bell_fidelity_raw"] > 0.95


class TestBellCommand:
    def test_outputs(self, tmp_path):
        out = tmp_path / "bell"
        assert run_cli(["bell", "--no-noise", "--shots", "500",
                        "--out", str(out)]) == 0
        with open(out / "bell_populations.csv") as fh:
            rows = {r["state"]: r for r in csv.DictReader(fh)}
        assert float(rows["B1"]["p00"]) == pytest.approx(0.5, abs=0.1)
        assert float(rows["B2"]["p01"]) == pytest.approx(0.5, abs=0.1)


class TestEffectiveConfig:
    def test_written_and_reloadable(self, tmp_path):
        out = tmp_path / "cfg"
        run_cli(["error-budget", "--seed", "5", "--out", str(out)])
        loaded = load_config(out / "effective_config.ini")
        assert loaded.seed == 5
