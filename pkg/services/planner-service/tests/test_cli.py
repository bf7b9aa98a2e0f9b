"""End-to-end tests for the complan command line."""
import csv
import io
from pathlib import Path

import pytest

from app.main import main
from shared.common.errors import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK

REPO_ROOT = Path(__file__).resolve().parents[3]
OPERATING_POINT = REPO_ROOT / "configs" / "operating_point.cfg"


def _table(text):
    """Data rows of a result file as dicts, skipping the '#' header"""
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


def _write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestPlanCommand:
    """complan plan"""

    def test_operating_point(self, capsys):
        assert main(["plan", "--config", str(OPERATING_POINT)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "# command = plan" in out
        (row,) = _table(out)
        assert float(row["spacing"]) == pytest.approx(418.306, rel=1e-2)
        assert float(row["density"]) == pytest.approx(6.599e-6, rel=2e-2)
        assert row["metric"] == "rcp"
        assert row["slack"] == "false"

    def test_output_file_and_summary(self, tmp_path, capsys):
        out_path = tmp_path / "plan.csv"
        assert main(["plan", "--out", str(out_path)]) == EXIT_OK
        assert "Required density" in capsys.readouterr().out
        (row,) = _table(out_path.read_text(encoding="utf-8"))
        assert row["N"] == "3" and row["U"] == "3"

    def test_ergodic_metric(self, capsys):
        assert main(["plan", "--metric", "ergodic"]) == EXIT_OK
        (row,) = _table(capsys.readouterr().out)
        assert row["metric"] == "ergodic"
        assert float(row["achieved"]) == pytest.approx(1.0, abs=1e-2)

    def test_unreachable_target(self, tmp_path, capsys):
        config = _write_config(tmp_path, "threshold_t = 200\n")
        assert main(["plan", "--config", config]) == EXIT_INFEASIBLE
        assert "infeasible_target" in capsys.readouterr().err

    def test_target_of_one_is_rejected(self, tmp_path, capsys):
        config = _write_config(tmp_path, "target_rcp = 1.0\n")
        assert main(["plan", "--config", config]) == EXIT_CONFIG
        assert "target_rcp" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, capsys):
        config = _write_config(tmp_path, "users = 3\nshadowing_db = 6\n")
        assert main(["plan", "--config", config]) == EXIT_CONFIG
        assert "shadowing_db" in capsys.readouterr().err

    def test_too_many_users(self, tmp_path, capsys):
        config = _write_config(tmp_path, "coop_order = 2\nusers = 3\n")
        assert main(["plan", "--config", config]) == EXIT_CONFIG
        assert "infeasible_users" in capsys.readouterr().err


class TestArgumentErrors:
    """Usage problems map to the configuration exit code."""

    def test_unknown_command(self, capsys):
        assert main(["optimise"]) == EXIT_CONFIG

    def test_missing_command(self, capsys):
        assert main([]) == EXIT_CONFIG

    @pytest.mark.parametrize("pitch", ["0", "-5"])
    def test_non_positive_pitch(self, pitch, capsys):
        assert main(["contour", f"--pitch={pitch}"]) == EXIT_CONFIG
        assert "contour_pitch_m" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["plan", "--config", str(tmp_path / "nope.cfg")]) == EXIT_CONFIG


class TestCurveCommand:
    """complan curve"""

    def test_single_point_per_antenna_count(self, tmp_path, capsys):
        config = _write_config(tmp_path, "density_points = 1\ndensity_min = 6e-6\n")
        assert main(["curve", "--config", config, "--antennas", "1,2"]) == EXIT_OK
        rows = _table(capsys.readouterr().out)
        assert [row["M"] for row in rows] == ["1", "2"]
        assert {row["N"] for row in rows} == {"3"}
        assert float(rows[0]["worst_rcp"]) == pytest.approx(0.537, abs=2e-3)
        assert float(rows[1]["worst_rcp"]) == pytest.approx(0.903, abs=2e-3)

    def test_default_grid(self, capsys):
        assert main(["curve", "--antennas", "1"]) == EXIT_OK
        rows = _table(capsys.readouterr().out)
        assert len(rows) == 41
        values = [float(row["worst_rcp"]) for row in rows]
        assert values == sorted(values)

    def test_ergodic_metric(self, tmp_path, capsys):
        config = _write_config(tmp_path, "density_points = 3\n")
        assert main(["curve", "--config", config, "--metric", "ergodic", "--antennas", "1"]) == EXIT_OK
        rows = _table(capsys.readouterr().out)
        assert len(rows) == 3
        assert "worst_ergodic" in rows[0]

    def test_cooperation_orders(self, tmp_path, capsys):
        config = _write_config(tmp_path, "users = 1\ndensity_min = 3e-6\ndensity_max = 2e-5\ndensity_points = 3\n")
        assert main(["curve", "--config", config, "--antennas", "1", "--orders", "1,2,3"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "# curve_orders = 1,2,3" in out
        rows = _table(out)
        assert [row["N"] for row in rows] == ["1"] * 3 + ["2"] * 3 + ["3"] * 3
        by_order = {n: [float(row["worst_rcp"]) for row in rows if row["N"] == n] for n in ("1", "2", "3")}
        for k in range(3):
            assert by_order["1"][k] <= by_order["2"][k] <= by_order["3"][k]

    def test_order_without_enough_antennas(self, capsys):
        assert main(["curve", "--antennas", "1", "--orders", "1,3"]) == EXIT_CONFIG
        assert "infeasible_users" in capsys.readouterr().err

    def test_unsupported_curve_order(self, capsys):
        assert main(["curve", "--orders", "4"]) == EXIT_CONFIG
        assert "curve_orders" in capsys.readouterr().err


class TestContourCommand:
    """complan contour"""

    def test_analytic(self, capsys):
        assert main(["contour", "--pitch", "20"]) == EXIT_OK
        rows = _table(capsys.readouterr().out)
        assert rows and set(rows[0]) == {"x", "y", "rcp"}
        assert min(float(row["rcp"]) for row in rows) >= 0.699

    def test_thread_count_does_not_change_bytes(self, tmp_path):
        one, two = tmp_path / "one.csv", tmp_path / "two.csv"
        common = ["contour", "--engine", "mc", "--trials", "300", "--pitch", "150", "--seed", "3"]
        assert main(common + ["--threads", "1", "--out", str(one)]) == EXIT_OK
        assert main(common + ["--threads", "2", "--out", str(two)]) == EXIT_OK
        assert one.read_bytes() == two.read_bytes()
        assert set(_table(one.read_text(encoding="utf-8"))[0]) == {"x", "y", "rcp", "ci_lo", "ci_hi"}


class TestCompareCommand:
    """complan compare"""

    def test_ratios(self, capsys):
        assert main(["compare"]) == EXIT_OK
        rows = _table(capsys.readouterr().out)
        ratios = {row["N"]: float(row["ratio_vs_N1"]) for row in rows}
        assert ratios["1"] == 1.0
        assert ratios["2"] == pytest.approx(0.7176, abs=0.01)
        assert ratios["3"] == pytest.approx(0.5926, abs=0.01)

    def test_operating_point_targets(self, capsys):
        assert main(["compare", "--config", str(OPERATING_POINT)]) == EXIT_OK
        rows = _table(capsys.readouterr().out)
        assert len(rows) == 9

    def test_infeasible_cells(self, tmp_path, capsys):
        config = _write_config(tmp_path, "threshold_t = 200\n")
        assert main(["compare", "--config", config]) == EXIT_INFEASIBLE
        rows = _table(capsys.readouterr().out)
        assert {row["status"] for row in rows} == {"infeasible"}


class TestValidateCommand:
    """complan validate"""

    def test_gate_table(self, tmp_path):
        out_path = tmp_path / "validate.csv"
        code = main(["validate", "--trials", "5000", "--seed", "42", "--out", str(out_path)])
        assert code in (EXIT_OK, EXIT_INFEASIBLE)
        rows = _table(out_path.read_text(encoding="utf-8"))
        by_name = {row["name"]: row for row in rows}
        assert {row["section"] for row in rows} == {"plan", "analytic", "montecarlo", "regime"}
        assert by_name["q_series_max_error"]["passed"] == "pass"
        assert by_name["moment_identity_rel_error"]["passed"] == "pass"
        assert by_name["ergodic_closed_vs_quadrature"]["passed"] == "pass"
        assert float(by_name["spacing_m"]["value"]) == pytest.approx(418.306, rel=1e-2)
        assert by_name["violations_zf_identity"]["passed"] == "pass"
        for name in ("reference_rcp_fit_tol", "reference_ks_tol"):
            assert by_name[name]["passed"] == "info"
            assert float(by_name[name]["value"]) == 0.03

    def test_thread_count_does_not_change_bytes(self, tmp_path):
        one, eight = tmp_path / "one.csv", tmp_path / "eight.csv"
        common = ["validate", "--trials", "3000", "--seed", "42"]
        assert main(common + ["--threads", "1", "--out", str(one)]) in (EXIT_OK, EXIT_INFEASIBLE)
        assert main(common + ["--threads", "8", "--out", str(eight)]) in (EXIT_OK, EXIT_INFEASIBLE)
        assert one.read_bytes() == eight.read_bytes()
