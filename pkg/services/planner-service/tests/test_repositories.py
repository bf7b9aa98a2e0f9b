"""Tests for app/repositories.py."""
import pytest

from app.models import RunConfig
from app.repositories import ResultRepository, RunConfigRepository, format_value
from shared.common.enums import ContourEngine, CurveMetric, GateStatus
from shared.common.errors import ConfigError

SAMPLE = """
# operating point
coop_order = 2
users=2      # two users
target_rcp = 0.8

antenna_set = 1, 4
engine = mc
"""


class TestRunConfigRepository:
    """Parsing and validating key = value configurations."""

    def test_parse_text(self):
        values = RunConfigRepository.parse_text(SAMPLE)
        assert values == {
            "coop_order": "2",
            "users": "2",
            "target_rcp": "0.8",
            "antenna_set": "1, 4",
            "engine": "mc",
        }

    def test_build_converts_types(self):
        config = RunConfigRepository.build(RunConfigRepository.parse_text(SAMPLE))
        assert config.coop_order == 2
        assert config.target_rcp == 0.8
        assert config.antenna_set == [1, 4]
        assert config.engine == ContourEngine.MC_EXACT
        assert config.metric == CurveMetric.RCP

    def test_missing_equals_reports_line(self):
        with pytest.raises(ConfigError) as excinfo:
            RunConfigRepository.parse_text("users = 3\ncoop_order 3\n", source="run.cfg")
        assert excinfo.value.details["line"] == 2
        assert "run.cfg:2" in excinfo.value.message

    def test_missing_key(self):
        with pytest.raises(ConfigError) as excinfo:
            RunConfigRepository.parse_text(" = 3")
        assert excinfo.value.details["line"] == 1

    def test_duplicate_key(self):
        with pytest.raises(ConfigError) as excinfo:
            RunConfigRepository.parse_text("seed = 1\n\nseed = 2\n")
        assert excinfo.value.error_code == "config_duplicate"
        assert excinfo.value.details == {"line": 3, "key": "seed"}

    def test_unknown_key_is_named(self):
        with pytest.raises(ConfigError) as excinfo:
            RunConfigRepository.build({"coop_oder": "3"})
        assert "coop_oder" in excinfo.value.message

    @pytest.mark.parametrize("key,value", [
        ("target_rcp", "1.0"),
        ("target_rcp", "0"),
        ("coop_order", "4"),
        ("trials", "0"),
        ("contour_pitch_m", "-1"),
        ("antenna_set", "0,2"),
        ("compare_targets", "0.5,1.5"),
    ])
    def test_invalid_values(self, key, value):
        with pytest.raises(ConfigError) as excinfo:
            RunConfigRepository.build({key: value})
        assert key in excinfo.value.details["keys"]

    def test_density_grid_order(self):
        with pytest.raises(ConfigError):
            RunConfigRepository.build({"density_min": "1e-5", "density_max": "2e-6"})

    def test_overrides_win_and_none_is_ignored(self):
        config = RunConfigRepository.build({"seed": "1", "trials": "500"}, {"seed": 9, "trials": None})
        assert config.seed == 9
        assert config.trials == 500

    def test_load(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(SAMPLE, encoding="utf-8")
        assert RunConfigRepository.load(str(path))["users"] == "2"

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigError) as excinfo:
            RunConfigRepository.load(str(tmp_path / "absent.cfg"))
        assert excinfo.value.error_code == "config_io"


class TestFormatValue:
    """Text form of table cells and header values."""

    @pytest.mark.parametrize("value,text", [
        (None, ""),
        (True, "true"),
        (False, "false"),
        (3, "3"),
        (0.1, "0.1"),
        (6.599e-06, "6.599e-06"),
        (ContourEngine.MC_EXACT, "mc_exact"),
        (GateStatus.PASSED, "pass"),
        ([1, 2, 4], "1,2,4"),
        ("infeasible", "infeasible"),
    ])
    def test_values(self, value, text):
        assert format_value(value) == text


class TestResultRepository:
    """Result tables with their configuration header."""

    def test_header_lines(self):
        config = RunConfig(seed=5, threads=8, output_path="out.csv")
        lines = ResultRepository.header_lines("plan", config)
        assert lines[0] == "# command = plan"
        keys = [line[2:].split(" = ")[0] for line in lines[1:]]
        assert keys == sorted(keys)
        assert "seed" in keys
        assert "threads" not in keys and "output_path" not in keys
        assert "spacing_m" not in keys

    def test_header_round_trip(self):
        config = RunConfig(coop_order=2, users=2, target_rcp=0.65, antenna_set=[2, 4], spacing_m=350.5,
                           engine=ContourEngine.MC_EXACT, trials=1234, seed=77)
        text = ResultRepository.render("contour", config, ["x"], [[1.0]])
        assert RunConfigRepository.build(RunConfigRepository.parse_header(text)) == config

    def test_render_ignores_execution_keys(self):
        rows = [[1.5, "ok", None], [2, "slack", True]]
        a = ResultRepository.render("compare", RunConfig(threads=1), ["a", "b", "c"], rows)
        b = ResultRepository.render("compare", RunConfig(threads=4, output_path="x.csv"), ["a", "b", "c"], rows)
        assert a == b
        assert a.splitlines()[-3:] == ["a,b,c", "1.5,ok,", "2,slack,true"]

    def test_write_table_to_file(self, tmp_path):
        path = tmp_path / "result.csv"
        config = RunConfig()
        ResultRepository.write_table("plan", config, ["density"], [[6.6e-06]], str(path))
        assert path.read_text(encoding="utf-8") == ResultRepository.render("plan", config, ["density"], [[6.6e-06]])

    def test_write_table_to_stdout(self, capsys):
        ResultRepository.write_table("plan", RunConfig(), ["density"], [[6.6e-06]])
        out = capsys.readouterr().out
        assert out.startswith("# command = plan\n")
        assert out.endswith("density\n6.6e-06\n")

    def test_unwritable_output(self, tmp_path):
        with pytest.raises(ConfigError):
            ResultRepository.write_table("plan", RunConfig(), ["a"], [[1]], str(tmp_path / "missing" / "x.csv"))
