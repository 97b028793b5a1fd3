import orjson
import pytest
from typer.testing import CliRunner

import app as cli
from app import COMMANDS, CommandRunner, app, run
from simulation.validation import ValidationReport
from utils.config import parse_config

runner = CliRunner()

SMALL_RUN = """
[params]
gamma1 = 1.0
gamma2 = 1.0
pump = 0.6
delta_p = 0.0
delta_c = -10.0
omega_p = 0.01
theta = "pi/5"
alpha = 1.0

[grid]
nx = {n}
ny = {n}

[sweep]
thetas = ["pi/12", "pi/5"]
gammas = [2.5, 4.0]
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(SMALL_RUN.format(n=11))
    return path


def small_config(n=7, name="small"):
    return parse_config(SMALL_RUN.format(n=n), name=name)


class TestCli:
    def test_map_writes_csv_and_report(self, config_file, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(app, ["map", "--config", str(config_file), "--out", str(out), "--quiet"])
        assert result.exit_code == 0
        lines = (out / "small_map.csv").read_text().splitlines()
        assert lines[0] == "x,y,chi_im"
        assert len(lines) == 122
        report = orjson.loads((out / "small_peaks.json").read_bytes())
        assert set(report) == {"config", "report", "summary"}
        assert report["config"]["grid"]["nx"] == 11

    def test_invalid_config_exit_code_and_error_file(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text(SMALL_RUN.format(n=11).replace("gamma1 = 1.0", "gamma1 = -1.0"))
        out = tmp_path / "out"
        result = runner.invoke(app, ["map", "--config", str(bad), "--out", str(out), "--quiet"])
        assert result.exit_code == 1
        assert "config_validation_error" in result.stdout

    def test_config_and_preset_are_exclusive(self, config_file):
        result = runner.invoke(app, ["map", "--config", str(config_file), "--preset", "fig2d"])
        assert result.exit_code == 2

    def test_config_required(self):
        result = runner.invoke(app, ["map"])
        assert result.exit_code == 2

    def test_threads_must_be_positive(self, config_file):
        result = runner.invoke(app, ["map", "--config", str(config_file), "--threads", "0"])
        assert result.exit_code == 2

    def test_presets_listing(self):
        result = runner.invoke(app, ["presets"])
        assert result.exit_code == 0
        assert "fig2d" in result.stdout
        assert "fig4-alt-theta" in result.stdout

    def test_thread_count_does_not_change_bytes(self, config_file, tmp_path):
        outputs = []
        for threads in ("1", "3"):
            out = tmp_path / f"t{threads}"
            result = runner.invoke(
                app, ["map", "-c", str(config_file), "-o", str(out), "-t", threads, "-q"]
            )
            assert result.exit_code == 0
            outputs.append(((out / "small_map.csv").read_bytes(), (out / "small_peaks.json").read_bytes()))
        assert outputs[0] == outputs[1]


class TestRun:
    def test_every_command_is_routed(self, tmp_path):
        assert set(CommandRunner(small_config(), tmp_path).routes) == set(COMMANDS)

    def test_render(self, tmp_path):
        assert run("render", small_config(), tmp_path) == 0
        data = (tmp_path / "small_map.pgm").read_bytes()
        assert data.startswith(b"P5\n7 7\n255\n")

    def test_contours(self, tmp_path):
        assert run("contours", small_config(n=15), tmp_path) == 0
        header = (tmp_path / "small_contours.csv").read_text().splitlines()[0]
        assert header == "level,polyline,vertex,x,y,closed"

    def test_sweep_theta(self, tmp_path):
        assert run("sweep-theta", small_config(), tmp_path) == 0
        assert (tmp_path / "small_theta_0.csv").is_file()
        assert (tmp_path / "small_theta_1.csv").is_file()
        sweep = orjson.loads((tmp_path / "small_sweep_theta.json").read_bytes())["sweep"]
        assert sweep["parameter"] == "theta"
        assert len(sweep["summaries"]) == 2

    def test_sweep_gamma(self, tmp_path):
        assert run("sweep-gamma", small_config(), tmp_path) == 0
        sweep = orjson.loads((tmp_path / "small_sweep_gamma.json").read_bytes())["sweep"]
        assert sweep["values"] == [2.5, 4.0]

    def test_error_json(self, tmp_path):
        config = small_config()
        bad = config.model_copy(update={"params": config.params.model_copy(update={"omega_p": 0.0})})
        assert run("map", bad, tmp_path) == 1
        payload = orjson.loads((tmp_path / "error.json").read_bytes())
        assert payload["command"] == "map"
        assert payload["error"] == "invalid_parameters"

    def test_output_flags(self, tmp_path):
        config = parse_config(SMALL_RUN.format(n=5) + "\n[output]\njson = false\npgm = true\n", name="flags")
        assert run("map", config, tmp_path) == 0
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["flags_map.csv", "flags_map.pgm"]

    @pytest.mark.parametrize("passed,status", [(True, 0), (False, 1)])
    def test_validate_status_follows_report(self, tmp_path, monkeypatch, passed, status):
        canned = ValidationReport(
            oracle={"passed": passed, "max_entrywise_difference": 1e-12, "sample_count": 1},
        )
        monkeypatch.setattr(cli, "run_validation", lambda *args, **kwargs: canned)
        assert run("validate", small_config(n=5), tmp_path) == status
        report = orjson.loads((tmp_path / "validation.json").read_bytes())
        assert report["passed"] is passed

    @pytest.mark.slow
    def test_validate(self, tmp_path):
        status = run("validate", small_config(n=5), tmp_path)
        report = orjson.loads((tmp_path / "validation.json").read_bytes())
        assert status == (0 if report["passed"] else 1)
        for section in ("oracle", "physicality", "probe_linearity", "analytic", "vanishing_checks", "symmetry"):
            assert section in report
        assert report["oracle"]["sample_count"] == 20
        assert report["physicality"]["passed"]
