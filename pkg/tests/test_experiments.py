import csv
import io
import json

import pytest
from click.testing import CliRunner

from logconheat.cli import main, read_config
from logconheat.experiments import (EXPERIMENTS, ExperimentResult, ExperimentSpec, emit, run,
                                    spec_hash)


@pytest.fixture(scope="module")
def e6():
    return run(ExperimentSpec("E6"))


class TestSpec:
    def test_defaults_resolved(self):
        d = ExperimentSpec("E1").to_dict()
        assert d["alpha"] == [1.0, 2.0, 3.0] and d["kappa_steps"] == 21 and d["seed"] == 0

    def test_hash_stable_and_sensitive(self):
        a = spec_hash(ExperimentSpec("E2"))
        assert a == spec_hash(ExperimentSpec("E2", alpha=(1, 1.5, 2)))
        assert len(a) == 12
        assert a != spec_hash(ExperimentSpec("E2", seed=1))
        assert a != spec_hash(ExperimentSpec("E3"))

    @pytest.mark.parametrize("kw", [dict(id="E7"), dict(id="E1", alpha=()),
                                    dict(id="E1", alpha=(-1,)), dict(id="E1", grid_h=0),
                                    dict(id="E1", t_max=-1), dict(id="E1", kappa_steps=0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ExperimentSpec(**kw)


class TestResult:
    def test_exploratory_assertions_do_not_fail(self):
        res = ExperimentResult(ExperimentSpec("E6"))
        res.check("probe", False, exploratory=True)
        res.check("real", True)
        assert res.passed and res.failures() == []
        res.check("broken", False)
        assert not res.passed and res.failures() == ["broken"]

    def test_e6_passes(self, e6):
        assert e6.passed, e6.failures()

    def test_emit_json_deterministic(self, e6, tmp_path):
        a = emit(e6, "json", tmp_path / "a")
        b = emit(run(ExperimentSpec("E6")), "json", tmp_path / "b")
        for name in ("spec.json", "result.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        data = json.loads((a / "result.json").read_text())
        assert data["experiment"] == "E6" and data["passed"] is True
        assert data["spec_hash"] == spec_hash(ExperimentSpec("E6"))
        assert "wall_clock_s" in json.loads((a / "timing.json").read_text())

    def test_emit_csv(self, e6, tmp_path):
        out = emit(e6, "csv", tmp_path)
        rows = list(csv.reader(io.StringIO((out / "result.csv").read_text())))
        assert tuple(rows[0]) == tuple(e6.columns)
        assert len(rows) == len(e6.rows) + 1
        spec_rows = dict(csv.reader(io.StringIO((out / "spec.csv").read_text())))
        assert spec_rows["id"] == "E6"

    def test_emit_errors(self, e6, tmp_path):
        with pytest.raises(ValueError):
            emit(e6, "xml", tmp_path)
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OSError):
            emit(e6, "json", blocker / "sub")


class TestCli:
    def test_run_json(self, tmp_path):
        r = CliRunner().invoke(main, ["run", "E6", "--out", str(tmp_path)])
        assert r.exit_code == 0, r.output
        h = spec_hash(ExperimentSpec("E6"))
        assert (tmp_path / "E6" / h / "spec.json").exists()
        assert (tmp_path / "E6" / h / "result.json").exists()
        assert "E6 PASS" in r.output

    def test_config_file_mirrors_flags(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text(f"# E6 with a different seed\nseed = 5\nformat = csv\n"
                        f"out = {tmp_path / 'o'}\nkappa_steps = 21\n")
        r = CliRunner().invoke(main, ["run", "e6", "--config", str(conf)])
        assert r.exit_code == 0, r.output
        h = spec_hash(ExperimentSpec("E6", seed=5))
        assert (tmp_path / "o" / "E6" / h / "result.csv").exists()

    def test_flags_override_config(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("seed = 5\n")
        r = CliRunner().invoke(main, ["run", "E6", "--config", str(conf), "--seed", "2",
                                      "--out", str(tmp_path)])
        assert r.exit_code == 0
        assert (tmp_path / "E6" / spec_hash(ExperimentSpec("E6", seed=2))).exists()

    def test_bad_config(self, tmp_path):
        conf = tmp_path / "bad.conf"
        conf.write_text("colour = blue\n")
        r = CliRunner().invoke(main, ["run", "E6", "--config", str(conf)])
        assert r.exit_code != 0
        conf.write_text("no equals sign\n")
        with pytest.raises(Exception):
            read_config(conf)

    def test_bad_values(self, tmp_path):
        r = CliRunner().invoke(main, ["run", "E6", "--alpha", "x,y", "--out", str(tmp_path)])
        assert r.exit_code == 2
        r = CliRunner().invoke(main, ["run", "E9"])
        assert r.exit_code == 2

    def test_failing_run_exits_nonzero(self, tmp_path, monkeypatch):
        import logconheat.cli as cli

        def fake_run(spec):
            res = ExperimentResult(spec)
            res.check("forced", False)
            return res

        monkeypatch.setattr(cli, "run", fake_run)
        r = CliRunner().invoke(main, ["run", "E6", "--out", str(tmp_path)])
        assert r.exit_code == 1 and "failed: forced" in r.output


def test_experiment_ids():
    assert EXPERIMENTS == ("E1", "E2", "E3", "E4", "E5", "E6")
