"""Report serialization, schemas and the command-line front-end."""

import json
import math
import subprocess
import sys

import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lyapmin import io
from lyapmin.circle_map import doubling_map, trig_map
from lyapmin.cli import ExperimentConfig, load_config, main
from lyapmin.errors import ConfigError

SMALL = {"max_period": 6, "grid_n": 4096, "samples": 2, "positivity_samples": 10,
         "birkhoff_starts": 4, "birkhoff_steps": 1000}

REPORTS = {"orbits.json": "orbits", "subaction.json": "subaction", "alpha.json": "alpha",
           "plan.json": "plan", "perturbations.json": "perturbations",
           "verification.json": "verification"}


def write_config(path, **fields):
    cfg = dict(SMALL, out=str(path.parent / "out"))
    cfg.update(fields)
    path.write_text(json.dumps(cfg))
    return path


class TestDumps:
    def test_sorted_and_indented(self):
        text = io.dumps({"b": 1, "a": [1.5, {"d": None, "c": True}]})
        assert text == ('{\n  "a": [\n    1.5,\n    {\n      "c": true,\n      "d": null\n'
                        '    }\n  ],\n  "b": 1\n}\n')

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_float_roundtrip(self, x):
        assert json.loads(io.dumps({"x": x}))["x"] == x

    def test_numpy_and_nonfinite(self):
        d = json.loads(io.dumps({"a": np.arange(3), "b": np.float64(math.nan),
                                 "c": np.bool_(True), "d": (np.int64(4), math.inf)}))
        assert d == {"a": [0, 1, 2], "b": None, "c": True, "d": [4, None]}

    def test_empty_containers(self):
        assert json.loads(io.dumps({"a": [], "b": {}})) == {"a": [], "b": {}}

    def test_csv(self, tmp_path):
        io.write_csv(tmp_path / "t.csv", ["x", "y"], [[io.fmt(0.1), 2]])
        assert (tmp_path / "t.csv").read_text() == "x,y\n0.10000000000000001,2\n"


class TestMaps:
    @pytest.mark.parametrize("m", [doubling_map(), trig_map(3, [0.05, 0.02], [0.03], 0.1)])
    def test_load_map_sources(self, tmp_path, m):
        path = tmp_path / "m.json"
        path.write_text(io.map_to_json(m))
        for src in (m.to_dict(), io.map_to_json(m), str(path), m):
            assert io.load_map(src) == m

    def test_schema_rejects(self):
        with pytest.raises(jsonschema.ValidationError):
            io.load_map({"degree": 1})


class TestConfig:
    def test_defaults(self):
        cfg = load_config()
        assert cfg == ExperimentConfig()
        assert cfg.expanding_map == doubling_map()

    def test_overrides(self, tmp_path):
        cfg = load_config(write_config(tmp_path / "c.json", seed=3), seed=None, samples=7)
        assert (cfg.seed, cfg.samples, cfg.grid_n) == (3, 7, 4096)

    @pytest.mark.parametrize("bad", [{"unknown": 1}, {"grid_n": 100},
                                     {"map": {"degree": 2, "sin": "x"}}])
    def test_invalid(self, tmp_path, bad):
        with pytest.raises(ConfigError):
            load_config(write_config(tmp_path / "c.json", **bad))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.json")


class TestCommands:
    @pytest.fixture(scope="class")
    @classmethod
    def run_dir(cls, tmp_path_factory):
        base = tmp_path_factory.mktemp("run")
        cfg = write_config(base / "c.json")
        status = main(["run", "--config", str(cfg)])
        return base / "out", status

    def test_run_passes(self, run_dir):
        out, status = run_dir
        assert status == 0
        summary = (out / "summary.txt").read_text()
        assert "verification      PASS" in summary
        assert "alpha             0.693147180559945" in summary

    @pytest.mark.parametrize("name", sorted(REPORTS))
    def test_reports_validate(self, run_dir, name):
        out, _ = run_dir
        io.validate(io.read_json(out / name), REPORTS[name])

    def test_csv_reports(self, run_dir):
        out, _ = run_dir
        rows = (out / "orbits.csv").read_text().splitlines()
        assert rows[0] == "period,code,points,gap,lyap_avg"
        assert len(rows) - 1 == len(io.read_json(out / "orbits.json")["orbits"])
        assert (out / "subaction.csv").read_text().count("\n") == 4096 + 1

    @pytest.mark.parametrize("command, files", [("orbits", ["orbits.json", "orbits.csv"]),
                                                ("alpha", ["alpha.json"]),
                                                ("plan", ["plan.json"])])
    def test_single_commands(self, tmp_path, command, files):
        cfg = write_config(tmp_path / "c.json")
        assert main([command, "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        for f in files:
            assert (tmp_path / "o" / f).exists()

    def test_flags_override(self, tmp_path):
        cfg = write_config(tmp_path / "c.json")
        main(["orbits", "--config", str(cfg), "--max-period", "3", "--out", str(tmp_path / "o")])
        assert io.read_json(tmp_path / "o" / "orbits.json")["max_period"] == 3


class TestErrors:
    @pytest.mark.parametrize("fields, status, code", [
        ({"map": {"degree": 2, "sin": [0.2]}}, 3, "NotExpanding"),
        ({"regime": "paper"}, 7, "Overflow"),
        ({"practical": {"rho": 1.0}}, 7, "Infeasible"),
    ])
    def test_exit_status(self, tmp_path, fields, status, code):
        cfg = write_config(tmp_path / "c.json", **fields)
        assert main(["plan", "--config", str(cfg)]) == status
        err = io.read_json(tmp_path / "out" / "error.json")
        io.validate(err, "error")
        assert err["error"] == code and err["exit_status"] == status

    def test_missing_config(self, tmp_path):
        assert main(["orbits", "--config", str(tmp_path / "none.json"),
                     "--out", str(tmp_path / "o")]) == 9
        assert io.read_json(tmp_path / "o" / "error.json")["error"] == "ConfigError"

    def test_budget(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", max_period=24,
                           map={"degree": 3})
        assert main(["orbits", "--config", str(cfg)]) == 5

    def test_module_entry_point(self):
        out = subprocess.run([sys.executable, "-m", "lyapmin", "--help"], capture_output=True,
                             text=True, check=True)
        assert "verify" in out.stdout
