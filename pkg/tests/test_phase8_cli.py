"""Tests for Phase 8: command-line interface."""

import json

import pandas as pd
import pytest

import src.cli as cli
from src.models.errors import ContractViolation


@pytest.fixture
def config_file(tmp_path, small_config):
    path = tmp_path / "small.json"
    path.write_text(small_config.to_json())
    return path


@pytest.fixture
def heavy_table_file(tmp_path):
    path = tmp_path / "heavy.json"
    path.write_text(json.dumps({
        "switch": {"K": 5, "p": 0.9, "q": 0.9},
        "arrivals": {"family": "mixed_poisson", "rate": 0.2},
    }))
    return path


class TestCapacityCommand:
    """Tests for `qswitch capacity`."""

    def test_heavy_table_report(self, heavy_table_file, capsys):
        """The heavy table setting is inside with margin 0.0111 and q* 0.8889."""
        assert cli.main(["capacity", "--config", str(heavy_table_file)]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "inside" in out
        assert "0.0111" in out
        assert "0.888889" in out

    def test_zero_rates(self, tmp_path, capsys):
        """A zero-rate config is inside."""
        path = tmp_path / "zero.json"
        path.write_text('{"switch": {"K": 3}, "arrivals": {"rate": 0}}')
        assert cli.main(["capacity", "--config", str(path)]) == cli.EXIT_OK
        assert "inside" in capsys.readouterr().out

    def test_never_stable_flagged(self, configs_dir, capsys):
        """Rates beyond q=1 are flagged."""
        assert cli.main(["capacity", "--config", f"{configs_dir}/outside-region.json"]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "outside" in out
        assert "no q <= 1" in out


class TestRunCommand:
    """Tests for `qswitch run`."""

    def test_writes_outputs(self, config_file, tmp_path, capsys):
        """A run writes all result files and a one-line summary."""
        out = tmp_path / "run"
        assert cli.main(["run", "--config", str(config_file), "--out", str(out), "--horizon", "300"]) == 0
        for name in ("summary.json", "slots.csv", "served.csv", "discards.csv", "g_curve.csv"):
            assert (out / name).exists()
        doc = json.loads((out / "summary.json").read_text())
        assert doc["config"]["run"]["horizon_slots"] == 300
        assert doc["stability"]["verdict"] in ("stable", "unstable", "inconclusive")
        assert "fidelity=" in capsys.readouterr().out

    def test_seed_override(self, config_file, tmp_path):
        """--seed replaces the config seed."""
        out = tmp_path / "seeded"
        cli.main(["run", "--config", str(config_file), "--out", str(out), "--seed", "31", "--horizon", "100"])
        assert json.loads((out / "summary.json").read_text())["config"]["run"]["seed"] == 31

    def test_identical_outputs(self, config_file, tmp_path):
        """Running the same command twice writes identical bytes."""
        for name in ("a", "b"):
            cli.main(["run", "--config", str(config_file), "--out", str(tmp_path / name), "--horizon", "200"])
        for name in ("summary.json", "slots.csv", "served.csv", "discards.csv", "g_curve.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_invalid_config(self, tmp_path, capsys):
        """An invalid config exits 1 and names the location."""
        path = tmp_path / "bad.json"
        path.write_text('{"switch": {"K": 3, "colour": 1}, "arrivals": {"rate": 0.1}}')
        assert cli.main(["run", "--config", str(path)]) == cli.EXIT_INVALID
        assert "line 1" in capsys.readouterr().out

    def test_missing_config(self, tmp_path):
        """A missing file exits 1."""
        assert cli.main(["run", "--config", str(tmp_path / "none.json")]) == cli.EXIT_INVALID

    def test_contract_violation(self, config_file, tmp_path, monkeypatch, capsys):
        """A contract violation during the run exits 2."""
        def broken(config):
            raise ContractViolation("E0 has a negative count", slot=12)

        monkeypatch.setattr(cli, "run", broken)
        assert cli.main(["run", "--config", str(config_file), "--out", str(tmp_path)]) == cli.EXIT_CONTRACT
        assert "slot 12" in capsys.readouterr().out

    def test_results_dir_from_env(self, config_file, tmp_path, monkeypatch):
        """Without --out results go under QSWITCH_RESULTS_DIR."""
        monkeypatch.setenv("QSWITCH_RESULTS_DIR", str(tmp_path / "res"))
        assert cli.main(["run", "--config", str(config_file), "--horizon", "50"]) == 0
        assert (tmp_path / "res" / "run" / "summary.json").exists()


class TestSweepAndPreset:
    """Tests for `qswitch sweep` and `qswitch preset`."""

    def test_sweep_rows(self, config_file, tmp_path):
        """Two values with one seed give two runs plus a mean row each."""
        out = tmp_path / "sweep"
        code = cli.main([
            "sweep", "--config", str(config_file), "--param", "q", "--values", "0.5,0.9",
            "--horizon", "200", "--jobs", "1", "--out", str(out),
        ])
        assert code == 0
        df = pd.read_csv(out / "sweep.csv")
        assert list(df.columns) == ["value", "seed", "mean_fidelity", "mean_latency_ns", "stability_verdict"]
        runs = df[df["seed"].astype(str) != "mean"]
        assert runs["value"].tolist() == [0.5, 0.9]
        assert len(df) == 4

    def test_sweep_seeds(self, config_file, tmp_path):
        """--seeds repeats every value with consecutive seeds."""
        out = tmp_path / "seeds"
        cli.main([
            "sweep", "--config", str(config_file), "--param", "mem", "--values", "2",
            "--seeds", "3", "--horizon", "100", "--out", str(out),
        ])
        df = pd.read_csv(out / "sweep.csv")
        assert df["seed"].astype(str).tolist() == ["7", "8", "9", "mean"]

    def test_unknown_sweep_param(self, config_file):
        """Unknown parameters exit 1."""
        assert cli.main(["sweep", "--config", str(config_file), "--param", "W", "--values", "1"]) == cli.EXIT_INVALID

    def test_bad_values(self, config_file):
        """Non-numeric values exit 1."""
        assert cli.main(["sweep", "--config", str(config_file), "--param", "q", "--values", "a,b"]) == cli.EXIT_INVALID

    def test_out_of_range_value(self, config_file, tmp_path):
        """Swept values are validated like config values."""
        code = cli.main(["sweep", "--config", str(config_file), "--param", "q", "--values", "1.5",
                         "--out", str(tmp_path)])
        assert code == cli.EXIT_INVALID

    def test_unknown_preset(self):
        """Unknown presets exit 1."""
        assert cli.main(["preset", "table-huge"]) == cli.EXIT_INVALID

    def test_table_preset(self, tmp_path):
        """The light table preset writes one row per protocol and policy."""
        out = tmp_path / "table"
        assert cli.main(["preset", "table-light", "--horizon", "100", "--out", str(out)]) == 0
        df = pd.read_csv(out / "table-light.csv")
        assert list(df.columns) == ["protocol", "policy", "mean_fidelity", "mean_latency_us"]
        assert len(df) == 8
        assert set(df["policy"]) == {"yqf", "oqf"}

    def test_requires_command(self):
        """A verb is mandatory."""
        with pytest.raises(SystemExit):
            cli.main([])
