import csv
import subprocess
import sys

import pytest
import yaml

from activecc.cli import main


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump({
        "dataset": {"n": 16, "k": 2},
        "run": {"batch_size": 20, "output_dir": str(tmp_path / "out")},
    }))
    return path


class TestCli:
    def test_run_writes_outputs(self, config, tmp_path):
        assert main(["run", "--config", str(config), "--seed", "7"]) == 0
        out = tmp_path / "out"
        assert (out / "seed7.jsonl").exists()
        assert (out / "summary.csv").read_text().startswith("iter,queries,")
        assert (out / "config.yaml").exists()

    def test_run_byte_identical(self, config, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", str(config), "--seed", "7", "--output-dir", str(a)]) == 0
        assert main(["run", "--config", str(config), "--seed", "7", "--output-dir", str(b)]) == 0
        assert (a / "seed7.jsonl").read_bytes() == (b / "seed7.jsonl").read_bytes()

    def test_overrides(self, config, tmp_path):
        out = tmp_path / "o"
        assert main(["run", "--config", str(config), "--budget", "40", "--batch-size", "10",
                     "--gamma", "0", "--output-dir", str(out)]) == 0
        lines = (out / "seed0.jsonl").read_text().splitlines()
        assert len(lines) == 5

    def test_sweep(self, config, tmp_path):
        assert main(["sweep", "--config", str(config), "--strategies", "entropy,uniform", "--seeds", "2"]) == 0
        with (tmp_path / "out" / "sweep.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert [r["strategy"] for r in rows] == ["entropy", "uniform"]
        assert (tmp_path / "out" / "uniform" / "seed1.jsonl").exists()

    @pytest.mark.parametrize("ablation,count", [("switch-point", 2), ("warm-start", 2), ("soft-vs-hard", 4)])
    def test_ablations(self, config, tmp_path, ablation, count):
        extra = ["--values", "0,0.1"] if ablation != "soft-vs-hard" else []
        assert main(["ablate", ablation, "--config", str(config), "--seeds", "1", *extra]) == 0
        with (tmp_path / "out" / ablation / "ablation.csv").open() as fh:
            assert len(list(csv.DictReader(fh))) == count

    def test_warm_start_flag(self, config, tmp_path):
        args = ["ablate", "warm-start", "--config", str(config), "--seeds", "1", "--values", "0.2"]
        assert main(args + ["--no-warmstart-mark-queried"]) == 0
        saved = yaml.safe_load((tmp_path / "out" / "warm-start" / "reveal-0.2" / "config.yaml").read_text())
        assert saved["init"]["reveal_mark_queried"] is False

    def test_config_errors(self, config, tmp_path):
        assert main(["run", "--config", str(tmp_path / "missing.yaml")]) == 1
        assert main(["run", "--config", str(config), "--batch-size", "0"]) == 1
        assert main(["run", "--config", str(config), "--budget", "100000"]) == 1
        assert main(["sweep", "--config", str(config), "--strategies", "magic"]) == 1
        bad = tmp_path / "bad.yaml"
        bad.write_text("run: {colour: red}\n")
        assert main(["run", "--config", str(bad)]) == 1

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1

    def test_broken_csv_is_input_error(self, tmp_path):
        csv_path = tmp_path / "d.csv"
        csv_path.write_text("1,0\n2\n")
        cfg = tmp_path / "c.yaml"
        cfg.write_text(yaml.safe_dump({
            "dataset": {"kind": "csv", "path": str(csv_path)},
            "run": {"batch_size": 1, "output_dir": str(tmp_path / "o")},
        }))
        assert main(["run", "--config", str(cfg)]) == 1

    def test_runtime_failure(self, config, monkeypatch, capsys):
        import activecc.harness as harness

        def boom(cfg, seed=None, dataset=None):
            raise harness.RunError("solver failed in round 0")

        monkeypatch.setattr(harness, "run_active_cc", boom)
        assert main(["run", "--config", str(config)]) == 2
        assert "round 0" in capsys.readouterr().err

    def test_module_entry_point(self, config, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "activecc", "run", "--config", str(config)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert "final_ari" in proc.stdout
