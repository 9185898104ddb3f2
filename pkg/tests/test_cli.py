"""End-to-end tests of the command line on a tiny configuration."""

import csv
import json
from pathlib import Path

import pytest
import yaml
from typer.testing import CliRunner

from nres.cli import app
from nres.training import load_checkpoint, read_checkpoint

runner = CliRunner()

TINY_RUN = {
    "model": {
        "n_layers": 2,
        "model_dim": 8,
        "n_heads": 2,
        "ffn_latent": 16,
        "max_seq_len": 16,
    },
    "pretrain": {
        "lr": 0.003,
        "warmup_steps": 1,
        "total_steps": 4,
        "batch_size": 4,
        "seq_len": 16,
        "p": 1.0,
        "eval_interval": 2,
        "eval_windows": 2,
    },
    "train": {
        "warmup_steps": 1,
        "total_steps": 3,
        "batch_size": 4,
        "seq_len": 16,
        "eval_interval": 3,
        "eval_windows": 2,
    },
    "data": {"n_tokens": 4000},
}


@pytest.fixture(scope="module")
def run_config(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("config") / "run.yaml"
    path.write_text(yaml.safe_dump(TINY_RUN))
    return path


@pytest.fixture(scope="module")
def backbone(tmp_path_factory, run_config) -> Path:
    out = tmp_path_factory.mktemp("backbone")
    result = runner.invoke(
        app, ["train-backbone", "--config", str(run_config), "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    return out / "model.ckpt"


def _extend(run_config: Path, backbone: Path, out: Path, *flags: str):
    return runner.invoke(
        app,
        [
            "extend",
            "--backbone",
            str(backbone),
            "--config",
            str(run_config),
            "--out",
            str(out),
            *flags,
        ],
    )


class TestUsageErrors:
    def test_missing_config(self, tmp_path):
        missing = tmp_path / "absent.yaml"
        result = runner.invoke(app, ["train-backbone", "--config", str(missing)])
        assert result.exit_code == 2
        assert "absent.yaml" in result.output

    def test_unknown_config_key(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"train": {"learning_rate": 1e-3}}))
        result = runner.invoke(app, ["train-backbone", "--config", str(path)])
        assert result.exit_code == 2
        assert "train.learning_rate" in result.output

    def test_negative_alpha(self, tmp_path):
        result = runner.invoke(
            app, ["extend", "-b", str(tmp_path / "x.ckpt"), "--alpha", "-1"]
        )
        assert result.exit_code == 2

    def test_ce_needs_sigmoid_gate(self, tmp_path):
        result = runner.invoke(
            app,
            [
                "extend",
                "-b",
                str(tmp_path / "x.ckpt"),
                "--preset",
                "neutral-residues",
                "--ce",
            ],
        )
        assert result.exit_code == 2
        assert "sigmoid" in result.output

    def test_unknown_preset(self, tmp_path):
        result = runner.invoke(
            app, ["extend", "-b", str(tmp_path / "x.ckpt"), "--preset", "mixture"]
        )
        assert result.exit_code == 2

    def test_preset_with_method(self, tmp_path):
        args = ["extend", "-b", str(tmp_path / "x.ckpt"), "--preset", "lora"]
        result = runner.invoke(app, [*args, "--method", "adapter"])
        assert result.exit_code == 2
        assert "--method" in result.output

    def test_missing_checkpoint(self, tmp_path):
        result = runner.invoke(app, ["eval", str(tmp_path / "missing.ckpt")])
        assert result.exit_code != 0
        assert "missing.ckpt" in result.output

    def test_version(self):
        result = runner.invoke(app, ["--version"])
        assert result.exit_code == 0
        assert "nres version" in result.output


class TestTrainBackbone:
    def test_outputs(self, backbone):
        run_dir = backbone.parent
        assert (run_dir / "run.json").is_file()
        lines = (run_dir / "metrics.jsonl").read_text().splitlines()
        assert [json.loads(line)["step"] for line in lines] == [2, 4]
        assert read_checkpoint(backbone).step == 4

    def test_same_seed_same_bytes(self, run_config, backbone, tmp_path):
        result = runner.invoke(
            app, ["train-backbone", "--config", str(run_config), "--out", str(tmp_path)]
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "model.ckpt").read_bytes() == backbone.read_bytes()

    def test_other_seed_differs(self, run_config, backbone, tmp_path):
        result = runner.invoke(
            app,
            [
                "train-backbone",
                "--config",
                str(run_config),
                "--out",
                str(tmp_path),
                "--seed",
                "9",
            ],
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "model.ckpt").read_bytes() != backbone.read_bytes()


class TestExtend:
    def test_preset_run(self, run_config, backbone, tmp_path):
        result = _extend(run_config, backbone, tmp_path, "--preset", "neutral-residues")
        assert result.exit_code == 0, result.output

        run = json.loads((tmp_path / "run.json").read_text())
        assert run["preset"] == "neutral-residues"
        assert run["extension"]["gate"] == "relu"
        assert run["model"] == TINY_RUN["model"] | {
            "vocab_size": 256,
            "activation": "silu",
            "norm_eps": 1e-5,
        }
        model = load_checkpoint(tmp_path / "model.ckpt")
        assert len(model.adapters) == 2

    def test_flags_spell_out_a_method(self, run_config, backbone, tmp_path):
        result = _extend(
            run_config,
            backbone,
            tmp_path,
            "--method",
            "adapter",
            "--gate",
            "sigmoid",
            "--ce",
            "--alpha",
            "0.5",
            "--p",
            "0.3",
            "--lr",
            "0.001",
        )
        assert result.exit_code == 0, result.output
        run = json.loads((tmp_path / "run.json").read_text())
        assert run["extension"]["use_ce_loss"] is True
        assert run["extension"]["alpha"] == 0.5
        assert run["train"]["p"] == 0.3
        assert run["train"]["lr"] == 0.001

    def test_eval_and_spectra(self, run_config, backbone, tmp_path):
        ext = tmp_path / "ext"
        result = _extend(run_config, backbone, ext, "--preset", "lora", "--steps", "0")
        assert result.exit_code == 0, result.output
        assert (ext / "metrics.jsonl").read_text() == ""

        checkpoint = str(ext / "model.ckpt")
        result = runner.invoke(
            app,
            [
                "eval",
                checkpoint,
                "--config",
                str(run_config),
                "--max-windows",
                "2",
                "--out",
                str(ext),
                "--format",
                "json",
            ],
        )
        assert result.exit_code == 0, result.output
        report = json.loads((ext / "eval.json").read_text())
        assert report["nll_old"] > 0.0
        assert report["ppl_new"] > 1.0

        result = runner.invoke(app, ["spectra", checkpoint, "--out", str(ext)])
        assert result.exit_code == 0, result.output
        with (ext / "spectra.csv").open() as f:
            rows = list(csv.DictReader(f))
        assert {row["owner"] for row in rows} == {"backbone"}
        assert {row["layer"] for row in rows} == {"0", "1"}


class TestSweep:
    def test_grid(self, run_config, backbone, tmp_path):
        base = yaml.safe_load(run_config.read_text())
        grid = {
            "base": base,
            "method": ["lora", "neutral-residues"],
            "lr": [1e-4, 3e-4, 1e-3, 3e-3],
        }
        grid_path = tmp_path / "grid.yaml"
        grid_path.write_text(yaml.safe_dump(grid))
        out = tmp_path / "sweep"
        result = runner.invoke(
            app,
            [
                "sweep",
                "--grid",
                str(grid_path),
                "--backbone",
                str(backbone),
                "--out",
                str(out),
                "--workers",
                "1",
            ],
        )
        assert result.exit_code == 0, result.output
        with (out / "tradeoff.csv").open() as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 8
        methods = [row["method"] for row in rows]
        assert methods == ["lora"] * 4 + ["neutral-residues"] * 4
        lrs = [float(row["lr"]) for row in rows[:4]]
        assert lrs == sorted(lrs)
        assert len(list((out / "runs").iterdir())) == 8

    def test_missing_backbone(self, tmp_path):
        grid_path = tmp_path / "grid.json"
        grid_path.write_text(json.dumps({"method": ["lora"]}))
        result = runner.invoke(
            app,
            ["sweep", "-g", str(grid_path), "-b", str(tmp_path / "none.ckpt")],
        )
        assert result.exit_code != 0
