import csv
import json

import pytest
import yaml
from click.testing import CliRunner

from glcc.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def _write_yaml(path, cfg):
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


BENCH_CFG = {
    "field_q": 2**27 - 39,
    "program": {"name": "square_map"},
    "N": 10,
    "M": 4,
    "T": 1,
    "A": 0,
    "straggler": {"kind": "exponential", "rate": 2.0},
    "rounds": 5,
    "seed": 1,
    "variants": [
        {"name": "g2l1", "G": 2, "L": 1},
        {"name": "g1l2", "G": 1, "L": 2},
    ],
}

TRAIN_CFG = {
    "field_q": 2**61 - 1,
    "N": 15,
    "M": 2,
    "T": 1,
    "A": 0,
    "G": 1,
    "L": 1,
    "quant": {"data_bits": 4, "weight_bits": 6},
    "learning_rate": 0.1,
    "iterations": 3,
    "seed": 3,
    "synthetic": {"models": 2, "samples": 20, "features": 3},
}


def test_demo_succeeds_and_reports_threshold(runner):
    result = runner.invoke(main, ["demo"])
    assert result.exit_code == 0, result.output
    assert "K=7" in result.output
    assert "FAIL" not in result.output


def test_demo_fixed_inputs_prints_squares(runner):
    result = runner.invoke(main, ["demo", "--inputs", "1,2,3,4"])
    assert result.exit_code == 0
    assert "recovered phi(X) = [1, 4, 9, 16]" in result.output


def test_demo_rejects_bad_inputs(runner):
    assert runner.invoke(main, ["demo", "--inputs", "1,2"]).exit_code == 2
    assert runner.invoke(main, ["demo", "--inputs", "a,b,c,d"]).exit_code == 2
    assert runner.invoke(main, ["demo", "--q", "15"]).exit_code == 2


def test_verify_requires_suites(runner):
    assert runner.invoke(main, ["verify"]).exit_code == 2
    assert runner.invoke(main, ["verify", "nonsense"]).exit_code == 2


def test_verify_field_suite_json(runner, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(main, ["verify", "field", "--json", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert set(report) == {"field"}
    assert all(report["field"].values())


def test_bench_writes_artifacts(runner, tmp_path):
    cfg_path = _write_yaml(tmp_path / "bench.yaml", BENCH_CFG)
    out = tmp_path / "out"
    result = runner.invoke(main, ["bench", "--config", cfg_path, "--output", str(out)])
    assert result.exit_code == 0, result.output
    with open(out / "rounds.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 5  # two variants, five rounds
    assert {r["config"] for r in rows} == {"g2l1", "g1l2"}
    assert all(r["success"] == "1" for r in rows)
    summary = json.loads((out / "summary.json").read_text())
    assert [c["name"] for c in summary["configs"]] == ["g2l1", "g1l2"]
    for c in summary["configs"]:
        assert c["success_rate"] == 1.0
    png = (out / "latency.png").read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_bench_streaming_mode(runner, tmp_path):
    cfg_path = _write_yaml(tmp_path / "bench.yaml", BENCH_CFG)
    out = tmp_path / "out"
    result = runner.invoke(
        main, ["bench", "--config", cfg_path, "--output", str(out), "--mode", "streaming"]
    )
    assert result.exit_code == 0, result.output
    summary = json.loads((out / "summary.json").read_text())
    assert summary["mode"] == "streaming"
    assert all(c["success_rate"] == 1.0 for c in summary["configs"])


def test_bench_reruns_are_byte_identical(runner, tmp_path):
    cfg_path = _write_yaml(tmp_path / "bench.yaml", BENCH_CFG)
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert runner.invoke(
            main, ["bench", "--config", cfg_path, "--output", str(out)]
        ).exit_code == 0
        outputs.append((
            (out / "rounds.csv").read_bytes(),
            (out / "summary.json").read_bytes(),
        ))
    assert outputs[0] == outputs[1]


def test_bench_rejects_invalid_config(runner, tmp_path):
    bad = dict(BENCH_CFG, M=5, variants=[{"name": "x", "G": 2, "L": 1}])  # 2 does not divide 5
    cfg_path = _write_yaml(tmp_path / "bad.yaml", bad)
    result = runner.invoke(main, ["bench", "--config", cfg_path])
    assert result.exit_code == 2
    assert "divide" in result.output


def test_bench_missing_config_file(runner, tmp_path):
    result = runner.invoke(main, ["bench", "--config", str(tmp_path / "absent.yaml")])
    assert result.exit_code == 2


def test_bench_rejects_missing_key(runner, tmp_path):
    bad = {k: v for k, v in BENCH_CFG.items() if k != "field_q"}
    cfg_path = _write_yaml(tmp_path / "bad.yaml", bad)
    result = runner.invoke(main, ["bench", "--config", cfg_path])
    assert result.exit_code == 2
    assert "field_q" in result.output


def test_train_writes_artifacts(runner, tmp_path):
    cfg_path = _write_yaml(tmp_path / "train.yaml", TRAIN_CFG)
    out = tmp_path / "out"
    result = runner.invoke(main, ["train", "--config", cfg_path, "--output", str(out)])
    assert result.exit_code == 0, result.output
    with open(out / "history.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert [r["iteration"] for r in rows] == ["0", "1", "2"]
    weights = json.loads((out / "weights.json").read_text())
    assert len(weights["weights"]) == 2
    assert len(weights["weights"][0]) == 3
    assert (out / "curves.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_train_plaintext_reference_matches_coded(runner, tmp_path):
    cfg_path = _write_yaml(tmp_path / "train.yaml", TRAIN_CFG)
    coded_out, plain_out = tmp_path / "coded", tmp_path / "plain"
    assert runner.invoke(
        main, ["train", "--config", cfg_path, "--output", str(coded_out)]
    ).exit_code == 0
    assert runner.invoke(
        main, ["train", "--config", cfg_path, "--output", str(plain_out), "--plaintext"]
    ).exit_code == 0
    assert (coded_out / "history.csv").read_bytes() == (plain_out / "history.csv").read_bytes()
    assert (coded_out / "weights.json").read_bytes() == (plain_out / "weights.json").read_bytes()


def test_train_from_csv_datasets(runner, tmp_path):
    data = "f0,f1,f2,label\n" + "\n".join(
        f"{0.1 * i % 1:.3f},{-0.05 * i % 1:.3f},{0.3},{i % 2}" for i in range(12)
    )
    paths = []
    for name in ("a.csv", "b.csv"):
        p = tmp_path / name
        p.write_text(data + "\n")
        paths.append(str(p))
    cfg = {k: v for k, v in TRAIN_CFG.items() if k != "synthetic"}
    cfg_path = _write_yaml(tmp_path / "train.yaml", cfg)
    out = tmp_path / "out"
    result = runner.invoke(
        main,
        ["train", "--config", cfg_path, "--output", str(out)]
        + [arg for p in paths for arg in ("--dataset", p)],
    )
    assert result.exit_code == 0, result.output
    assert (out / "history.csv").exists()


def test_train_overflow_is_a_config_error(runner, tmp_path):
    cfg = dict(TRAIN_CFG, quant={"data_bits": 12, "weight_bits": 12})
    cfg_path = _write_yaml(tmp_path / "train.yaml", cfg)
    result = runner.invoke(main, ["train", "--config", cfg_path])
    assert result.exit_code == 2
    assert "overflow" in result.output


def test_train_requires_data_source(runner, tmp_path):
    cfg = {k: v for k, v in TRAIN_CFG.items() if k != "synthetic"}
    cfg_path = _write_yaml(tmp_path / "train.yaml", cfg)
    result = runner.invoke(main, ["train", "--config", cfg_path])
    assert result.exit_code == 2
    assert "datasets" in result.output


def test_seed_flag_overrides_config(runner, tmp_path):
    cfg_path = _write_yaml(tmp_path / "train.yaml", TRAIN_CFG)
    out1, out2 = tmp_path / "s3", tmp_path / "s4"
    assert runner.invoke(
        main, ["train", "--config", cfg_path, "--output", str(out1), "--seed", "3"]
    ).exit_code == 0
    assert runner.invoke(
        main, ["train", "--config", cfg_path, "--output", str(out2), "--seed", "4"]
    ).exit_code == 0
    assert (out1 / "weights.json").read_bytes() != (out2 / "weights.json").read_bytes()
