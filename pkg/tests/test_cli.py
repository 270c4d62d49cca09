import json

import numpy as np
import pytest
from click.testing import CliRunner

from noisyboson import __version__
from noisyboson.cli import cli
from noisyboson.fileio import read_jsonl, read_meta, read_table_csv

runner = CliRunner()


def run(*args):
    return runner.invoke(cli, list(args), catch_exceptions=False)


def test_distribution_writes_ten_row_csv(tmp_path):
    out = tmp_path / "run"
    result = run("distribution", "--model", "ideal", "--n", "2", "--m", "4",
                 "--seed", "1", "--out", str(out))
    assert result.exit_code == 0
    lines = (out / "distribution.csv").read_text().splitlines()
    assert lines[0] == "m_1,m_2,m_3,m_4,probability"
    assert len(lines) == 11  # header + C(5,2) rows
    meta = read_meta(out / "distribution.meta.json")
    assert meta["version"] == __version__
    assert meta["seed"] == 1
    assert len(meta["config_hash"]) == 64


def test_zero_noise_file_identical_to_ideal(tmp_path):
    a, b = tmp_path / "ideal", tmp_path / "eps0"
    assert run("distribution", "--model", "ideal", "--n", "2", "--m", "4",
               "--seed", "1", "--out", str(a)).exit_code == 0
    assert run("distribution", "--model", "noisy_eq9", "--epsilon", "0",
               "--n", "2", "--m", "4", "--seed", "1",
               "--out", str(b)).exit_code == 0
    assert (a / "distribution.csv").read_bytes() == \
        (b / "distribution.csv").read_bytes()


def test_rerun_is_bit_identical(tmp_path):
    a, b = tmp_path / "r1", tmp_path / "r2"
    args = ("sample", "--n", "2", "--m", "5", "--epsilon", "0.3",
            "--sampler", "compositional", "--model", "noisy_eq9",
            "--draws", "500", "--seed", "7", "--records")
    assert run(*args, "--out", str(a)).exit_code == 0
    assert run(*args, "--out", str(b)).exit_code == 0
    for name in ("samples.csv", "records.jsonl", "samples.meta.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_sample_records_stream(tmp_path):
    out = tmp_path / "s"
    result = run("sample", "--n", "2", "--m", "5", "--epsilon", "0.4",
                 "--sampler", "compositional", "--model", "noisy_eq9",
                 "--draws", "50", "--seed", "3", "--records",
                 "--out", str(out))
    assert result.exit_code == 0
    rows = read_jsonl(out / "records.jsonl")
    assert len(rows) == 50
    assert set(rows[0]) == {"m", "n_quantum", "stream"}
    assert rows[0]["stream"] == "3/sample/0"
    assert sum(rows[0]["m"]) == 2


def test_sample_realizations_writes_stats_table(tmp_path):
    out = tmp_path / "rz"
    result = run("sample", "--n", "1", "--m", "12", "--epsilon", "0.2",
                 "--sampler", "realizations", "--realizations", "30",
                 "--seed", "2", "--out", str(out))
    assert result.exit_code == 0
    _, cols = read_table_csv(out / "realizations.csv")
    assert set(cols) == {"mean", "stderr"}
    assert len(cols["mean"]) == 12


def test_verify_pass_and_report(tmp_path):
    out = tmp_path / "v"
    result = run("verify", "--n", "2", "--m", "5", "--epsilon", "0.4",
                 "--seed", "3", "--out", str(out))
    assert result.exit_code == 0
    assert result.output.count("PASS") == 5
    report = json.loads((out / "verify.json").read_text())
    assert report["all_passed"] is True
    assert report["meta"]["seed"] == 3
    assert {c["check"] for c in report["checks"]} >= {"j_path_equivalence",
                                                      "normalization"}


def test_verify_corrupt_j_exits_one(tmp_path):
    out = tmp_path / "vbad"
    result = run("verify", "--n", "2", "--m", "5", "--epsilon", "0.4",
                 "--seed", "3", "--corrupt-j", "--out", str(out))
    assert result.exit_code == 1
    assert "FAIL j_path_equivalence" in result.output
    report = json.loads((out / "verify.json").read_text())
    assert report["all_passed"] is False


def test_verify_guard_exits_two(tmp_path):
    result = run("verify", "--n", "9", "--m", "12", "--epsilon", "0.4",
                 "--seed", "3", "--out", str(tmp_path / "vg"))
    assert result.exit_code == 2
    assert "N <= 6" in result.output


def test_bounds_not_applicable_rows_exit_zero(tmp_path):
    out = tmp_path / "b"
    result = run("bounds", "--n", "4", "--epsilon", "0", "--r", "2",
                 "--seed", "1", "--out", str(out))
    assert result.exit_code == 0
    rows = read_jsonl(out / "bounds.jsonl")
    by_name = {r["bound_name"]: r for r in rows}
    assert by_name["average_tvd"]["satisfied"] == "not_applicable"
    assert by_name["average_tvd"]["value"] is None
    assert by_name["click_tail"]["value"] == 0.0
    assert (out / "bounds.meta.json").exists()


def test_bounds_click_tail_value(tmp_path):
    out = tmp_path / "b2"
    result = run("bounds", "--n", "4", "--epsilon", "0.2", "--r", "2",
                 "--seed", "1", "--out", str(out))
    assert result.exit_code == 0
    rows = {r["bound_name"]: r for r in read_jsonl(out / "bounds.jsonl")}
    assert rows["click_tail"]["value"] == pytest.approx(0.1808, abs=1e-12)


def test_sweep_constant_sufficient_order_column(tmp_path):
    out = tmp_path / "sw"
    result = run("sweep", "--param", "n", "--values", "10,20,40,80",
                 "--eps-over-n", "2.0", "--seed", "1", "--out", str(out))
    assert result.exit_code == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    header = lines[0].split(",")
    col = header.index("sufficient_click_order")
    values = {ln.split(",")[col] for ln in lines[1:]}
    assert values == {"7.0"}


def test_sweep_requires_param_and_values(tmp_path):
    result = run("sweep", "--seed", "1", "--out", str(tmp_path / "x"))
    assert result.exit_code == 2


def test_config_file_route_matches_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("command = distribution\nN = 2\nM = 4\n"
                   "model = ideal\nseed = 1\n")
    a, b = tmp_path / "via_cfg", tmp_path / "via_flags"
    assert run("distribution", "--config", str(cfg),
               "--out", str(a)).exit_code == 0
    assert run("distribution", "--n", "2", "--m", "4", "--model", "ideal",
               "--seed", "1", "--out", str(b)).exit_code == 0
    assert (a / "distribution.csv").read_bytes() == \
        (b / "distribution.csv").read_bytes()


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("command = distribution\nN = 2\nM = 4\n"
                   "model = ideal\nseed = 1\n")
    out = tmp_path / "o"
    assert run("distribution", "--config", str(cfg), "--m", "5",
               "--out", str(out)).exit_code == 0
    configs, _ = read_table_csv(out / "distribution.csv")
    assert configs.shape == (15, 5)  # C(6,2) over five modes


def test_malformed_config_exits_two(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("command = distribution\nN = two\nseed = 1\n")
    result = run("distribution", "--config", str(bad),
                 "--out", str(tmp_path / "x"))
    assert result.exit_code == 2
    bad.write_text("bogus_key = 3\n")
    assert run("distribution", "--config", str(bad),
               "--out", str(tmp_path / "y")).exit_code == 2


def test_missing_seed_exits_two(tmp_path):
    result = run("distribution", "--n", "2", "--m", "4", "--model", "ideal",
                 "--out", str(tmp_path / "x"))
    assert result.exit_code == 2
    assert "seed" in result.output


def test_table_guard_exits_two(tmp_path):
    result = run("distribution", "--n", "9", "--m", "12",
                 "--model", "noisy_eq9", "--epsilon", "0.2", "--seed", "1",
                 "--out", str(tmp_path / "x"))
    assert result.exit_code == 2


def test_matrix_file_input(tmp_path):
    from noisyboson.fileio import write_matrix_csv
    from noisyboson.linalg import fourier_unitary

    mat = tmp_path / "u.csv"
    write_matrix_csv(mat, fourier_unitary(4))
    out = tmp_path / "o"
    result = run("distribution", "--n", "2", "--m", "4", "--model", "ideal",
                 "--seed", "1", "--matrix", str(mat), "--out", str(out))
    assert result.exit_code == 0
    configs, cols = read_table_csv(out / "distribution.csv")
    assert np.isclose(cols["probability"].sum(), 1.0)
    # two bosons fed into the first ports of the uniform coupler never
    # land one apiece on ports differing by half the mode count
    idx = [i for i, row in enumerate(configs)
           if row[0] == 1 and row[2] == 1]
    assert cols["probability"][idx[0]] < 1e-12
