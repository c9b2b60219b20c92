import csv
import hashlib
import io

import pytest

from atpboost.cli import cmd_validate, main
from atpboost import config as cfgmod
from atpboost.report import read_report
from atpboost.errors import InputError


@pytest.fixture
def world(tmp_path):
    d = tmp_path / "syn"
    args = ["gen-synthetic", str(d), "--premises", "120", "--theorems", "40", "--topics", "5",
            "--base-lemmas", "5", "--max-axioms", "16"]
    assert main(args) == 0
    return d


def run_args(world, *extra):
    return ["run", "-c", str(world / "synthetic.cfg"), "--numberOfTrees", "10", "--maxDepth", "4",
            "--max_rounds", "2", *extra]


def test_validate_clean(world, capsys):
    assert main(["validate", "-c", str(world / "synthetic.cfg")]) == 0
    out = capsys.readouterr().out
    assert "violations: 0" in out and "premises: 120" in out


def test_validate_reports_violations(world):
    (world / "order.txt").write_text((world / "order.txt").read_text() + "ghost\n")
    oracle = (world / "oracle.txt").read_text().splitlines()
    t = oracle[0].split(":")[0]
    (world / "oracle.txt").write_text("\n".join(oracle + [f"{t}: ghost2"]) + "\n")
    buf = io.StringIO()
    cfg = cfgmod.load_config(world / "synthetic.cfg")
    assert cmd_validate(cfg, world, buf) == 2
    text = buf.getvalue()
    assert "ghost" in text and "violations: 0" not in text


def test_run_outputs_and_manifest(world):
    assert main(run_args(world, "--method", "short,knn")) == 0
    out = world / "run"
    rows = read_report(out)
    assert {r["method"] for r in rows} == {"short", "knn"}
    assert (out / "rankings.short.txt").is_file() and (out / "model.short.txt").is_file()
    assert (out / "proved_names" / "short" / "round_00.txt").is_file()
    manifest = (out / "manifest.txt").read_text()
    digest = hashlib.sha256((world / "statements.p").read_bytes()).hexdigest()
    assert f"# sha256 statements {digest}" in manifest
    assert str((world / "statements.p").resolve()) in manifest
    assert not (out / "PARTIAL").exists()
    assert main(["report", str(out)]) == 0
    assert (out / "progress.png").stat().st_size > 0
    with open(out / "series.csv") as fh:
        assert next(csv.reader(fh)) == ["method", "round", "metric", "value"]


def test_sweep(world):
    assert main(run_args(world, "--sweep", "ratio:1,4", "--max_rounds", "1")) == 0
    with open(world / "run" / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["value"] for r in rows] == ["1", "4"]
    assert main(["report", str(world / "run")]) == 0
    assert (world / "run" / "sweep.png").is_file()


def test_exit_codes(world, tmp_path):
    assert main([]) == 1
    assert main(["run", "--no-such-flag"]) == 1
    assert main(["run", "-c", str(world / "synthetic.cfg"), "--ratio", "zero"]) == 2
    assert main(["run", "-c", str(tmp_path / "missing.cfg")]) == 2
    assert main(["report", str(tmp_path / "nowhere")]) == 2
    (world / "statements.p").write_text("fof(broken")
    assert main(["validate", "-c", str(world / "synthetic.cfg")]) == 2


def test_partial_marker_blocks_report(world):
    assert main(run_args(world, "--max_rounds", "0")) == 0
    (world / "run" / "PARTIAL").write_text("x")
    with pytest.raises(InputError):
        read_report(world / "run")
    assert main(["report", str(world / "run")]) == 2


def test_runtime_failure_leaves_marker(world, monkeypatch):
    import atpboost.cli as cli

    def boom(*a, **k):
        raise RuntimeError("prover crashed")

    monkeypatch.setattr(cli, "run", boom)
    assert main(run_args(world)) == 3
    assert (world / "run" / "PARTIAL").exists()
