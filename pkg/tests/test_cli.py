import json
import subprocess
import sys
import threading

import pytest
from click.testing import CliRunner

from fks import pipeline
from fks.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def write_example(tmp_path, name):
    path = tmp_path / f"{name.lower()}.fks"
    path.write_text(pipeline.example_document(name), encoding="utf-8")
    return str(path)


def test_examples_listing(runner):
    result = runner.invoke(main, ["examples"])
    assert result.exit_code == 0
    assert result.output.splitlines() == pipeline.example_names()


def test_examples_emit_byte_identical(runner):
    result = runner.invoke(main, ["examples", "HYPER3"])
    assert result.exit_code == 0
    assert result.output == pipeline.example_document("HYPER3")


def test_examples_unknown(runner):
    result = runner.invoke(main, ["examples", "WAT"])
    assert result.exit_code == 2


def test_classify_exit_codes(runner, tmp_path):
    assert runner.invoke(main, ["classify", write_example(tmp_path, "TORUS")]).exit_code == 0
    r = runner.invoke(main, ["classify", write_example(tmp_path, "HYPER2")])
    assert r.exit_code == 0
    assert r.output.strip() == "torus-quotient(order 2)"
    r = runner.invoke(main, ["classify", write_example(tmp_path, "KODAIRA")])
    assert r.exit_code == 1
    assert r.output.strip() == "rejected((d): extension class has infinite order)"


def test_classify_malformed_exits_2(runner, tmp_path):
    path = tmp_path / "bad.fks"
    path.write_text("format = fks-1\nm = 1\nn = 1\nA1 = [[1, 0], [0, 1]\n")
    result = runner.invoke(main, ["classify", str(path)])
    assert result.exit_code == 2
    assert "error:" in result.output or "error:" in (result.stderr or "")


def test_missing_file_exits_2(runner):
    result = runner.invoke(main, ["classify", "/nonexistent/nope.fks"])
    assert result.exit_code == 2


def test_validate_json_output(runner, tmp_path):
    result = runner.invoke(main, ["validate", write_example(tmp_path, "HYPER6")])
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["classification"] == "accepted"
    assert body["invariants"] is None


def test_build_json_to_stdout(runner, tmp_path):
    result = runner.invoke(main, ["build", write_example(tmp_path, "HYPER2")])
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["invariants"]["b1"] == 2
    assert body["certificates"]["splitting_vectors"] == [["0", "0"], ["1/2", "0"]]


def test_build_json_file_option(runner, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(
        main, ["build", write_example(tmp_path, "TORUS"), "--json", str(out)]
    )
    assert result.exit_code == 0
    assert result.output.strip() == "accepted"
    body = json.loads(out.read_text())
    assert body["classification"] == "accepted"


def test_build_rejected_with_json_option(runner, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(
        main, ["build", write_example(tmp_path, "KODAIRA"), "--json", str(out)]
    )
    assert result.exit_code == 1
    assert result.output.strip() == "rejected((d): extension class has infinite order)"


def test_build_seed_metric_file(runner, tmp_path):
    seed = tmp_path / "seed.mat"
    seed.write_text("[[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, 2]]\n")
    result = runner.invoke(
        main,
        ["build", write_example(tmp_path, "TORUS"), "--seed-metric", str(seed)],
    )
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["certificates"]["metric"]["P"][0][0] == "4"


def test_abelianize_output(runner, tmp_path):
    result = runner.invoke(main, ["abelianize", write_example(tmp_path, "HYPER2")])
    assert result.exit_code == 0
    assert result.output == "b1 = 2\ntorsion = [2]\n"


def test_closure_cap_env(runner, tmp_path, monkeypatch):
    monkeypatch.setenv("FKS_CLOSURE_CAP", "3")
    result = runner.invoke(main, ["classify", write_example(tmp_path, "HYPER6")])
    assert result.exit_code == 1
    assert "rejected((a)" in result.output


def test_console_script_pipeline(tmp_path):
    # the installed entry point works in a real shell pipeline
    proc = subprocess.run(
        [sys.executable, "-m", "fks.cli", "examples", "HYPER4"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    path = tmp_path / "h4.fks"
    path.write_text(proc.stdout)
    proc2 = subprocess.run(
        [sys.executable, "-m", "fks.cli", "classify", str(path)],
        capture_output=True,
        text=True,
    )
    assert proc2.returncode == 0
    assert proc2.stdout.strip() == "torus-quotient(order 4)"


def test_server_mode_round_trip(tmp_path):
    # run the real HTTP service on a local port and drive the CLI against it
    import uvicorn

    from fks.service import app

    config = uvicorn.Config(app, host="127.0.0.1", port=8731, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    import time

    for _ in range(100):
        if server.started:
            break
        time.sleep(0.05)
    assert server.started
    try:
        runner = CliRunner()
        base = ["--server", "http://127.0.0.1:8731"]
        result = runner.invoke(main, base + ["examples", "HYPER2"])
        assert result.exit_code == 0
        assert result.output == pipeline.example_document("HYPER2")
        path = tmp_path / "h2.fks"
        path.write_text(result.output)
        result = runner.invoke(main, base + ["classify", str(path)])
        assert result.exit_code == 0
        assert result.output.strip() == "torus-quotient(order 2)"
        result = runner.invoke(main, base + ["abelianize", str(path)])
        assert result.exit_code == 0
        assert result.output == "b1 = 2\ntorsion = [2]\n"
        bad = tmp_path / "bad.fks"
        bad.write_text("format = fks-1\nm = 1\n")
        result = runner.invoke(main, base + ["classify", str(bad)])
        assert result.exit_code == 2
    finally:
        server.should_exit = True
        thread.join(timeout=5)
