import json
import shutil
import subprocess
import sys

import pytest

from weldlab import __version__
from weldlab.cli import main
from weldlab.diffeo import REFERENCE_SPEC


@pytest.fixture
def spec_file(tmp_path):
    path = tmp_path / "gamma.json"
    path.write_text(json.dumps(dict(REFERENCE_SPEC, M=1024)))
    return str(path)


@pytest.fixture
def identity_file(tmp_path):
    path = tmp_path / "identity.json"
    path.write_text(json.dumps({"kind": "identity"}))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_weld_report(spec_file, capsys):
    code, doc = run(["weld", "--gamma", spec_file, "--K", "32"], capsys)
    assert code == 0 and doc["pass"]
    assert doc["version"] == __version__ and doc["config"]["K"] == 32
    assert doc["result"]["values"]["boundary_residual"] < 1e-7


def test_report_is_deterministic(spec_file, tmp_path):
    a = tmp_path / "a.json"
    argv = ["pi", "--gamma", spec_file, "--K", "24", "--n", "1,2", "--report", str(a), "--force"]
    assert main(argv) == 0
    first = a.read_bytes()
    assert main(argv) == 0
    assert a.read_bytes() == first


def test_threads_do_not_change_results(spec_file, tmp_path, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["pi", "--gamma", spec_file, "--K", "24", "--report", str(a)]) == 0
    monkeypatch.setenv("WELDLAB_THREADS", "3")
    assert main(["pi", "--gamma", spec_file, "--K", "24", "--report", str(b)]) == 0
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    assert db["threads"] == 3
    assert da["result"] == db["result"]


def test_refuses_overwrite(spec_file, tmp_path):
    out = tmp_path / "r.json"
    assert main(["weld", "--gamma", spec_file, "--K", "32", "--report", str(out)]) == 0
    assert main(["weld", "--gamma", spec_file, "--K", "32", "--report", str(out)]) == 1
    assert main(["weld", "--gamma", spec_file, "--K", "32", "--report", str(out), "--force"]) == 0


def test_usage_errors(spec_file, tmp_path, capsys):
    assert main(["nonsense"]) == 1
    assert main(["weld", "--K", "16"]) == 1
    assert main(["weld", "--gamma", spec_file, "--K", "2"]) == 1
    assert main(["weld", "--gamma", spec_file, "--M", "1000"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["weld", "--gamma", str(bad)]) == 1
    capsys.readouterr()


def test_config_overrides_flags(spec_file, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"K": 40, "tolerances": {"index_rel": 1e-3}}))
    code, doc = run(["weld", "--gamma", spec_file, "--K", "32", "--config", str(cfg)], capsys)
    assert code == 0 and doc["config"]["K"] == 40
    assert doc["config"]["tolerances"]["index_rel"] == 1e-3
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["weld", "--gamma", spec_file, "--config", str(cfg)]) == 1


def test_numerical_failure_exit_code(spec_file, capsys):
    # an absurd identity tolerance turns passing residuals into failed checks
    code, doc = run(["pi", "--gamma", spec_file, "--K", "24", "--n", "1", "--tol", "1e-30"], capsys)
    assert code == 2 and doc["pass"] is False


def test_pair_file_round_trip(spec_file, tmp_path, capsys):
    pair = tmp_path / "pair.json"
    assert main(["weld", "--gamma", spec_file, "--K", "48", "--out", str(pair)]) == 0
    capsys.readouterr()
    code, doc = run(["faber", "--pair", str(pair), "--K", "24", "--n", "2", "--out", str(tmp_path / "mats"),
                     "--cross-check", "kernel"], capsys)
    assert code == 0, doc


def test_index_check_identity(identity_file, capsys):
    code, doc = run(["index-check", "--gamma", identity_file, "--K", "32", "--n", "2"], capsys)
    assert code == 0 and doc["pass"]


def test_appendix_check(spec_file, capsys):
    code, doc = run(["appendix-check", "--gamma", spec_file, "--K", "48", "--n", "2", "--trials", "10"], capsys)
    assert code == 0 and doc["pass"]


@pytest.mark.skipif(shutil.which("weldlab") is None, reason="console script not installed")
def test_console_script(identity_file):
    res = subprocess.run(["weldlab", "pi", "--gamma", identity_file, "--K", "16"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["command"] == "pi"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "weldlab.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
