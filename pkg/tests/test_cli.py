import json
import subprocess
import sys

import pytest

from coprime_adic.cli import load_cache, main


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    path = tmp_path / "cache.jsonl"
    monkeypatch.setenv("ADIC_CACHE", str(path))
    return path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_psi_verified(capsys):
    code, out, _ = run(capsys, "psi", "3", "2")
    rec = json.loads(out)
    assert code == 0 and rec["psi"] == 3 and rec["status"] == "verified"
    code, out, _ = run(capsys, "psi", "11", "3")
    assert json.loads(out)["psi"] == 121


def test_psi_role_swap_hint(capsys):
    code, _, err = run(capsys, "psi", "2", "3")
    assert code == 64 and "psi 3 2" in err
    code, _, err = run(capsys, "psi", "6", "4")
    assert code == 64 and "coprime" in err


def test_psi_inconclusive_exit(capsys, monkeypatch):
    from coprime_adic import stability

    monkeypatch.setattr(stability, "ELL_CAP", 2)
    real = stability.compute_psi
    monkeypatch.setattr(stability, "compute_psi", lambda pair, **kw: real(pair, ell_cap=2, **kw))
    code, out, _ = run(capsys, "psi", "30", "17")
    assert code == 2 and json.loads(out)["status"] == "inconclusive"


def test_usage_errors_exit_64(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["psi", "three", "2"])
    assert exc.value.code == 64


def test_witness(capsys):
    code, out, _ = run(capsys, "witness", "3", "2", "2", "4", "1")
    (w,) = json.loads(out)
    assert code == 0 and (w["t2"], w["j"]) == (2, 7)
    code, out, _ = run(capsys, "witness", "3", "2", "2", "7", "3")
    assert [w["t2"] for w in json.loads(out)] == [1, 4, 7]


def test_witness_bad_k(capsys):
    code, _, err = run(capsys, "witness", "3", "2", "2", "5", "1")
    assert code == 65 and "nearest valid k is 4" in err


def test_witness_threshold(capsys):
    code, _, err = run(capsys, "witness", "3", "2", "1", "1")
    assert code == 64 and "threshold" in err
    code, out, _ = run(capsys, "witness", "3", "2", "1", "1", "2", "--allow-below-threshold")
    assert code == 0 and len(json.loads(out)) == 2


EXPECTED_SWEEP_6 = """m,n,t_mn,L,gamma,psi,congruence_ok,stability_ok
3,2,1,0,3,3,true,true
4,3,1,0,2,8,true,true
5,2,1,0,5,5,true,true
5,3,1,0,5,5,true,true
5,4,1,0,5,5,true,true
6,5,1,1,3/2,24,true,true
"""


def test_sweep_rows(capsys, isolated_cache):
    code, out, _ = run(capsys, "sweep", "6")
    assert code == 0 and out == EXPECTED_SWEEP_6
    assert set(load_cache(isolated_cache)) == {(3, 2), (4, 3), (5, 2), (5, 3), (5, 4), (6, 5)}


def test_sweep_warm_cache_identical(capsys, isolated_cache):
    _, cold, _ = run(capsys, "sweep", "8")
    size = isolated_cache.stat().st_size
    _, warm, _ = run(capsys, "sweep", "8")
    assert warm == cold
    assert isolated_cache.stat().st_size == size


def test_sweep_skips_corrupt_cache_lines(capsys, isolated_cache, caplog):
    run(capsys, "sweep", "6")
    with isolated_cache.open("a") as fh:
        fh.write("{not json\n")
        fh.write('{"m": 7, "n": 2, "t_mn": 1, "L": 0, "gamma": "7", "psi": 99, "verified_t_lo": 2, "verified_t_hi": 6}\n')
    code, out, _ = run(capsys, "sweep", "6")
    assert code == 0 and out == EXPECTED_SWEEP_6
    assert "corrupt cache line" in caplog.text


def test_sweep_unwritable_cache(capsys, tmp_path, caplog):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, out, _ = run(capsys, "sweep", "6", "--cache", str(blocker / "sub" / "c.jsonl"))
    assert code == 0 and out == EXPECTED_SWEEP_6
    assert "not writable" in caplog.text


def test_sweep_parallel_matches_serial(capsys):
    _, serial, _ = run(capsys, "sweep", "10", "--no-cache")
    _, parallel, _ = run(capsys, "sweep", "10", "--no-cache", "--parallel")
    assert serial == parallel


def test_sweep_validation(capsys):
    code, _, _ = run(capsys, "sweep", "6", "--n-max", "6")
    assert code == 64
    code, _, _ = run(capsys, "sweep", "6", "--t-window", "2")
    assert code == 64


def test_analyze_constant(capsys, tmp_path):
    path = tmp_path / "w.json"
    path.write_text('{"breakpoints": ["0", "1"], "values": ["5/3"]}')
    code, out, _ = run(capsys, "analyze", str(path), "--g-max", "3")
    reports = json.loads(out)["reports"]
    assert code == 0 and len(reports) == 5
    for rep in reports:
        assert rep["exact_value"] == ("0" if rep["class_tag"] == "BMO" else "1")


def test_analyze_halves_a1(capsys, tmp_path):
    path = tmp_path / "w.json"
    path.write_text('{"breakpoints": ["0", "1/2", "1"], "values": ["4", "1"]}')
    code, out, _ = run(capsys, "analyze", str(path), "--class", "a1", "--g-max", "1")
    (rep,) = json.loads(out)["reports"]
    assert rep["value"] == "2.5" and rep["exact_value"] == "5/2"
    code, out, _ = run(capsys, "analyze", str(path), "--class", "ar", "--r", "3/2", "--precision", "30")
    (rep,) = json.loads(out)["reports"]
    assert rep["precision"] == 30 and rep["r"] == "3/2" and rep["exact_value"] is None


def test_analyze_module_bmo(capsys):
    code, out, _ = run(capsys, "analyze", "--module", "1/2", "2", "2", "2", "--class", "bmo")
    data = json.loads(out)
    assert code == 0
    assert float(data["module"]["relative_delta"]["osc_full"]) < 1e-12
    assert float(data["module"]["relative_delta"]["avg_f"]) < 1e-12
    assert data["module"]["closed_forms"]["osc_full"]["exact"] == "2*log(2)"


def test_analyze_malformed(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"breakpoints": ["0", "1"],\n  "values": [}\n')
    code, _, err = run(capsys, "analyze", str(path))
    assert code == 66 and "line 2" in err
    code, _, _ = run(capsys, "analyze", str(tmp_path / "missing.json"))
    assert code == 66


def test_console_script_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "coprime_adic", "psi", "4", "3"], capture_output=True, text=True
    )
    assert out.returncode == 0 and json.loads(out.stdout)["psi"] == 8
