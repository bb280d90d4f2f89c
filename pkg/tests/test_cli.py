import json

import pytest

from calibkit import suites
from calibkit.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def strip_volatile(report):
    report = dict(report)
    report.pop("timestamp")
    report["checks"] = [{k: v for k, v in ch.items() if k != "runtime_ms"} for ch in report["checks"]]
    return report


def test_verify_json_shape(capsys):
    code, out, _ = run(["verify", "--suite", "su3", "--format", "json"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["suite"] == "su3" and rep["status"] == "pass"
    assert {"version", "timestamp", "checks", "notes"} <= set(rep)
    assert all(set(ch) == {"id", "anchor", "status", "expected", "observed", "seed", "runtime_ms"}
               for ch in rep["checks"])


def test_verify_table_lists_checks(capsys):
    code, out, _ = run(["verify", "--suite", "g2"], capsys)
    assert code == 0
    line = next(ln for ln in out.splitlines() if ln.startswith("g2.cartan.sum "))
    assert "PASS" in line and "49" in line
    assert "suite g2: pass" in out


def test_failing_check_gives_exit_one(capsys, monkeypatch):
    monkeypatch.setattr(suites, "SU3_STAR_CARTAN_SUM", 37)
    code, out, _ = run(["verify", "--suite", "su3"], capsys)
    assert code == 1
    assert "FAIL" in out and "suite su3: fail" in out


def test_unknown_suite_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "bogus"])
    assert exc.value.code == 2


def test_unknown_catalog_key_is_usage_error(capsys):
    code, _, err = run(["dump", "--name", "bogus"], capsys)
    assert code == 2 and "bogus" in err


def test_verify_is_deterministic(capsys):
    reports = []
    for _ in range(2):
        code, out, _ = run(["verify", "--suite", "models", "--format", "json", "--seed", "3"], capsys)
        assert code == 0
        reports.append(strip_volatile(json.loads(out)))
    assert json.dumps(reports[0]) == json.dumps(reports[1])


def test_seed_falls_back_to_environment(capsys, monkeypatch):
    monkeypatch.setenv("CALIBKIT_SEED", "7")
    _, out, _ = run(["verify", "--suite", "models", "--format", "json"], capsys)
    seeds = {ch["seed"] for ch in json.loads(out)["checks"]} - {None}
    assert seeds == {7}
    monkeypatch.setenv("CALIBKIT_SEED", "x")
    code, _, _ = run(["verify", "--suite", "models"], capsys)
    assert code == 2


def test_verify_writes_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run(["verify", "--suite", "models", "--format", "json", "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["suite"] == "models"


def test_dump_prints_form_json(capsys):
    code, out, _ = run(["dump", "--name", "phi0"], capsys)
    obj = json.loads(out)
    assert code == 0 and obj["dim"] == 7 and obj["degree"] == 3


def test_stab_and_polar(capsys):
    code, out, _ = run(["stab", "--system", "g2", "--json"], capsys)
    obj = json.loads(out)
    assert code == 0 and obj["dim"] == 14
    code, out, _ = run(["polar", "--system", "su3", "--json"], capsys)
    assert code == 0 and json.loads(out)["cartan_sum"] == 42


def test_restrain(capsys):
    code, out, _ = run(["restrain", "--system", "su3", "--json"], capsys)
    assert code == 0 and json.loads(out)["ok"] is True


def test_comass_command(capsys):
    argv = ["comass", "--form", "omega0(3)", "--samples", "5", "--iters", "100", "--seed", "2", "--json"]
    code, out, _ = run(argv, capsys)
    obj = json.loads(out)
    assert code == 0 and abs(obj["estimate"] - 1) < 1e-9 and obj["seed"] == 2
    code, _, _ = run(["comass", "--form", "omega0(3)", "--p", "3"], capsys)
    assert code == 2


def test_plane_commands(capsys):
    sl = json.dumps({"n": 6, "vectors": [[1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0]],
                     "orientation": 1})
    code, out, _ = run(["plane", "--check", "sl", "--frame", sl], capsys)
    obj = json.loads(out)
    assert code == 0 and obj["is_special"] and obj["phase"] == [1.0, 0.0]
    co = json.dumps({"n": 7, "vectors": [[int(i == j) for j in range(7)] for i in range(4)],
                     "orientation": 1})
    code, out, _ = run(["plane", "--check", "coassoc", "--frame", co], capsys)
    assert code == 0 and json.loads(out)["rank"] == 3
    bad = json.dumps({"n": 7, "vectors": [[int(i == j) for j in range(7)] for i in (0, 1, 2, 4)],
                      "orientation": 1})
    code, out, _ = run(["plane", "--check", "coassoc", "--frame", bad], capsys)
    assert code == 1 and json.loads(out)["is_coassociative"] is False


def test_sdtriple_and_g2build(tmp_path, capsys):
    from calibkit.models import SDTriple
    path = tmp_path / "triple.json"
    path.write_text(json.dumps(SDTriple.standard().to_json()))
    code, out, _ = run(["sdtriple", "--input", str(path)], capsys)
    obj = json.loads(out)
    assert code == 0 and obj["residuals"] == [0.0, 0.0, 0.0]
    code, out, _ = run(["g2build", "--input", str(path)], capsys)
    assert code == 0 and "phibar" in json.loads(out)


def test_torus_command(capsys):
    code, out, _ = run(["torus", "--g", "[[2, 1, 0], [1, 2, 0], [0, 0, 3]]"], capsys)
    obj = json.loads(out)
    assert code == 0 and obj["exact"] and obj["roundtrip_error"] == 0
    code, _, err = run(["torus", "--g", "[[1, 0], [0, 1]]"], capsys)
    assert code == 1 and "m < 3" in err
