import json

import pytest

from levydiff import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_constants_drifted_brownian(capsys):
    code, out, _ = run(capsys, "constants", "--potential", "drifted_brownian:delta=3")
    assert code == 0
    lines = dict(line.split(None, 1) if " " in line else (line, "") for line in out.splitlines())
    assert "case" in out and lines["case"].strip() == "e"
    assert "N(0, 24)" in out
    assert lines["m"].strip() == "2"


def test_constants_cp(capsys):
    code, out, _ = run(capsys, "constants", "--potential", "drift_minus_cp:c=1,a=3,b=1")
    assert code == 0
    assert "gaussian_coef           9.797958971" in out


def test_constants_json(capsys):
    code, out, _ = run(capsys, "constants", "--potential", "drifted_brownian:delta=0.5", "--format", "json")
    data = json.loads(out)
    assert data["metadata"]["regime"]["case"] == "a"


def test_constants_invalid(capsys):
    code, _, err = run(capsys, "constants", "--potential", "drift_minus_cp:c=1,a=1,b=2")
    assert code != 0
    assert "VIOLATION" in err


def test_missing_potential_and_samples(capsys):
    assert run(capsys, "constants")[0] != 0
    code, _, err = run(capsys, "tail", "--potential", "drifted_brownian:delta=1.5")
    assert code != 0 and "samples" in err


def test_simulate_reproducible(tmp_path, capsys):
    paths = []
    for i in range(3):
        p = tmp_path / f"a{i}.csv"
        assert run(capsys, "simulate", "Ainf", "--potential", "drifted_brownian:delta=3",
                   "--samples", "10", "--seed", "4", "--out", str(p))[0] == 0
        paths.append(p.read_text())
    assert paths[0] == paths[1] == paths[2]
    rows = [line for line in paths[0].splitlines() if not line.startswith("#")]
    assert rows[0] == "A_inf,error_bound" and len(rows) == 11
    assert all(float(r.split(",")[1]) <= 1e-4 for r in rows[1:])


def test_simulate_zpath(capsys):
    code, out, _ = run(capsys, "simulate", "zpath", "--potential", "drift_minus_cp:c=1,a=3,b=1", "--r", "1")
    body = [line for line in out.splitlines() if not line.startswith("#")]
    assert code == 0 and body[0] == "t,V,a,U,Z"


@pytest.mark.parametrize("kind", ["Zinf", "I", "H"])
def test_simulate_other_kinds(kind, capsys):
    code, out, _ = run(capsys, "simulate", kind, "--potential", "drifted_brownian:delta=3", "--samples", "4",
                       "--r", "1", "--step", "0.05")
    assert code == 0
    assert len([line for line in out.splitlines() if not line.startswith("#")]) == 5


def test_verify_unknown_suite(capsys):
    code, _, err = run(capsys, "verify", "nope")
    assert code == 2 and "moments" in err and "stable-limit" in err


def test_verify_kappa(tmp_path, capsys):
    out = tmp_path / "k.json"
    code, _, _ = run(capsys, "verify", "kappa", "--out", str(out))
    assert code == 0 and json.loads(out.read_text())["pass"] is True


def test_config_file_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "e.ini"
    cfg.write_text("[potential]\nfamily = drifted_brownian\ndelta = 3\n\n"
                   "[experiment]\nkind = moment-check\nsamples = 50\nstep = 0.05\nseed = 1\n\n"
                   "[gou]\nmoment = Z_t\nz0 = 1\nt = 0.5\nrtol = 0.5\n")
    code, out, _ = run(capsys, "run", "--config", str(cfg))
    assert code == 0
    data = json.loads(out)
    assert data["metadata"]["n"] == 50 and data["metadata"]["options"]["moment"] == "Z_t"
    code, out, _ = run(capsys, "run", "--config", str(cfg), "--samples", "60", "--seed", "2")
    data = json.loads(out)
    assert data["metadata"]["n"] == 60 and data["metadata"]["seed"] == 2


def test_bad_config_section(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[potential]\nfamily = drifted_brownian\ndelta = 3\n[nonsense]\nx = 1\n")
    assert run(capsys, "run", "--config", str(cfg), "--kind", "K-estimate", "--samples", "5")[0] == 2


def test_help_lists_kinds(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--help"])
    out = capsys.readouterr().out
    for kind in cli.KIND_HELP:
        assert kind in out
    assert "LEVYDIFF_WORKERS" in out


def test_tail_command_csv(capsys):
    code, out, _ = run(capsys, "tail", "--potential", "drifted_brownian:delta=1.5", "--samples", "2000",
                       "--format", "csv", "--step", "0.05")
    assert out.splitlines()[0] == "statistic,value,ci,target,provenance,pass"
    assert "gou.hill_index" in out
