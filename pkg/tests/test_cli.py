import json

import numpy as np
import pytest

from aquarium import cli

LIGHT = {
    "scan": ["--points", "4", "--n", "2000"],
    "rotnum": ["--domain", "square", "--lambda", "0.6", "--n", "1000"],
    "orbit": ["--domain", "disk", "--lambda", "0.5", "--n", "5"],
    "diophantine": ["--value", "0.3819660112501051", "--q-max", "100"],
    "conjugate": ["--iterations", "2", "--grid", "128", "--K", "32"],
    "square-evolve": ["--K", "16", "--tmax", "4"],
    "spectral-measure": ["--K", "32", "--eps-list", "0.1,0.01"],
    "dyadic": ["--K", "16", "--t", "1,5"],
    "layer-solve": ["--N", "32", "--probes", "3"],
    "lap-sweep": ["--N", "32", "--probes", "2", "--h-steps", "2", "--lambda0", "0.6"],
    "reproduce-fig2": ["--domain", '{"type":"disk"}', "--points", "5", "--n", "1000"],
}


def run(capsys, argv):
    code = cli.dispatch(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_empty_argv_usage(capsys):
    code, _, err = run(capsys, [])
    assert code == 2 and "usage" in err


def test_rotnum_square(capsys):
    code, out, _ = run(capsys, ["rotnum", "--domain", "square", "--lambda", "0.6"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# config: ") and lines[1] == "lambda,rot,lo,hi,bound"
    lam, r, lo, hi, bound = map(float, lines[2].split(","))
    assert lo <= 3 / 7 <= hi and abs(r - 0.428571) < bound and bound == pytest.approx(1e-5)


@pytest.mark.parametrize("command", sorted(LIGHT))
def test_round_trip_and_determinism(capsys, tmp_path, command):
    argv = [command] + LIGHT[command] + ["--seed", "7"]
    code, out1, err = run(capsys, argv)
    assert code == 0, err
    if out1.startswith("# config: "):
        first = out1.splitlines()[0]
    else:
        first = "# config: " + json.dumps(json.loads(out1)["config"])
    cfg = cli.RunConfig.from_comment(first)
    assert cli.RunConfig.from_dict(json.loads(first[len("# config: "):])) == cfg
    assert cfg.command == command and cfg.seed == 7
    # identical config and seed give byte-identical output
    assert run(capsys, argv)[1] == out1
    # re-running from the emitted config reproduces the output
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert run(capsys, [command, "--config", str(path)])[1] == out1


def test_csv_format(capsys):
    _, out, _ = run(capsys, LIGHT["orbit"][:0] + ["orbit", "--domain", "disk", "--lambda", "0.5", "--n", "3"])
    lines = out.split("\n")
    assert lines[1] == "step,theta_lift,theta_mod1"
    assert lines[3].split(",")[1] == "%.17g" % float(lines[3].split(",")[1])
    assert "\r" not in out


def test_fig2_disk_monotone(capsys):
    code, out, _ = run(capsys, ["reproduce-fig2", "--domain", '{"type":"disk"}', "--points", "20", "--n", "5000"])
    assert code == 0
    rows = [ln.split(",") for ln in out.splitlines()[2:]]
    rot = np.array([float(r[1]) for r in rows])
    assert np.all(np.diff(rot) > 0)


def test_fig2_all_domains(capsys):
    code, out, _ = run(capsys, ["reproduce-fig2", "--points", "3", "--n", "500"])
    assert code == 0
    lines = out.splitlines()
    assert lines[1].startswith("domain,")
    assert {ln.split(",")[0] for ln in lines[2:]} == {"tilted_square", "disk", "square"}


def test_config_errors(capsys, tmp_path):
    code, _, err = run(capsys, ["rotnum", "--lambda", "1.5"])
    assert code == 2 and "/params/lambda" in err
    code, _, err = run(capsys, ["rotnum", "--domain", '{"type": "disk", "radius": 3}'])
    assert code == 2 and "/domain" in err
    code, _, err = run(capsys, ["rotnum", "--domain", "{not json"])
    assert code == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"command": "rotnum", "params": {"lambda": 0.5, "speed": 3}}))
    code, _, err = run(capsys, ["rotnum", "--config", str(bad)])
    assert code == 2 and "/params" in err and "speed" in err
    with pytest.raises(Exception):
        cli.RunConfig.from_dict({"command": "nope", "params": {}})
    code, _, _ = run(capsys, ["rotnum", "--domain", "@/nonexistent/file.json"])
    assert code == 2


def test_domain_from_file(capsys, tmp_path):
    f = tmp_path / "dom.json"
    f.write_text('{"type": "polygon", "vertices": [[0,0],[1,0],[1,1],[0,1]]}')
    code, out, _ = run(capsys, ["rotnum", "--domain", "@" + str(f), "--lambda", "0.6", "--n", "1000"])
    assert code == 0 and '"polygon"' in out.splitlines()[0]


def test_numerical_failure_exit_code(capsys):
    wavy = '{"type":"fourier","coeffs":[[1,0.15,0,0,-0.15],[3,0.045,0,0,0.045]]}'
    code, _, err = run(capsys, ["rotnum", "--domain", wavy, "--lambda", "0.5"])
    assert code == 3 and "NotLambdaSimple" in err
    code, _, err = run(capsys, ["conjugate", "--alpha", "0.5", "--grid", "128", "--K", "32"])
    assert code == 3 and "ResonantDivisor" in err


def test_threads_env(capsys, monkeypatch):
    argv = ["scan", "--points", "6", "--n", "2000"]
    base = run(capsys, argv)[1]
    monkeypatch.setenv("AQUARIUM_THREADS", "3")
    assert run(capsys, argv)[1] == base
    assert run(capsys, argv + ["--threads", "2"])[1] == base
    monkeypatch.setenv("AQUARIUM_THREADS", "many")
    assert run(capsys, argv)[0] == 2


def test_out_file_and_from_scan(capsys, tmp_path):
    scan = tmp_path / "scan.csv"
    assert cli.dispatch(["scan", "--domain", "disk", "--points", "3", "--n", "2000", "--out", str(scan)]) == 0
    assert scan.read_text().startswith("# config: ")
    code, out, _ = run(capsys, ["diophantine", "--from-scan", str(scan), "--q-max", "50"])
    assert code == 0
    assert len(json.loads(out)["profiles"]) == 3


def test_conjugate_samples(capsys, tmp_path):
    path = tmp_path / "phi.csv"
    code, out, _ = run(capsys, ["conjugate", "--iterations", "3", "--grid", "256", "--K", "64",
                                "--samples", "16", "--samples-out", str(path)])
    assert code == 0
    d = json.loads(out)
    assert d["residual_history"][-1] < d["residual_history"][0]
    assert len(path.read_text().splitlines()) == 18


def test_layer_solve_and_sweep_columns(capsys):
    _, out, _ = run(capsys, ["lap-sweep", "--N", "32", "--probes", "2", "--h-steps", "2"])
    assert out.splitlines()[1] == "h,eps,v_l2,u_max,bdry_resid,cond_est,series,status"
    _, out, _ = run(capsys, ["layer-solve", "--N", "32", "--probes", "2", "--omega", "0.6,0.1"])
    assert out.splitlines()[1] == "x1,x2,u_re,u_im" and len(out.splitlines()) == 4
