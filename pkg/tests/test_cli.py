import json
import math

import pytest

from homodyne_bell import cli, engine
from homodyne_bell.exceptions import ProbabilityOutOfRange


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    lines = path.read_text().splitlines()
    meta = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    return meta, body[0].split(","), [list(map(float, ln.split(","))) for ln in body[1:]]


def test_eval_two_pair(capsys):
    code, out, _ = run(capsys, "eval", "--family", "two_pair", "--parameter", str(1 / math.sqrt(2)),
                       "--psi", "45", "--degrees", "--kind", "ch")
    assert code == 0
    doc = json.loads(out)
    assert doc["value"] == pytest.approx(0.5 + math.sqrt(2) / math.pi, abs=1e-12)
    assert doc["psi"] == pytest.approx(math.pi / 4)
    assert doc["violated"] is False
    assert doc["p11"] + doc["p10"] == pytest.approx(0.5, abs=1e-12)
    assert doc["manifest"]["command"] == "eval"
    assert {"tool_version", "timestamp", "parameters", "seed"} <= set(doc["manifest"])


def test_eval_info_in_nats(capsys):
    code, out, _ = run(capsys, "eval", "--family", "circle", "--parameter", "1.12",
                       "--psi", "0.7", "--kind", "info", "--log-base", "e")
    bits = json.loads(run(capsys, "eval", "--family", "circle", "--parameter", "1.12",
                          "--psi", "0.7", "--kind", "info")[1])["value"]
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(bits * math.log(2), rel=1e-12)


def test_eval_coeff_file(tmp_path, capsys):
    spec = tmp_path / "state.json"
    spec.write_text(json.dumps({"coefficients": [1]}))
    code, out, _ = run(capsys, "eval", "--coeff-file", str(spec), "--psi", "1", "--kind", "info")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(2.0)


@pytest.mark.parametrize("argv", [
    ["eval", "--family", "circle", "--psi", "0"],
    ["eval", "--psi", "0"],
    ["eval", "--family", "circle", "--parameter", "-1", "--psi", "0"],
    ["sweep", "--family", "circle", "--parameter", "1", "--psi-step", "-0.1"],
    ["sweep", "--family", "circle", "--parameter", "1", "--psi-start", "2", "--psi-end", "1"],
    ["grid", "--r-start", "0", "--r-end", "1"],
    ["optimize", "--truncation", "0"],
    ["optimize", "--restarts", "0"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


@pytest.mark.parametrize("argv", [
    ["eval", "--family", "circle", "--parameter", "1", "--psi", "0", "--log-base", "10"],
    ["eval", "--family", "ellipse", "--parameter", "1", "--psi", "0"],
    ["frobnicate"],
])
def test_argparse_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 2


def test_numeric_error_exit_3(capsys, monkeypatch):
    def broken(*args, **kwargs):
        raise ProbabilityOutOfRange("p11 = 0.7 outside [0, 1/2]")

    monkeypatch.setattr(engine, "joint_probabilities", broken)
    code, _, err = run(capsys, "eval", "--family", "circle", "--parameter", "1", "--psi", "0")
    assert code == 3 and "numeric error" in err


def test_sweep_csv(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--family", "circle", "--parameter", "1.12",
                     "--psi-start", "0", "--psi-end", "1", "--psi-step", "0.01",
                     "--out", str(out))
    assert code == 0
    meta, header, rows = read_csv(out)
    assert header == ["psi", "value"]
    assert len(rows) == 101
    assert any("tool_version" in ln for ln in meta)
    assert rows[-1][0] == pytest.approx(1.0)
    assert rows[0][1] == pytest.approx(json.loads(run(
        capsys, "eval", "--family", "circle", "--parameter", "1.12", "--psi", "0")[1])["value"],
        rel=1e-11)


def test_sweep_degrees(tmp_path, capsys):
    out = tmp_path / "deg.csv"
    assert cli.main(["sweep", "--family", "two_pair", "--parameter", "0.6", "--degrees",
                     "--psi-start", "0", "--psi-end", "180", "--psi-step", "45",
                     "--out", str(out)]) == 0
    _, _, rows = read_csv(out)
    assert [r[0] for r in rows] == pytest.approx([0, math.pi / 4, math.pi / 2,
                                                  3 * math.pi / 4, math.pi])


def test_grid_csv(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    code, _, _ = run(capsys, "grid", "--kind", "spin", "--r-start", "1.0", "--r-end", "1.2",
                     "--r-step", "0.1", "--psi-step", "0.1", "--out", str(out))
    assert code == 0
    _, header, rows = read_csv(out)
    assert header == ["r", "psi", "value"]
    assert len(rows) == 3 * 32
    assert max(r[2] for r in rows) > 2


def test_no_partial_output_on_error(tmp_path, capsys):
    out = tmp_path / "never.csv"
    code, _, _ = run(capsys, "sweep", "--family", "circle", "--parameter", "1",
                     "--psi-step", "0", "--out", str(out))
    assert code == 2
    assert list(tmp_path.iterdir()) == []


def test_optimize_truncation_one(capsys):
    code, out, _ = run(capsys, "optimize", "--kind", "spin", "--truncation", "1",
                       "--restarts", "2", "--max-iters", "200", "--seed", "4")
    assert code == 0
    doc = json.loads(out)
    assert doc["best_value"] == pytest.approx(4 * math.sqrt(2) / math.pi, abs=1e-9)
    assert doc["violated"] is False
    assert "no violation" in doc["note"]
    assert "trace" not in doc
    assert doc["manifest"]["seed"] == 4


def test_optimize_is_deterministic(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"max_iters": 100, "restarts": 3, "seed": 11}))
    docs = []
    for _ in range(2):
        code, out, _ = run(capsys, "optimize", "--kind", "ch", "--truncation", "6",
                           "--config", str(cfg), "--trace")
        assert code == 0
        doc = json.loads(out)
        doc["manifest"].pop("timestamp")
        docs.append(doc)
    assert docs[0] == docs[1]
    assert docs[0]["trace"]


def test_optimize_bad_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"iterations": 5}))
    assert run(capsys, "optimize", "--config", str(cfg))[0] == 2
    cfg.write_text("[1, 2]")
    assert run(capsys, "optimize", "--config", str(cfg))[0] == 2


def test_table1(tmp_path, capsys):
    out = tmp_path / "t1.json"
    code, text, _ = run(capsys, "table1", "--restarts", "2", "--max-iters", "100",
                        "--out", str(out))
    assert code == 0
    assert "0.5495" in text
    doc = json.loads(out.read_text())
    assert doc["bell"]["ch"]["circle"] == pytest.approx(1.016, abs=2e-3)
    assert "trace" not in doc["optimizer"]["ch"]


def test_verify(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0 and json.loads(out)["passed"] is True


def test_verify_more_points(capsys):
    code, out, _ = run(capsys, "verify", "--points", "800")
    assert code == 0 and json.loads(out)["passed"] is True


def test_verify_corrupted(capsys):
    code, out, _ = run(capsys, "verify", "--corrupt-table")
    assert code == 1
    doc = json.loads(out)
    worst = {c["name"]: c["worst"] for c in doc["checks"] if not c["passed"]}
    assert worst["coupling weights vs quadrature (relative)"] == "G(1,0)"


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--version"])
    assert info.value.code == 0
    assert capsys.readouterr().out.strip() == "0.1.0"
