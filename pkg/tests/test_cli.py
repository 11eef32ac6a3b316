import csv
import io
import json
import math
from importlib import resources

import jsonschema
import pytest

from teichentropy.cli import main

SCHEMAS = {
    name: json.loads(resources.files("teichentropy").joinpath(f"schemas/{name}.schema.json").read_text())
    for name in ("rauzy", "orbit", "entropy", "roofs", "frequencies", "margulis")
}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, kind, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    assert code == 0, err
    data = json.loads(out)
    jsonschema.validate(data, SCHEMAS[kind])
    return data


def test_rauzy_dot(capsys):
    code, out, err = run(capsys, "rauzy", "--perm", "3,2,1", "--format", "dot")
    assert code == 0 and out.startswith("digraph")
    assert out.count("[label=\"(") == 3
    assert "class size 3" in err


def test_rauzy_json_and_sizes(capsys):
    assert run_json(capsys, "rauzy", "rauzy", "--perm", "2,1")["size"] == 1
    assert run_json(capsys, "rauzy", "rauzy", "--perm", "4,3,2,1")["size"] == 7


def test_rauzy_reducible(capsys):
    code, _, err = run(capsys, "rauzy", "--perm", "1,2")
    assert code == 2 and "reducible" in err


def test_orbit_golden(capsys):
    data = run_json(capsys, "orbit", "orbit", "--lambda", "golden", "--depth", "4")
    assert [(u[0], u[1]) for u in data["letters"]] == [("a", 1), ("b", 1)] * 2


def test_orbit_rational_trace(capsys):
    code, out, _ = run(capsys, "orbit", "--lambda", "7/10,3/10", "--depth", "1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1
    assert rows[0]["type"] == "a" and rows[0]["n"] == "2"
    assert float(rows[0]["roof_tau0"]) == pytest.approx(-math.log(0.7))
    assert float(rows[0]["roof_tau1"]) == pytest.approx(-math.log(0.4))


def test_orbit_depth_zero(capsys):
    code, out, _ = run(capsys, "orbit", "--depth", "0")
    assert code == 0 and out.strip().splitlines() == ["step,letter,type,n,roof_tau0,roof_tau1,lambda"]


def test_orbit_boundary_partial_trace(capsys):
    code, out, err = run(capsys, "orbit", "--lambda", "7/10,3/10", "--depth", "3")
    assert code == 3 and "boundary" in err
    assert len(out.strip().splitlines()) == 2


def test_entropy_finite(capsys):
    data = run_json(capsys, "entropy", "entropy", "finite", "--roofs", "log2,log2")
    assert data["beta"] == pytest.approx(1.0, abs=1e-10)
    data = run_json(capsys, "entropy", "entropy", "finite", "--roofs", "1,2")
    assert data["beta"] == pytest.approx(math.log((1 + math.sqrt(5)) / 2), abs=1e-8)


def test_entropy_bernoulli_law(capsys):
    data = run_json(capsys, "entropy", "entropy", "bernoulli", "--law", "2*log(i)")
    assert data["kind"] == "abscissa" and data["beta"] == pytest.approx(0.5, abs=1e-3)


def test_entropy_flow(capsys):
    small = run_json(capsys, "entropy", "entropy", "flow", "--bound", "2")
    assert "lower_bound_only" in small["flags"]
    data = run_json(capsys, "entropy", "entropy", "flow", "--perm", "2,1", "--q", "a:1.b:1", "--bound", "12")
    assert data["details"]["truncated_beta"] > 1.0
    assert data["beta"] > data["details"]["truncated_beta"]


def test_roofs_csv_and_json(capsys):
    code, out, _ = run(capsys, "roofs", "--q", "a:1.b:1", "--bound", "8")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 6
    data = run_json(capsys, "roofs", "roofs", "--bound", "8")
    assert len(data["entries"]) == 6


def test_frequencies(capsys):
    data = run_json(capsys, "frequencies", "frequencies", "--word", "a:1", "--word", "b:1",
                    "--iterations", "20000")
    assert len(data["cylinders"]) == 2


def test_margulis_deterministic_bytes(capsys, tmp_path):
    args = ["margulis", "--iterations", "30000", "--returns", "4", "--seed", "3", "--format", "json"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    jsonschema.validate(data, SCHEMAS["margulis"])
    assert data["m"] == 2


def test_threads_do_not_change_output(capsys, tmp_path):
    base = ["frequencies", "--word", "a:1.b:1", "--iterations", "20000", "--chunks", "2", "--format", "json"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(base + ["--out", str(a)]) == 0
    assert main(base + ["--threads", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_invalid_word(capsys):
    code, _, err = run(capsys, "roofs", "--q", "a:1.a:1")
    assert code == 2


def test_bad_flag_value():
    with pytest.raises(SystemExit) as exc:
        main(["orbit", "--depth", "-1"])
    assert exc.value.code == 2
