import json
import subprocess
import sys

import pytest

from contraction_curvature.cli import main
from contraction_curvature.corpus import named
from contraction_curvature.specfile import emit_spec


@pytest.fixture
def spec_file(tmp_path):
    def write(spec, name="spec.json"):
        path = tmp_path / name
        path.write_text(spec if isinstance(spec, str) else emit_spec(spec))
        return str(path)
    return write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_kappa(capsys, spec_file):
    code, out, _ = run(capsys, "analyze", spec_file(named("kappa_example", kappa=0.25)),
                       "--dilation-horizon", "200")
    report = json.loads(out)
    assert code == 0
    assert report["curvature"]["limit"]["value"] == pytest.approx(0.25, abs=1e-12)
    assert report["index"]["theorem4_applicable"] is False
    assert report["verdicts"]["integer_curvature_index"]["status"] == "not_applicable"
    assert report["random"] == {"seed": 0, "algorithm": "PCG64"}
    assert "timing_seconds" not in report


def test_analyze_unilateral_shift(capsys, spec_file):
    code, out, _ = run(capsys, "analyze", spec_file(named("unilateral_shift")), "--dilation-horizon", "50")
    report = json.loads(out)
    assert code == 0
    assert report["curvature"]["limit"]["value"] == 1.0
    assert report["index"]["index"] == -1
    assert report["verdicts"]["integer_curvature_index"]["status"] == "pass"
    assert all(v["status"] != "fail" for v in report["verdicts"].values())


def test_analyze_rejects_non_contraction(capsys, spec_file):
    path = spec_file({"kind": "dense", "matrix": [[1.1]]})
    code, out, err = run(capsys, "analyze", path)
    assert code == 2 and out == ""
    assert "ContractionError" in err
    code, out, _ = run(capsys, "analyze", path, "--normalize", "--dilation-horizon", "20")
    assert code == 0
    assert json.loads(out)["operator"]["normalized_by"] == [pytest.approx(1.1)]


def test_analyze_rejects_unknown_field_and_bad_json(capsys, spec_file):
    assert run(capsys, "analyze", spec_file('{"kind": "dense", "matrix": [[0.5]], "x": 0}'))[0] == 2
    assert run(capsys, "analyze", spec_file("{oops"))[0] == 2
    assert run(capsys, "analyze", "/nonexistent/spec.json")[0] == 2


def test_analyze_is_deterministic(capsys, spec_file):
    path = spec_file(named("random_contraction", dim=2, seed=3))
    first = run(capsys, "analyze", path, "--seed", "5", "--reciprocity", "--dilation-horizon", "100")[1]
    second = run(capsys, "analyze", path, "--seed", "5", "--reciprocity", "--dilation-horizon", "100")[1]
    assert first == second
    assert json.loads(first)["random"]["seed"] == 5


def test_timing_is_opt_in(capsys, spec_file):
    out = run(capsys, "analyze", spec_file(named("unilateral_shift")), "--timing",
              "--dilation-horizon", "10")[1]
    assert "curvature" in json.loads(out)["timing_seconds"]


def test_csv_schema(capsys, spec_file, tmp_path):
    csv_path = tmp_path / "seq.csv"
    run(capsys, "analyze", spec_file(named("kappa_example", kappa=0.25)), "--csv", str(csv_path),
        "--dilation-horizon", "10")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "n,a_n"
    n, a = lines[1].split(",")
    assert n == "0" and float(a) == pytest.approx(0.25)
    assert [int(l.split(",")[0]) for l in lines[1:]] == list(range(len(lines) - 1))


def test_sequence_command(capsys, spec_file):
    code, out, _ = run(capsys, "sequence", spec_file(named("jordan_nilpotent", n=3)))
    assert code == 0
    rows = [l.split(",") for l in out.splitlines()]
    assert rows[0] == ["n", "a_n"]
    assert float(rows[-1][1]) == 0.0


def test_example_command(capsys):
    code, out, _ = run(capsys, "example", "--list")
    assert code == 0 and "kappa_example" in out and "sum_shift_kappa" in out
    code, out, _ = run(capsys, "example", "kappa_example", "--param", "kappa=0.5")
    assert json.loads(out)["params"] == {"kappa": 0.5}
    code, out, _ = run(capsys, "example", "extension_zero")
    assert json.loads(out)["kind"] == "extension"
    assert run(capsys, "example", "kappa_example")[0] == 2


def test_verify_thm4_reports_counterexample(capsys):
    code, out, _ = run(capsys, "verify", "thm4")
    assert code == 0
    assert "note: backward_shift: not pure" in out
    assert "K != -index" in out


def test_verify_gate_is_live(capsys):
    code, out, _ = run(capsys, "verify", "cesaro", "--tolerance", "1e-30")
    assert code == 1
    assert "FAIL" in out


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "contraction_curvature.cli", "example", "unilateral_shift"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout) == {"kind": "named", "name": "unilateral_shift", "params": {}}
