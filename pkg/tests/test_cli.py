import io
import json
import subprocess
import sys

import pytest

from cartanlab.cli import execute

EXAMPLE_SPEC = {"generators": [[[3, 2, 1], [2, 2, 1], [1, 1, 1]], [[2, 1, 1], [1, 2, 0], [1, 0, 1]]], "labels": ["A", "B"]}

# one invocation per subcommand; kept small so the determinism sweep stays quick
COMMANDS = [
    ["validate", "--spec", "{spec}"],
    ["chambers", "--spec", "{spec}"],
    ["entropy", "lebesgue", "--spec", "{spec}", "--element", "1,1"],
    ["entropy", "estimate", "--map", "cat", "--samples", "20000", "--seed", "3"],
    ["entropy", "report", "--map", "doubling", "--method", "partition-rate", "--samples", "200000", "--depth", "12"],
    ["orbit", "--spec", "cat", "--point", "1/7,3/7"],
    ["furstenberg", "orbit", "--q", "7"],
    ["furstenberg", "gaps", "--N", "100000"],
    ["furstenberg", "density", "--x", "sqrt(2)", "--N", "10000"],
    ["suspension", "check", "--spec", "{spec}", "--pairs", "20"],
    ["roots", "report", "--n", "3"],
    ["roots", "closure", "--roots", "1,2;2,1"],
    ["roots", "kak", "--samples", "20", "--seed", "4"],
    ["roots", "schedule", "--functional", "0.3,-1.2"],
    ["lyapunov", "top", "--spec", "{spec}", "--steps", "500"],
    ["lyapunov", "spectrum", "--spec", "{spec}", "--steps", "500"],
    ["shear", "probe", "--t", "1"],
    ["growth", "probe", "--spec", "cat"],
]


@pytest.fixture
def spec_path(tmp_path):
    p = tmp_path / "example.json"
    p.write_text(json.dumps(EXAMPLE_SPEC))
    return str(p)


def run(argv):
    out = io.StringIO()
    code = execute(argv, stdout=out)
    return code, out.getvalue()


@pytest.mark.parametrize("argv", COMMANDS, ids=[" ".join(c[:2]) for c in COMMANDS])
def test_command_runs_and_is_deterministic(argv, spec_path):
    argv = [a.format(spec=spec_path) for a in argv]
    code, text = run(argv)
    assert code == 0
    report = json.loads(text)
    assert report["schema"] == "cartanlab/1"
    assert report["tool_version"]
    assert report["ok"] is True
    again = run(argv)
    assert again == (code, text)


def test_validate_example_all_true(spec_path):
    code, text = run(["validate", "--spec", spec_path])
    v = json.loads(text)["results"]["validation"]
    assert code == 0
    for key in ("det_one", "distinct_real_spectra", "commuting", "genuine", "irreducible_char_polys", "anosov_elements_exist"):
        assert v[key] is True


def test_validate_failure_exits_2(tmp_path):
    p = tmp_path / "twice.json"
    p.write_text(json.dumps({"generators": [EXAMPLE_SPEC["generators"][0]] * 2}))
    code, text = run(["validate", "--spec", str(p), "--bound", "3"])
    assert code == 2
    assert json.loads(text)["results"]["validation"]["genuine"] is False


def test_missing_spec_is_usage_error(capsys):
    assert run(["validate"])[0] == 1
    assert "--spec" in capsys.readouterr().err


def test_usage_errors():
    assert run([])[0] == 1
    assert run(["nonsense"])[0] == 1
    assert run(["roots", "kak", "--samples", "many"])[0] == 1
    assert run(["entropy"])[0] == 1


@pytest.mark.parametrize(
    "payload,field",
    [
        ({"labels": ["A"]}, "generators"),
        ({"generators": [[[1, 2], [3]]]}, "generators[0][1]"),
        ({"generators": [[[1, 2], [3, "x"]]]}, "generators[0][1][1]"),
        ({"generators": [[[2, 1], [1, 1]]], "labels": ["a", "b"]}, "labels"),
    ],
)
def test_schema_errors_name_field(tmp_path, capsys, payload, field):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(payload))
    assert run(["validate", "--spec", str(p)])[0] == 1
    assert field in capsys.readouterr().err


def test_invalid_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(["chambers", "--spec", str(p)])[0] == 1
    assert "schema error" in capsys.readouterr().err


def test_chambers_svg_and_json_file(tmp_path, spec_path):
    svg = tmp_path / "out.svg"
    js = tmp_path / "out.json"
    code, text = run(["chambers", "--spec", spec_path, "--svg", str(svg), "--json", str(js)])
    assert code == 0
    assert js.read_text() == text
    report = json.loads(text)["results"]
    assert report["chambers"]["count"] == 6 and report["no_definite_chamber"]
    body = svg.read_text()
    assert body.startswith("<svg") and body.count("<line") == 3 and "6 chambers" in body


def test_other_svgs(tmp_path):
    p = tmp_path / "r.svg"
    assert run(["furstenberg", "gaps", "--svg", str(p)])[0] == 0
    assert "<polyline" in p.read_text()
    q = tmp_path / "bk.svg"
    assert run(["entropy", "estimate", "--map", "cat", "--samples", "20000", "--svg", str(q)])[0] == 0
    assert q.read_text().count("<polyline") >= 1


def test_verdicts_recomputable_from_inputs(spec_path):
    from cartanlab.catalog import load_action
    from cartanlab.toral import lebesgue_entropy

    code, text = run(["entropy", "lebesgue", "--spec", spec_path, "--element", "2,-1"])
    rep = json.loads(text)
    spec = load_action(rep["inputs"]["spec"])
    assert rep["results"]["entropy"] == lebesgue_entropy(spec, (2, -1))


def test_console_script_module():
    proc = subprocess.run(
        [sys.executable, "-c", "from cartanlab.cli import main; main()", "roots", "report"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["dimension"] == 8
