import json
import subprocess
import sys
from pathlib import Path

import pytest

from tqmf.chart import GENERATOR
from tqmf.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_qexp_examples(capsys):
    assert run(["qexp", "--N", "5"], capsys)[:2] == (0, "[1, -24, -72, -96, -168]\n")
    assert run(["qexp", "--N", "1"], capsys)[1] == "[1]\n"
    assert run(["qexp", "--N", "2"], capsys)[1] == "[1, -24]\n"


@pytest.mark.parametrize(
    "args",
    [["qexp", "--N", "0"], ["nonsense"], ["ext", "--s-max", "x"], ["ext", "--format", "pdf"], ["ext", "--invert", "1"], []],
)
def test_usage_errors_exit_1(args, capsys):
    code, _, err = run(args, capsys)
    assert code == 1 and err


def test_ext_gamma_json(capsys, tmp_path):
    out = tmp_path / "ext.json"
    assert main(["ext", "--algebroid", "weierstrass-gamma", "--s-max", "2", "--n-max", "6", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    entry = next(e for e in doc["entries"] if (e["s"], e["n"]) == (1, 2))
    assert entry["group"] == "Z/12" and entry["topological_degree"] == 4


def test_ext_exterior_dimensions(capsys):
    code, text, _ = run(["ext", "--algebroid", "exterior-c", "--s-max", "4", "--n-max", "12"], capsys)
    assert code == 0
    doc = json.loads(text)
    for e in doc["entries"]:
        expected = sum(1 for i in range(e["s"] + 1) if i + 3 * (e["s"] - i) == e["n"])
        assert e["torsion"] == [2] * expected


def test_ext_is_byte_identical(capsys):
    args = ["ext", "--algebroid", "de-rham-sigma", "--s-max", "2", "--n-max", "5"]
    assert run(args, capsys)[1] == run(args, capsys)[1]


def test_ext_resource_abort(capsys):
    code, _, err = run(["ext", "--s-max", "3", "--n-max", "8", "--max-slice-dim", "5"], capsys)
    assert code == 3 and "max_slice_dim" in err


def test_ext_resource_env_override(capsys, monkeypatch):
    monkeypatch.setenv("TQMF_MAX_SLICE_DIM", "5")
    assert run(["ext", "--s-max", "3", "--n-max", "8"], capsys)[0] == 3


def test_ext_from_config(capsys):
    code, text, _ = run(["ext", "--config", str(FIXTURES / "sigma.json"), "--s-max", "1", "--n-max", "5"], capsys)
    assert code == 0
    doc = json.loads(text)
    assert doc["algebroid"] == "sigma-from-file"
    assert next(e for e in doc["entries"] if (e["s"], e["n"]) == (1, 3))["group"] == "Z/2 + Z/2"


def test_ext_text_and_svg(capsys):
    code, text, _ = run(["ext", "--algebroid", "weierstrass-gamma", "--format", "text"], capsys)
    assert code == 0 and "Z/12" in text
    code, svg, _ = run(["ext", "--algebroid", "weierstrass-gamma", "--format", "svg"], capsys)
    assert code == 0 and svg.startswith("<?xml") and f"generator: {GENERATOR}" in svg


def test_verify_passes_and_reports_discrepancies(capsys):
    code, text, _ = run(["verify", "--n-max", "12"], capsys)
    assert code == 0
    doc = json.loads(text)
    assert doc["passed"]
    assert any("c4^2" in note for note in doc["discrepancies"]["identity_variants"])
    assert doc["discrepancies"]["d_a4_squared"]["passed"] is False
    assert doc["discrepancies"]["e2_presentation"]


def test_verify_negative_control(capsys):
    code, text, err = run(["verify", "--n-max", "4", "--config", str(FIXTURES / "sigma_corrupted.json")], capsys)
    assert code == 2
    assert "right unit compatible with Delta[a4]" in err
    doc = json.loads(text)
    assert not doc["sections"]["config"]["passed"]


def test_verify_accepts_valid_config(capsys):
    assert run(["verify", "--n-max", "4", "--config", str(FIXTURES / "sigma.json")], capsys)[0] == 0


def test_anss_small(tmp_path, capsys):
    code, text, _ = run(["anss", "--stem-max", "6", "--verify-n-max", "5", "-o", str(tmp_path)], capsys)
    assert code == 0
    summary = json.loads(text)
    assert summary["passed"]
    homotopy = json.loads((tmp_path / "homotopy.json").read_text())
    stem5 = next(s for s in homotopy["stems"] if s["stem"] == 5)
    assert stem5["group"] == "Z/2"
    assert homotopy["detected"]["sigma1"] == {"stem": 5, "filtration": 1}
    svg = (tmp_path / "chart.svg").read_text()
    assert "<title>" in svg and 'stroke="#c33"' in svg
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    run(["anss", "--stem-max", "6", "--verify-n-max", "5", "-o", str(tmp_path)], capsys)
    assert first == {p.name: p.read_bytes() for p in tmp_path.iterdir()}


def test_anss_stated_presentation_fails(tmp_path, capsys):
    code, text, _ = run(["anss", "--stem-max", "10", "--presentation", "stated", "--verify-n-max", "5", "-o", str(tmp_path)], capsys)
    assert code == 2
    assert json.loads(text)["failed_checks"]


def test_bockstein_command(tmp_path, capsys):
    out = tmp_path / "b.json"
    assert main(["bockstein", "--p-max", "1", "--q-max", "1", "--n-max", "4", "--r-max", "1", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["passed"] and len(doc["quoted_differentials"]) == 3
    svg = tmp_path / "b.svg"
    assert main(["bockstein", "--p-max", "1", "--q-max", "1", "--n-max", "4", "--r-max", "1", "--format", "svg", "-o", str(svg)]) == 0
    assert "q=" in svg.read_text()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tqmf", "qexp", "--N", "3"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "[1, -24, -72]\n"
