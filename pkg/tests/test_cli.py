"""End-to-end command-line checks run through a subprocess."""

import json
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "dgmodels.cli"]

INCONCLUSIVE_DOC = """
{
  "name": "window-too-small",
  "algebra": {"generators": [["u", 2]], "cap": 6},
  "modules": {
    "M": {"generators": [["b", 2]], "cap": 5}
  },
  "maps": {
    "i": {"source": "M", "target": "A", "degree": 0, "images": {"b": "u"}},
    "e": {"source": "M", "target": "A", "degree": 2, "images": {"b": "u^2"}},
    "w": {"source": "M", "target": "M", "degree": 2, "images": {"b": {"b": "u"}}}
  },
  "action": {
    "relative_model": "M",
    "i_prime": "i",
    "e_prime": "e",
    "euler_self_map": "w",
    "fixed_components": 1
  },
  "options": {"max_degree": 2}
}
"""


def run(*args, **kwargs):
    return subprocess.run(
        CLI + list(args), capture_output=True, text=True, timeout=120, **kwargs
    )


# ---- verify ---------------------------------------------------------------------


def test_verify_fixture_ok():
    res = run("verify", "--fixture", "cp2")
    assert res.returncode == 0
    assert "all checks passed" in res.stdout


def test_verify_machine_output_is_json():
    res = run("verify", "--fixture", "s4_hopf", "--format", "machine")
    assert res.returncode == 0
    payload = json.loads(res.stdout)
    assert payload["ok"] is True
    assert payload["command"] == "verify"
    assert payload["source"] == {"fixture": "s4_hopf"}


def test_verify_empty_document(tmp_path):
    doc = tmp_path / "empty.json"
    doc.write_text("{}")
    res = run("verify", "--input", str(doc))
    assert res.returncode == 0
    assert "trivially valid" in res.stdout


# ---- minmodel -------------------------------------------------------------------


def test_minmodel_on_fixture_relative_model():
    res = run("minmodel", "--fixture", "cp2", "--max-degree", "8")
    assert res.returncode == 0
    assert "minimal" in res.stdout


def test_minmodel_machine_betti(tmp_path):
    doc = tmp_path / "m.json"
    doc.write_text(
        json.dumps(
            {
                "algebra": {"generators": [["a", 3]], "cap": 10},
                "modules": {
                    "M": {
                        "generators": [["x", 0], ["y", 2]],
                        "differentials": {"y": {"x": "a"}},
                        "cap": 9,
                    }
                },
                "options": {"max_degree": 8},
            }
        )
    )
    res = run("minmodel", "--input", str(doc), "--format", "machine")
    assert res.returncode == 0
    payload = json.loads(res.stdout)
    assert payload["command"] == "minmodel"
    # dy = a x kills [a x]; the surviving classes are [x] and [a y]
    betti = payload["model"]["betti_model"]
    assert betti == [1, 0, 0, 0, 0, 1, 0, 0, 0]
    assert betti == payload["model"]["betti_target"]


def test_minmodel_needs_target_when_ambiguous(tmp_path):
    doc = tmp_path / "two.json"
    doc.write_text(
        json.dumps(
            {
                "algebra": {"generators": [["a", 3]], "cap": 8},
                "modules": {
                    "M": {"generators": [["x", 0]], "cap": 6},
                    "N": {"generators": [["y", 1]], "cap": 6},
                },
            }
        )
    )
    res = run("minmodel", "--input", str(doc))
    assert res.returncode == 1
    assert "--target" in res.stderr
    res2 = run("minmodel", "--input", str(doc), "--target", "N", "--max-degree", "5")
    assert res2.returncode == 0


# ---- circle ---------------------------------------------------------------------


def test_circle_text_report_sections():
    res = run("circle", "--fixture", "s4_hopf")
    assert res.returncode == 0
    for needle in (
        "total-space model",
        "fixed-set model",
        "borel model",
        "long exact sequence",
        "shared basis",
        "poincare identities",
        "formality",
        "localization",
    ):
        assert needle in res.stdout, needle


def test_circle_machine_deterministic():
    first = run("circle", "--fixture", "cp2", "--format", "machine")
    second = run("circle", "--fixture", "cp2", "--format", "machine")
    assert first.returncode == second.returncode == 0
    assert first.stdout == second.stdout
    payload = json.loads(first.stdout)
    assert payload["naive"]["wedge_of_spheres"] is True


def test_circle_smith_gysin_rows():
    res = run("circle", "--fixture", "flow_s4")
    assert res.returncode == 0
    assert "smith-gysin" in res.stdout


def test_circle_inconclusive_exit_three(tmp_path):
    doc = tmp_path / "inc.json"
    doc.write_text(INCONCLUSIVE_DOC)
    res = run("circle", "--input", str(doc))
    assert res.returncode == 3
    assert "inconclusive" in res.stdout


# ---- export ---------------------------------------------------------------------


def test_export_document_round_trip(tmp_path):
    out = tmp_path / "doc.json"
    res = run("export", "--fixture", "s4_hopf", "--output", str(out))
    assert res.returncode == 0
    assert "round-trip verified" in res.stdout
    res2 = run("verify", "--input", str(out))
    assert res2.returncode == 0


def test_export_total_model_then_minmodel(tmp_path):
    out = tmp_path / "total.json"
    res = run(
        "export", "--fixture", "s4_hopf", "--what", "total",
        "--max-degree", "8", "--output", str(out),
    )
    assert res.returncode == 0
    res2 = run("minmodel", "--input", str(out), "--format", "machine")
    assert res2.returncode == 0
    betti = json.loads(res2.stdout)["model"]["betti_model"]
    assert betti[0] == 1 and betti[4] == 1 and betti[2] == 0


def test_export_equivariant_stdout():
    res = run("export", "--fixture", "s4_hopf", "--what", "equivariant")
    assert res.returncode == 0
    payload = json.loads(res.stdout)
    names = [g[0] for g in payload["algebra"]["generators"]]
    assert "e" in names


def test_export_fixed_on_empty_fixed_set_is_precondition_error():
    res = run("export", "--fixture", "almost_free_hopf", "--what", "fixed")
    assert res.returncode == 2
    assert "precondition failed" in res.stderr


# ---- error handling -------------------------------------------------------------


def test_usage_errors_exit_one():
    assert run().returncode == 1
    assert run("circle").returncode == 1  # needs --input or --fixture
    assert run("frobnicate").returncode == 1
    res = run("verify", "--fixture", "nope")
    assert res.returncode == 1


def test_both_input_and_fixture_rejected(tmp_path):
    doc = tmp_path / "d.json"
    doc.write_text("{}")
    res = run("verify", "--input", str(doc), "--fixture", "cp2")
    assert res.returncode == 1
    assert "either" in res.stderr or "one of" in res.stderr


def test_bad_json_reports_line(tmp_path):
    doc = tmp_path / "bad.json"
    doc.write_text('{\n  "algebra": oops\n}')
    res = run("verify", "--input", str(doc))
    assert res.returncode == 1
    assert "line 2" in res.stderr


def test_missing_file_exits_one():
    res = run("verify", "--input", "/nonexistent/never.json")
    assert res.returncode == 1
    assert "cannot read" in res.stderr
