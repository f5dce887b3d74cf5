import csv
import json
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from wetcluster.cli import EXIT_FAIL, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK, SUMMARY_COLUMNS, main
from wetcluster.lattice.field import LabelField

FAST = ["--resolution", "24", "--sweeps", "20"]


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_dry(tmp_path, instances_dir, capsys):
    code, out, _ = run(["solve-dry", "--instance", instances_dir / "symmetric_y.json", "--out", tmp_path], capsys)
    assert code == EXIT_OK and "6.000000000" in out
    doc = json.loads((tmp_path / "network.json").read_text())
    assert doc["kind"] == "network"
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "solve-dry" and man["instance_document"]["domain"] == "ball"
    assert (tmp_path / "network.svg").exists()


def test_wet_and_verify(tmp_path, instances_dir, capsys):
    code, out, _ = run(["wet", "--instance", instances_dir / "symmetric_y.json", "--out", tmp_path], capsys)
    assert code == EXIT_OK and "r 0.249025663" in out
    code, out, _ = run(["verify", tmp_path / "wetted.json", "--out", tmp_path / "ver"], capsys)
    assert code == EXIT_OK and out.strip().endswith("PASS")
    rep = json.loads((tmp_path / "ver" / "report.json").read_text())
    assert rep["ok"] and {c["name"] for c in rep["checks"]} >= {"cusp_tangency", "convexity"}


def test_verify_failure_exit_code(tmp_path, instances_dir, capsys):
    run(["wet", "--instance", instances_dir / "symmetric_y.json", "--out", tmp_path], capsys)
    doc = json.loads((tmp_path / "wetted.json").read_text())
    for itf in doc["interfaces"]:
        if not itf["wet"]:
            itf["chain"]["arcs"][0]["curvature"] = 0.3
    (tmp_path / "bent.json").write_text(json.dumps(doc))
    code, out, _ = run(["verify", tmp_path / "bent.json"], capsys)
    assert code == EXIT_FAIL and out.strip().endswith("FAIL")


def test_delta_override(tmp_path, instances_dir, capsys):
    code, out, _ = run(["wet", "--instance", instances_dir / "symmetric_y.json", "--delta", "0", "--out", tmp_path],
                       capsys)
    assert code == EXIT_OK and "wet area 0.000000000" in out
    assert json.loads((tmp_path / "manifest.json").read_text())["overrides"] == {"delta": 0.0}


def test_malformed_instance_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n "domain": "ball",\n "weights": [1, -1],\n "trace": [{"angle": 0, "label": 1}]\n}\n')
    code, _, err = run(["solve-dry", "--instance", p, "--out", tmp_path], capsys)
    assert code == EXIT_INPUT
    assert f"{p}:3: field weights" in err


def test_invalid_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n "domain": "ball",\n oops\n}')
    code, _, err = run(["wet", "--instance", p, "--out", tmp_path], capsys)
    assert code == EXIT_INPUT and f"{p}:3:" in err


def test_missing_file(tmp_path, capsys):
    code, _, err = run(["wet", "--instance", tmp_path / "nope.json", "--out", tmp_path], capsys)
    assert code == EXIT_INPUT and "nope.json" in err


def test_unequal_weights_are_infeasible_for_wetting(tmp_path, instances_dir, capsys):
    code, _, err = run(["wet", "--instance", instances_dir / "general_y.json", "--out", tmp_path], capsys)
    assert code == EXIT_INFEASIBLE and "equal weights" in err


def test_oversized_delta_is_infeasible(tmp_path, instances_dir, capsys):
    code, _, _ = run(["oracle", "--instance", instances_dir / "symmetric_y.json", "--delta", "5", "--out", tmp_path,
                      *FAST], capsys)
    assert code == EXIT_INFEASIBLE


def test_negative_delta_is_input_error(tmp_path, instances_dir, capsys):
    code, _, _ = run(["wet", "--instance", instances_dir / "symmetric_y.json", "--delta", "-1", "--out", tmp_path],
                     capsys)
    assert code == EXIT_INPUT


@pytest.fixture(scope="module")
def oracle_dir(tmp_path_factory, instances_dir):
    d = tmp_path_factory.mktemp("oracle")
    assert main(["oracle", "--instance", str(instances_dir / "symmetric_y.json"), "--out", str(d), *FAST]) == 0
    return d


def test_oracle_outputs(oracle_dir):
    f = LabelField.load(oracle_dir / "field.pgm")
    assert f.shape == (48, 48) and f.meta["spec"]["domain"] == "ball"
    rows = list(csv.reader(open(oracle_dir / "trace.csv")))
    assert rows[0][0] == "sweep" and len(rows) > 2
    man = json.loads((oracle_dir / "manifest.json").read_text())
    assert man["seed"] == 0 and man["overrides"]["resolution"] == 24


def test_verify_field(oracle_dir, capsys):
    code, out, _ = run(["verify", oracle_dir / "field.pgm"], capsys)
    assert code in (EXIT_OK, EXIT_FAIL)
    assert "saturation" in out


def test_sweep(tmp_path, instances_dir, capsys):
    code, out, _ = run(["sweep", "--instance", instances_dir / "symmetric_y.json", "--deltas", "0.04,0.02,0.01",
                        "--workers", "1", "--out", tmp_path, *FAST], capsys)
    assert code in (EXIT_OK, EXIT_FAIL)
    rows = list(csv.DictReader(open(tmp_path / "summary.csv")))
    assert tuple(rows[0]) == SUMMARY_COLUMNS and len(rows) == 3
    for d in ("0.04", "0.02", "0.01"):
        assert (tmp_path / f"delta_{d}" / "field.pgm").exists()
        assert (tmp_path / f"delta_{d}" / "manifest.json").exists()
    assert "convergence_sweep" in (tmp_path / "report.json").read_text()


def test_bad_deltas(tmp_path, instances_dir, capsys):
    code, _, _ = run(["sweep", "--instance", instances_dir / "symmetric_y.json", "--deltas", "a,b", "--out", tmp_path],
                     capsys)
    assert code == EXIT_INPUT


def _svg_ok(path: Path):
    root = ET.fromstring(path.read_text())
    assert root.tag.endswith("svg")


def test_render_every_artifact(tmp_path, oracle_dir, instances_dir, capsys):
    run(["wet", "--instance", instances_dir / "symmetric_y.json", "--out", tmp_path], capsys)
    run(["verify", tmp_path / "wetted.json", "--out", tmp_path / "ver"], capsys)
    arts = [tmp_path / "wetted.json", tmp_path / "manifest.json", tmp_path / "ver" / "report.json",
            oracle_dir / "field.pgm", oracle_dir / "field.pgm.json", oracle_dir / "trace.csv"]
    for a in arts:
        target = tmp_path / (a.name + ".svg")
        code, _, _ = run(["render", a, "--out", target], capsys)
        assert code == EXIT_OK
        _svg_ok(target)


def test_render_summary_csv(tmp_path, capsys):
    p = tmp_path / "summary.csv"
    p.write_text("delta,hausdorff_chambers,hausdorff_G_sigma\n0.04,0.1,0.2\n0.01,0.05,0.1\n")
    code, out, _ = run(["render", p], capsys)
    assert code == EXIT_OK
    _svg_ok(Path(out.strip()))


def test_render_garbage(tmp_path, capsys):
    p = tmp_path / "x.json"
    p.write_text("not json")
    code, _, _ = run(["render", p], capsys)
    assert code == EXIT_INPUT
