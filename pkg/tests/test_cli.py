import csv
import io
import json
import math
import subprocess
import sys

import pytest

from spectral_irred.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    header = json.loads(lines[0][2:])
    return header, list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_trees(capsys):
    code, out, _ = run(capsys, "trees", "--family", "pt-cubic", "--max-edges", "7")
    assert code == 0
    lines = out.splitlines()
    assert json.loads(lines[0][2:])["parameters"]["max_edges"] == 7
    assert len(lines) == 4 and all(ln.startswith("5;") for ln in lines[1:])


def test_orbits(capsys):
    code, out, _ = run(capsys, "orbits", "--family", "pt-cubic", "--max-edges", "9")
    data = json.loads(out)
    assert code == 0 and data["orbit_count"] == 1 and data["header"]["command"] == "orbits"


def test_qes(capsys):
    code, out, _ = run(capsys, "qes", "--family", "qes-sextic:m=1,p=0", "--alpha", "0")
    roots = sorted(r[0] for r in json.loads(out)["roots"])
    assert code == 0 and roots == pytest.approx([-2 * math.sqrt(2), 2 * math.sqrt(2)])


def test_eigs(capsys):
    code, out, _ = run(capsys, "eigs", "--family", "even-quartic", "--radius", "3")
    data = json.loads(out)
    assert code == 0 and data["count"] == 1
    assert data["eigenvalues"][0][0] == pytest.approx(1.0603620904841, abs=1e-9)


def test_det_grid(capsys):
    code, out, _ = run(capsys, "det", "--family", "pt-cubic", "--grid", "3", "--radius", "1")
    header, rows = _csv(out)
    assert code == 0 and header["command"] == "det" and len(rows) == 9
    assert set(rows[0]) == {"alpha_re", "alpha_im", "lambda_re", "lambda_im", "F_re", "F_im", "log_scale"}


def test_track(capsys):
    path = json.dumps([[0, 0], [0, 1.1], [0.3, 1.414], [0, 1.714], [-0.3, 1.414], [0, 1.1], [0, 0]])
    code, out, _ = run(capsys, "track", "--family", "qes-sextic:m=1,p=0", "--path", path,
                       "--lam0", str(2 * math.sqrt(2)))
    _, rows = _csv(out)
    assert code == 0 and float(rows[-1]["lambda_re"]) == pytest.approx(-2 * math.sqrt(2), abs=1e-9)


def test_branch(capsys):
    code, out, _ = run(capsys, "branch", "--family", "qes-quartic:m=2", "--radius", "1")
    _, rows = _csv(out)
    assert code == 0 and len(rows) == 1 and rows[0]["permutation"] == "(0 1)"


def test_out_file(capsys, tmp_path):
    target = tmp_path / "q.json"
    code, out, _ = run(capsys, "qes", "--family", "qes-quartic:m=1", "--alpha", "2", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["roots"] == [[4.0, 0.0]]


@pytest.mark.parametrize("argv", [
    ("qes", "--family", "octic"),
    ("rescale", "--family", "pt-cubic"),
    ("track", "--family", "pt-cubic"),
    ("qes", "--family", "pt-cubic"),
    ("trees", "--family", "pt-cubic", "--max-edges", "7", "--threads", "0"),
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert set(json.loads(err)) == {"error", "message"}


def test_numeric_error(capsys):
    code, _, err = run(capsys, "track", "--family", "qes-sextic:m=1,p=0", "--path", "[[0,0],[1,0]]", "--lam0", "5")
    assert code == 3 and json.loads(err)["error"] == "ResolutionError"


def test_argparse_exit_code():
    proc = subprocess.run([sys.executable, "-m", "spectral_irred.cli", "trees", "--family", "pt-cubic"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
