import subprocess
import sys

import pytest

from sgfem1d.cli import main
from sgfem1d.problems import make_problem


def test_element(capsys, tmp_path):
    out = tmp_path / "A.txt"
    assert main(["element", "--problem", "Smooth", "--n-list", "10", "--element", "3", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "A22" in text and "0.1" in text
    assert out.read_text().splitlines()[0].split()[0] == "21"


def test_solve(capsys):
    assert main(["solve", "--problem", "Discontinuous", "--c", "0.41", "--n-list", "32"]) == 0
    assert "energy error" in capsys.readouterr().out


def test_convergence_outputs(tmp_path, capsys):
    csv_path, svg_path = tmp_path / "c.csv", tmp_path / "c.svg"
    rc = main(["convergence", "--problem", "Smooth", "--n-list", "8,16,32,64", "--out", str(csv_path),
               "--plot", str(svg_path), "--expect", "2", "--slope-tol", "0.1"])
    assert rc == 0
    assert len(csv_path.read_text().splitlines()) == 5
    assert svg_path.read_text().startswith("<svg")


def test_slope_mismatch_exit_code(capsys):
    rc = main(["condition", "--problem", "Validation1a", "--n-list", "20,40,80", "--expect", "4"])
    assert rc == 2
    assert "FAIL" in capsys.readouterr().out


def test_runtime_error_exit_code(capsys):
    assert main(["solve", "--problem", "Smooth", "--n-list", "1"]) == 1
    assert "error" in capsys.readouterr().err


def test_assumptions_and_bauer(capsys):
    assert main(["assumptions", "--family", "interface"]) == 0
    assert main(["bauer", "--problem", "Validation1a", "--n-list", "50"]) == 0
    assert "False" not in capsys.readouterr().out


def test_eta(capsys):
    assert main(["eta", "--problem", "Validation4", "--n-list", "50,100,200", "--all-points"]) == 0
    assert "eta / (K eps)" in capsys.readouterr().out


def test_problem_file(tmp_path, capsys):
    path = tmp_path / "p.txt"
    path.write_text(make_problem("Interface1", beta=0.4).to_text())
    assert main(["solve", "--problem-file", str(path), "--n-list", "16"]) == 0
    assert "Interface1" in capsys.readouterr().out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "sgfem1d", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "convergence" in res.stdout


def test_bad_choice_exits():
    with pytest.raises(SystemExit):
        main(["solve", "--problem", "Nope"])
