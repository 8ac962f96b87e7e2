import json
import subprocess
import sys

import pytest

from qmidconv.cli import main

ESTAR = {"format": "qmc-system-v1", "kind": "partial-fraction", "scalars": "rational", "m": 1, "q": "1/2",
         "poles": ["2"], "B": [[["1/2"]]], "B_inf": [["1/4"]]}


def _write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def _run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


@pytest.fixture
def estar_file(tmp_path):
    return _write(tmp_path, "estar.json", ESTAR)


def test_spectype_json(estar_file, capsys):
    code, out = _run(["spectype", estar_file, "--json"], capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["command"] == "spectype"
    assert rep["results"]["spectral_type"] == "1;1;1" and rep["results"]["idx"] == 2


def test_catalog_heine_spectype(tmp_path, capsys):
    path = str(tmp_path / "heine.json")
    assert main(["catalog", "heine", "-o", path]) == 0
    code, out = _run(["spectype", path, "--json"], capsys)
    assert code == 0 and json.loads(out.out)["results"]["spectral_type"] == "1,1;1,1;1,1"


def test_mc_writes_system(estar_file, tmp_path, capsys):
    out_path = tmp_path / "mc.json"
    code, out = _run(["mc", estar_file, "--mult", "1/8", "-o", str(out_path), "--json"], capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["results"]["dim"] == 2 and rep["results"]["idx"] == [2, 2]
    written = json.loads(out_path.read_text())
    assert written["m"] == 2
    code, out = _run(["mc", estar_file, "--mult", "1/4", "--json"], capsys)
    assert code == 0 and json.loads(out.out)["results"]["dim"] == 1


def test_bad_multiplier_and_format(estar_file, tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["mc", estar_file, "--mult", "0"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["mc", estar_file, "--mult", "0.5"])
    assert exc.value.code == 2
    assert main(["spectype", _write(tmp_path, "bad.json", {"format": 1})]) == 2
    assert main(["spectype", str(tmp_path / "missing.json")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["catalog", "nope"])
    assert exc.value.code == 2


def test_non_fuchsian_exit(tmp_path, capsys):
    nf = {"format": "qmc-system-v1", "kind": "polynomial", "scalars": "rational", "m": 2, "q": "1/2",
          "A": [[["0", "0"], ["0", "-1"]], [["6", "-6"], ["2", "-1"]]]}
    path = _write(tmp_path, "nf.json", nf)
    assert main(["spectype", path, "--require-fuchsian"]) == 3
    assert main(["mc", path, "--mult", "1/8"]) == 3


def test_collapse_exit(tmp_path, capsys):
    col = dict(ESTAR, B_inf=[["1/2"]])
    assert main(["mc", _write(tmp_path, "col.json", col), "--mult", "1/2"]) == 4


def test_verify_exit_codes(estar_file, tmp_path, capsys):
    code, out = _run(["verify", estar_file, "--json"], capsys)
    assert code == 0
    viol = {"format": "qmc-system-v1", "kind": "partial-fraction", "scalars": "rational", "m": 2, "q": "1/2",
            "poles": ["2", "3"], "B": [[["1", "0"], ["0", "0"]], [["1", "0"], ["0", "0"]]],
            "B_inf": [["1", "0"], ["0", "1"]]}
    code, out = _run(["verify", _write(tmp_path, "viol.json", viol), "--json"], capsys)
    assert code == 5 and "theorems not asserted" in out.out


def test_verify_parallel_random(capsys):
    code, out = _run(["verify", "--random", "3", "--suite", "oracle", "--suite", "parity", "--jobs", "2", "--json"],
                     capsys)
    rep = json.loads(out.out)
    assert code == 0 and len(rep["checks"]) == 6 and all(c["status"] == "pass" for c in rep["checks"])


def test_euler_check(capsys):
    code, out = _run(["euler-check", "--json"], capsys)
    assert code == 0 and json.loads(out.out)["results"]["verdict"] == "pass"
    assert main(["euler-check", "--mult", "1"]) == 0
    capsys.readouterr()
    code, out = _run(["euler-check", "--b-prime", "40"], capsys)
    assert code == 5 and "do not decay" in out.err


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "qmidconv.cli", "catalog", "estar"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["B_inf"] == [["1/4"]]
