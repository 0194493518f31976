import csv
import json

import numpy as np
import pytest

from ccrkit import __version__
from ccrkit.cli import fmt, main, parse_state, quantifiers
from ccrkit.errors import ParseError

BELL = {"dims": [2, 2], "vector": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]]}
DIAG = {"dims": [2], "matrix": [[0.75, 0], [0, 0], [0, 0], [0.25, 0]]}


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_fmt():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(-0.0) == "0"
    assert fmt(True) == "true"
    assert fmt(7) == "7"
    assert fmt(1e-20) == "1e-20"


def test_verify_pure_passes(tmp_path):
    out = tmp_path / "v.csv"
    rc = main(["verify", "--relation", "ccr-pure", "--dims", "2x2", "--trials", "1000",
               "--tol", "1e-10", "--seed", "7", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out)
    assert len(rows) == 1000
    assert max(float(r["residual"]) for r in rows) <= 1e-10
    side = json.loads((tmp_path / "v.csv.json").read_text())
    assert side["seed"] == 7 and side["version"] == __version__
    assert side["config"]["dims"] == [2, 2] and side["summary"]["failures"] == 0


def test_verify_failure_exit_code(tmp_path):
    # a tolerance below round-off forces failures
    rc = main(["verify", "--relation", "ccr-mutual-info", "--trials", "20", "--tol", "0",
               "--seed", "1", "--out", str(tmp_path / "f.csv")])
    assert rc == 2


def test_verify_tessier_rejects_qutrits(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["verify", "--relation", "ccr-tessier", "--dims", "3x3", "--seed", "1", "--out", str(out)]) == 1
    assert "NotTwoQubit" in capsys.readouterr().err
    assert not out.exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["verify"],
        ["verify", "--relation", "ccr-nope", "--seed", "1"],
        ["verify", "--relation", "ccr-pure", "--dims", "2xz", "--seed", "1"],
        ["frobnicate"],
        ["decohere", "--input", "sideways"],
    ],
)
def test_usage_errors_exit_one(argv):
    assert main(argv) == 1


def test_verify_koashi_reports_spread(tmp_path):
    out = tmp_path / "k.json"
    rc = main(["verify", "--relation", "ccr-koashi", "--trials", "5", "--tol", "1e-3",
               "--restarts", "4", "--seed", "2", "--out", str(out), "--format", "json"])
    assert rc == 0
    data = json.loads(out.read_text())
    assert all("spread" in r and r["j_mode"] == "projective" for r in data["rows"])


def test_koashi_command(tmp_path):
    out = tmp_path / "kw.csv"
    rc = main(["koashi", "--trials", "4", "--restarts", "4", "--seed", "3", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out)
    assert {r["j_mode"] for r in rows} <= {"projective", "povm"}
    side = json.loads((tmp_path / "kw.csv.json").read_text())
    assert side["summary"]["trials"] == 4 and side["config"]["mode"] == "auto"


def test_decohere_plus(tmp_path):
    out = tmp_path / "d.csv"
    rc = main(["decohere", "--input", "plus", "--gamma", "1", "--tmax", "5", "--steps", "60",
               "--seed", "1", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "time,C_re,P_vn,S_vn,E_f_AE,J_AA,I_AA,ccr_residual"
    rows = read_csv(out)
    assert len(rows) == 60
    assert max(float(r["ccr_residual"]) for r in rows) <= 1e-10
    side = json.loads((tmp_path / "d.csv.json").read_text())
    assert side["pointer_basis_time"] is not None


def test_decohere_zero_and_coarse(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["decohere", "--input", "zero", "--steps", "12", "--seed", "1", "--out", str(out)]) == 0
    assert all(float(r["J_AA"]) == 0 for r in read_csv(out))
    bad = tmp_path / "bad.csv"
    assert main(["decohere", "--steps", "2", "--seed", "1", "--out", str(bad)]) == 1
    assert not bad.exists()


def test_csv_and_json_agree(tmp_path):
    c, j = tmp_path / "a.csv", tmp_path / "a.json"
    args = ["decohere", "--input", "plus", "--steps", "15", "--tmax", "3", "--seed", "4"]
    assert main(args + ["--out", str(c)]) == 0
    assert main(args + ["--out", str(j), "--format", "json"]) == 0
    rows_c = read_csv(c)
    rows_j = json.loads(j.read_text())["rows"]
    for rc_, rj in zip(rows_c, rows_j):
        for k, v in rc_.items():
            assert float(v) == rj[k]


def test_auto_seed_is_reported(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["verify", "--relation", "ccr-pure", "--trials", "3", "--out", str(out)]) == 0
    err = capsys.readouterr().err
    seed = int(err.split("seed:")[1].split()[0])
    assert json.loads((tmp_path / "s.csv.json").read_text())["seed"] == seed


def test_quantifiers_bell(tmp_path, capsys):
    assert main(["quantifiers", str(write(tmp_path, "bell.json", BELL))]) == 0
    table = {k.strip(): v for k, v in (line.rsplit(maxsplit=1) for line in capsys.readouterr().out.splitlines())}
    assert float(table["S_vn"]) == 0
    assert float(table["I_{A:B}"]) == pytest.approx(2, abs=1e-12)
    assert float(table["S_{A|B}"]) == pytest.approx(-1, abs=1e-12)


def test_quantifiers_diag_qubit(tmp_path):
    vals = quantifiers(parse_state(json.dumps(DIAG)))
    assert vals["C_re"] == pytest.approx(0, abs=1e-12)
    assert vals["P_vn"] == pytest.approx(0.1887218755408671361, abs=1e-12)
    assert "I_{A:B}" not in vals
    out = tmp_path / "q.csv"
    assert main(["quantifiers", str(write(tmp_path, "d.json", DIAG)), "--seed", "0", "--out", str(out)]) == 0
    assert read_csv(out)[0]["quantity"] == "S_vn"


@pytest.mark.parametrize(
    "text, line, column",
    [
        ('{"dims": [2],\n "matrix": [[1, 0]', 2, 19),
        ('{"dims": [2],\n  "vector": [[1, 0]]}', 2, 3),
        ('{"matrix": []}', 1, 1),
    ],
)
def test_parse_errors_have_positions(text, line, column):
    with pytest.raises(ParseError) as exc:
        parse_state(text)
    assert (exc.value.line, exc.value.column) == (line, column)


def test_parse_rejects_invalid_state(tmp_path):
    bad = {"dims": [2], "matrix": [[1, 0], [0, 0], [0, 0], [1, 0]]}
    with pytest.raises(ParseError):
        parse_state(json.dumps(bad))
    out = tmp_path / "o.csv"
    assert main(["quantifiers", str(write(tmp_path, "bad.json", "{nope")), "--seed", "0", "--out", str(out)]) == 1
    assert not out.exists()


def test_parse_vector_state():
    st = parse_state(json.dumps(BELL))
    assert st.dims == (2, 2)
    assert np.allclose(np.abs(st.vec) ** 2, [0.5, 0, 0, 0.5])


def test_byte_identical_reruns(tmp_path):
    for fmt_ in ("csv", "json"):
        a, b = tmp_path / f"a.{fmt_}", tmp_path / f"b.{fmt_}"
        args = ["verify", "--relation", "ccr-conditional", "--trials", "30", "--seed", "9", "--format", fmt_]
        main(args + ["--out", str(a)])
        main(args + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()
