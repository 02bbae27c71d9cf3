import json
import subprocess
import sys
from fractions import Fraction

import pytest

from k3glue import cli
from k3glue.catalog import build_K
from k3glue.lattice import SchemaError, dumps_canonical, lattice_to_json
from k3glue.roots import ade_gram


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def a1_file(tmp_path):
    p = tmp_path / "a1.json"
    cli.save_lattice_file(ade_gram("A1"), str(p))
    return p


def test_round_trip_A1(a1_file, capsys):
    L = cli.load_lattice_file(str(a1_file))
    assert dumps_canonical(lattice_to_json(L)) == a1_file.read_text()
    code, out, _ = run(capsys, "--json", "lattice", "show", str(a1_file))
    assert code == 0 and out == a1_file.read_text()


def test_schema_error(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"name": "bad", "rank": 2, "gram": [[-2]]}))
    with pytest.raises(SchemaError):
        cli.load_lattice_file(str(p))
    code, _, err = run(capsys, "lattice", "show", str(p))
    assert code == 2 and "$.gram" in err


def test_K_D8_fixture(tmp_path, capsys):
    p = tmp_path / "kd8.json"
    assert run(capsys, "--out", str(p), "catalog", "build", "--group", "D8", "--which", "K")[0] == 0
    code, out, _ = run(capsys, "lattice", "disc", "--json", str(p))
    assert code == 0 and json.loads(out)["group"] == "(Z/4)^3"


def test_lattice_verbs(a1_file, tmp_path, capsys):
    assert run(capsys, "lattice", "roots", str(a1_file))[1].strip() == "2"
    assert run(capsys, "roots", "count", str(a1_file))[1].strip() == "2"
    assert run(capsys, "roots", "decompose", str(a1_file))[1].strip() == "A1"
    assert run(capsys, "lattice", "isometric", str(a1_file), str(a1_file))[1].strip() == "true"


def test_glue_validate_and_build(tmp_path, capsys):
    L = build_K("Z2").base
    lat = tmp_path / "f.json"
    cli.save_lattice_file(L, str(lat))
    good = tmp_path / "good.json"
    good.write_text(json.dumps([{"num": [1] * 8 + [0] * 8, "den": 2}]))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([{"num": [1] * 6 + [0] * 10, "den": 2}]))
    assert run(capsys, "glue", "validate", str(lat), str(good))[0] == 0
    code, out, _ = run(capsys, "glue", "validate", str(lat), str(bad))
    assert code == 1 and out.startswith("invalid")
    code, out, _ = run(capsys, "--json", "glue", "build", str(lat), str(good))
    assert code == 0 and json.loads(out)["index"] == 2


def test_codes_and_ns(capsys):
    code, out, _ = run(capsys, "--json", "codes", "search", "--field", "3", "--length", "9")
    assert code == 0 and json.loads(out)["dimension"] == 3
    code, out, _ = run(capsys, "--json", "ns", "classify", "--catalog", "M_Z3", "--dsq", "18")
    js = json.loads(out)
    assert code == 0 and js["classes"][0]["coefficients"] == [1, 1, 1, 0, 0, 0]
    code, out, _ = run(capsys, "--json", "ns", "classify", "--catalog", "M_Z3", "--dsq", "4")
    assert json.loads(out)["trivial_only"]


def test_usage_errors(capsys):
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "catalog", "build", "--group", "Z5", "--which", "K")[0] == 2
    assert run(capsys, "lattice", "show", "/nonexistent/file.json")[0] == 2
    assert run(capsys, "--threads", "0", "catalog", "list")[0] == 2
    assert run(capsys, "ns", "classify", "--catalog", "M_Z9", "--dsq", "18")[0] == 2


def test_group_D12_single_row(capsys):
    code, out, _ = run(capsys, "verify-all", "--group", "D12", "--json", "--no-timing")
    js = json.loads(out)
    assert code == 0
    assert {r["claim"].split(".")[0] for r in js["records"]} == {"K_D12"}
    assert "elapsed_seconds" not in js


def test_corrupted_glue_names_row(tmp_path, capsys):
    M = build_K("D12")
    v = M.glue[0].coords
    # half a curve added to the first coordinate leaves the dual lattice
    broken = list(v)
    broken[0] += Fraction(1, 2)
    p = tmp_path / "override.json"
    den = 12
    p.write_text(json.dumps({"version": 1, "rows": {"K_D12": {"glue": [
        {"num": [int(x * den) for x in broken], "den": den}]}}}))
    code, out, _ = run(capsys, "verify-all", "--group", "D12", "--glue-override", str(p), "--no-timing")
    assert code == 1
    assert "FAILED K_D12.glue" in out


def test_override_schema(tmp_path, capsys):
    p = tmp_path / "o.json"
    p.write_text(json.dumps({"rows": {"K_Z99": {"glue": []}}}))
    code, _, err = run(capsys, "catalog", "verify", "--glue-override", str(p))
    assert code == 2 and "K_Z99" in err


def test_catalog_list(capsys):
    code, out, _ = run(capsys, "--json", "catalog", "list")
    assert code == 0 and len(json.loads(out)) == 22


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "k3glue", "catalog", "list"], capture_output=True, text=True)
    assert res.returncode == 0 and "K_Z2" in res.stdout


def test_verify_all_deterministic(full_report):
    other = cli.cmd_verify_all(threads=4)
    assert json.dumps(full_report.to_json(timing=False)) == json.dumps(other.to_json(timing=False))


def test_verify_all_exit_code(full_report, tmp_path):
    # K_Z6.disc is the single failing record, so the exit code is 1
    assert [r.claim for r in full_report.failures()] == ["K_Z6.disc"]
    assert cli.main(["verify-all", "--group", "Z6", "--out", str(tmp_path / "r.md")]) == 1
    assert "FAILED K_Z6.disc" in (tmp_path / "r.md").read_text()
