import json
import subprocess
import sys
from pathlib import Path

import pytest

from ndcstar.cli import main
from ndcstar.systemfile import InputError, dumps, load

SYSTEMS = Path(__file__).resolve().parent.parent / "systems"
Z2 = str(SYSTEMS / "z2_scalar.json")
S3 = str(SYSTEMS / "s3_m2c.json")
Z4 = str(SYSTEMS / "z4_flip.json")


def write(tmp_path, data, name="sys.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


def run_json(args, tmp_path):
    out = tmp_path / "out.json"
    code = main([*args, "--json", str(out)])
    return code, json.loads(out.read_text()), out.read_bytes()


def test_minimal_file_loads(tmp_path):
    path = write(tmp_path, {"algebra": {"blocks": [1]}, "group": {"cyclic": 2}, "action": {"type": "trivial"}})
    system = load(path)
    assert system.group.order == 2 and system.action.is_trivial()
    assert main(["validate", path]) == 0


def test_nonassociative_table_rejected(tmp_path, capsys):
    table = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    path = write(tmp_path, {"algebra": {"blocks": [1]}, "group": {"cayley": table, "identity": 0}})
    with pytest.raises(InputError, match="associativity"):
        load(path)
    assert main(["validate", path]) == 2
    assert "associativity" in capsys.readouterr().err


def test_non_unitary_action_rejected(tmp_path):
    data = {
        "algebra": {"blocks": [1]},
        "group": {"cyclic": 2},
        "action": {"type": "explicit", "elements": [{"unitaries": [[[1]]]}, {"unitaries": [[[2]]]}]},
    }
    path = write(tmp_path, data)
    with pytest.raises(InputError, match=r"unitarity: residual 3"):
        load(path)
    assert main(["validate", path]) == 2


def test_parse_error_has_location(tmp_path):
    path = write(tmp_path, '{"algebra": {"blocks": [1]},\n "group": }')
    with pytest.raises(InputError) as exc:
        load(path)
    assert exc.value.location.endswith(":2:11")


def test_bad_function_values(tmp_path):
    data = {"algebra": {"blocks": [1]}, "group": {"cyclic": 2}, "functions": {"f": [0]}}
    with pytest.raises(InputError, match=r"\$\.functions\.f"):
        load(write(tmp_path, data))


def test_check_nd_on_z2(tmp_path):
    code, rep, _ = run_json(["check", Z2, "--fn", "psi", "--mode", "nd"], tmp_path)
    assert code == 0 and rep["passed"]
    assert rep["result"]["nd_direct"]["passed"] and rep["result"]["nd_gamma"]["passed"]
    assert rep["schema_version"] == 1 and len(rep["system"]) == 64


def test_check_failure_exit_code(tmp_path):
    code, rep, _ = run_json(["check", Z2, "--fn", "bad"], tmp_path)
    assert code == 1 and not rep["passed"]
    assert rep["result"]["agree"]
    assert main(["check", Z2, "--fn", "phi", "--mode", "pd"]) == 0


def test_unknown_function_and_bad_flag(capsys):
    assert main(["check", Z2, "--fn", "nope"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["check", Z2, "--fn", "psi", "--mode", "sideways"])
    assert exc.value.code == 2


def test_precondition_failure_is_check_failure(tmp_path):
    code, rep, _ = run_json(["gns", Z2, "--fn", "bad"], tmp_path)
    assert code == 1 and "error" in rep


def test_gns_report(tmp_path):
    code, rep, _ = run_json(["gns", Z2, "--fn", "psi"], tmp_path)
    assert code == 0
    assert rep["result"]["quotient_rank"] == 1
    gram = rep["result"]["gram"]
    assert gram[1][1] == [[[[2.0, 0.0]]]] and gram[0][0] == [[[[0.0, 0.0]]]]
    assert rep["result"]["verify"]["passed"]


def test_schoenberg_per_t(tmp_path):
    code, rep, _ = run_json(["schoenberg", Z2, "--fn", "psi", "--t", "0.1,1,10"], tmp_path)
    assert code == 0
    assert [r["t"] for r in rep["result"]["per_t"]] == [0.1, 1.0, 10.0]
    code, rep, _ = run_json(["schoenberg", Z2, "--fn", "bad", "--direction", "converse"], tmp_path)
    assert code == 0 and not rep["result"]["pd_on_grid"]


def test_semigroup_and_haagerup(tmp_path):
    code, rep, _ = run_json(["semigroup", S3, "--fn", "psi_central", "--choi", "--t", "0.1,1"], tmp_path)
    assert code == 0
    assert all("choi_min_eigenvalue" in r for r in rep["result"]["semigroup"]["per_t"])
    code, rep, _ = run_json(["haagerup", "build-nd", Z2, "--family", "hs"], tmp_path)
    assert code == 0 and rep["result"]["psi"][1] == [[[[2.25, 0.0]]]]
    code, rep, _ = run_json(["haagerup", "build-family", Z4, "--fn", "psi_central", "--chain", "main"], tmp_path)
    assert code == 0 and rep["result"]["windowed"]
    assert main(["haagerup", "build-nd", Z2, "--family", "missing"]) == 2


def test_report_command(tmp_path):
    code, rep, _ = run_json(["report", Z4], tmp_path)
    assert code == 0
    assert rep["result"]["functions"]["one_minus_cos"]["nd_gamma"]
    assert rep["result"]["functions"]["character_1"]["pd"]


def test_reports_are_byte_stable(tmp_path):
    args = ["semigroup", S3, "--fn", "psi_central", "--choi", "--seed", "7"]
    _, _, first = run_json(args, tmp_path)
    _, _, second = run_json(args, tmp_path)
    assert first == second
    _, rep, _ = run_json([*args, "--timing"], tmp_path)
    assert "wall_time" in rep


def test_dumps_format():
    assert dumps({"a": 0.1, "b": [1, 2.5], "c": float("nan")}) == '{\n  "a": 0.10000000000000001,\n  "b": [1, 2.5],\n  "c": NaN\n}\n'


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ndcstar.cli", "check", Z2, "--fn", "psi"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("check: PASS")
