import json
import subprocess
import sys

import pytest

from nlwe.cli import main, run_jobs, Job


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_build_g1(tmp_path, capsys):
    path = tmp_path / "g1.set"
    code, _, _ = run(["build", "g1", str(path)], capsys)
    assert code == 0
    lines = path.read_text().splitlines()
    assert len(lines) == 6 and lines[0].startswith("parties 3 6")


def test_build_strong_to_stdout(capsys):
    code, out, _ = run(["build", "strong:0,1,2"], capsys)
    assert code == 0 and len(out.splitlines()) == 28


def test_build_unknown(capsys):
    code, out, err = run(["build", "g9"], capsys)
    assert code == 2 and "unknown set name" in err and out == ""


def test_verify_theorem1_json(tmp_path, capsys):
    path = tmp_path / "t1.json"
    code, out, _ = run(["verify", "theorem1", "--json", str(path)], capsys)
    assert code == 0 and out.startswith("PASS")
    rep = json.loads(path.read_text())
    assert rep["status"] == "pass" and rep["command"] == "verify theorem1"
    (chk,) = rep["checks"]
    assert [o["match"]["matched"] for o in chk["certificate"]["outcomes"]] == [True, True]


def test_verify_redundancy_g3_has_witnesses(capsys):
    code, out, _ = run(["verify", "redundancy", "g3", "--json", "-"], capsys)
    assert code == 0
    rep = json.loads(out)
    pats = rep["checks"][0]["witnesses"]
    assert pats and all(p["witness_count"] >= 1 for p in pats)


def test_verify_upb_g3_guard(capsys):
    code, _, _ = run(["verify", "upb", "g3"], capsys)
    assert code == 2


def test_corrupted_file_fails_with_pair(tmp_path, capsys):
    src = tmp_path / "g1.set"
    run(["build", "g1", str(src)], capsys)
    lines = src.read_text().splitlines()
    lines[1] = "psi1 | 1,0,0 | 1,1,1,1,1,1"
    bad = tmp_path / "bad.set"
    bad.write_text("\n".join(lines) + "\n")
    code, out, _ = run(["verify", "orthogonality", "--set", str(bad), "--json", "-"], capsys)
    assert code == 1
    rep = json.loads(out)
    assert rep["checks"][0]["witnesses"][0]["pair"] == ["psi1", "psi5"]


def test_protocol_from_file(tmp_path, capsys):
    from nlwe.protocols import build_g1_protocol
    from nlwe.textio import format_protocol
    sp = tmp_path / "g1.set"
    pp = tmp_path / "g1.proto"
    run(["build", "g1", str(sp)], capsys)
    pp.write_text(format_protocol(build_g1_protocol()))
    code, _, _ = run(["verify", "protocol", "--set", str(sp), "--protocol", str(pp)], capsys)
    assert code == 0


@pytest.mark.parametrize("argv", [
    ["verify", "orthogonality"],
    ["verify", "orthogonality", "nope"],
    ["verify", "theorem1", "g1"],
    ["verify", "protocol", "tiles"],
    ["verify", "orthogonality", "--set", "/nonexistent/file"],
])
def test_usage_errors(argv, capsys):
    code, _, _ = run(argv, capsys)
    assert code == 2


def test_bad_check_name_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code == 2


def test_json_is_byte_stable(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        run(["verify", "protocol", "g4", "--json", str(p)], capsys)

    def strip(p):
        return [ln for ln in p.read_text().splitlines() if "wall_time_ms" not in ln]
    assert strip(a) == strip(b)


def test_threads_keep_order():
    jobs = [Job("orthogonality", n) for n in ("g1", "g2", "tiles", "shifts")]
    recs, timed_out = run_jobs(jobs, 60, 4)
    assert not timed_out
    assert [r["target"] for r in recs] == ["g1", "g2", "tiles", "shifts"]
    assert all(r["status"] == "pass" for r in recs)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nlwe", "verify", "orthogonality", "g1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "PASS" in proc.stdout
