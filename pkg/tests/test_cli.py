import json

import numpy as np
import pytest

from besovkit.cli import main
from besovkit.lattice import read_ffld


@pytest.fixture
def phis(tmp_path):
    out = {}
    for name, obj in {
        "one": {"variant": "constant", "params": {"c": 1.0}, "d": 1, "p": 2},
        "power": {"variant": "power", "params": {"u": 0.25}, "d": 1, "p": 2},
        "bad": {"variant": "power", "params": {"u": 0.9}, "d": 1, "p": 2},
        "critical": {"variant": "power", "params": {"u": 0.5}, "d": 1, "p": 2},
    }.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(obj))
        out[name] = str(path)
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_phi_check(capsys, phis, tmp_path):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "phi-check", "--phi", phis["power"], "--p", 2, "--d", 1, "--out", out)
    assert code == 0 and stdout.count("\n") == 1
    res = json.loads(out.read_text())
    assert res["member"] is True and res["epsilon"] == pytest.approx(0.25, abs=1e-3)
    code, _, _ = run(capsys, "phi-check", "--phi", phis["bad"])
    assert code == 0


def test_constant_field_norm(capsys, phis, tmp_path):
    f = tmp_path / "c.ffld"
    assert run(capsys, "field", "gen", "--kind", "constant", "--value", "-3", "--out", f)[0] == 0
    out = tmp_path / "n.json"
    code, stdout, _ = run(capsys, "norm", "--space", "B", "--s", 0.5, "--p", 2, "--q", 2, "--phi", phis["one"], "--field", f, "--out", out)
    assert code == 0
    res = json.loads(out.read_text())
    assert res["value"] == pytest.approx(3.0, rel=1e-13)
    assert res["maximizing_cube"] == {"j": 0, "k": [0]}
    assert set(res) == {"value", "maximizing_cube", "per_level_profile"}


def test_field_info_and_cat(capsys, tmp_path):
    f = tmp_path / "r.ffld"
    run(capsys, "field", "gen", "--grid", "1,0,6", "--seed", 3, "--out", f)
    before = f.read_bytes()
    code, stdout, _ = run(capsys, "field", "info", f, "--J-max", 4)
    assert code == 0
    info = json.loads(stdout.strip().rsplit("\n", 1)[0])
    assert info["grid"] == {"d": 1, "m": 0, "n": 6} and info["band_excess"] < 1e-12
    code, stdout, _ = run(capsys, "field", "cat", f)
    vals = np.array([complex(*map(float, line.split(","))) for line in stdout.strip().splitlines()])
    assert np.array_equal(vals, read_ffld(f).values)
    assert f.read_bytes() == before


def test_blocks_maximal_lift(capsys, tmp_path):
    f = tmp_path / "r.ffld"
    run(capsys, "field", "gen", "--out", f)
    assert run(capsys, "blocks", "--field", f, "--prefix", tmp_path / "b")[0] == 0
    parts = [read_ffld(tmp_path / f"b_{j}.ffld").values for j in range(8)]
    assert np.max(np.abs(sum(parts) - read_ffld(f).values)) < 1e-10
    for kind in ("hl", "powered"):
        assert run(capsys, "maximal", "--field", f, "--kind", kind, "--eta", 0.5, "--out", tmp_path / "m.ffld")[0] == 0
    assert run(capsys, "maximal", "--field", f, "--kind", "peetre", "--j", 2, "--out", tmp_path / "p.ffld")[0] == 0
    assert run(capsys, "maximal", "--field", f, "--kind", "peetre", "--out", tmp_path / "p.ffld")[0] == 2
    run(capsys, "lift", "--field", f, "--kappa", 1.5, "--out", tmp_path / "l.ffld")
    run(capsys, "lift", "--field", tmp_path / "l.ffld", "--kappa", -1.5, "--out", tmp_path / "l2.ffld")
    assert np.allclose(read_ffld(tmp_path / "l2.ffld").values, read_ffld(f).values, atol=1e-12)


def test_norm_variants_and_errors(capsys, phis, tmp_path):
    f = tmp_path / "r.ffld"
    run(capsys, "field", "gen", "--out", f)
    for space in ("F", "LpPhi"):
        assert run(capsys, "norm", "--space", space, "--p", 2, "--q", 1, "--phi", phis["power"], "--field", f)[0] == 0
    assert run(capsys, "norm", "--space", "BinftyInfty", "--s", 1, "--field", f)[0] == 0
    # argument errors exit 2, unmet hypotheses exit 3
    assert run(capsys, "norm", "--space", "B", "--p", 0, "--phi", phis["power"], "--field", f)[0] == 2
    assert run(capsys, "norm", "--space", "B", "--phi", phis["power"], "--field", tmp_path / "missing.ffld")[0] == 2
    assert run(capsys, "norm", "--space", "Q", "--field", f)[0] == 2
    code, _, err = run(capsys, "norm", "--space", "B", "--p", 2, "--phi", phis["bad"], "--field", f)
    assert code == 3 and "nondecreasing" in err
    code, _, err = run(capsys, "norm", "--space", "F", "--p", 2, "--q", 2, "--phi", phis["critical"], "--field", f)
    assert code == 3 and "epsilon-condition" in err


def test_atoms_round_trip(capsys, phis, tmp_path):
    f = tmp_path / "r.ffld"
    run(capsys, "field", "gen", "--grid", "1,0,8", "--J-max", 6, "--out", f)
    dec = tmp_path / "dec.json"
    code, _, _ = run(capsys, "atoms", "decompose", "--field", f, "--J-max", 6, "--phi", phis["power"], "--s", 0.5, "--atoms-dir", tmp_path / "at", "--out", dec)
    assert code == 0
    obj = json.loads(dec.read_text())
    assert obj["C_norm"] >= 1 and all(set(e) == {"j", "m", "re", "im"} for e in obj["r"])
    syn = tmp_path / "s.ffld"
    assert run(capsys, "atoms", "synthesize", "--coeffs", dec, "--atoms-dir", tmp_path / "at", "--out", syn)[0] == 0
    a, b = read_ffld(f).values, read_ffld(syn).values
    assert np.max(np.abs(a - b)) < 1e-6 * np.max(np.abs(a))
    # the b-norm of the coefficients is reachable from the CLI too
    coeffs = tmp_path / "r_only.json"
    coeffs.write_text(json.dumps(obj["r"]))
    assert run(capsys, "norm", "--space", "b", "--grid", "1,0,8", "--p", 2, "--phi", phis["power"], "--coeffs", coeffs)[0] == 0


def test_atoms_validate(capsys, tmp_path):
    a = tmp_path / "a.ffld"
    assert run(capsys, "field", "gen", "--kind", "atoms", "--grid", "1,2,9", "--out", a)[0] == 0
    code, stdout, _ = run(capsys, "atoms", "validate", "--field", a, "--j", 0, "--k", 0)
    assert code == 0 and "valid=True" in stdout
    # the same samples attached to a distant cube leak out of its support
    code, _, _ = run(capsys, "atoms", "validate", "--field", a, "--j", 0, "--k", 2)
    assert code == 1
    assert run(capsys, "atoms", "decompose")[0] == 2


def test_verify_is_byte_identical(capsys, tmp_path):
    r1, r2 = tmp_path / "1.json", tmp_path / "2.json"
    assert run(capsys, "verify", "--suite", "nesc", "--seed", 7, "--out", r1)[0] == 0
    assert run(capsys, "verify", "--suite", "nesc", "--seed", 7, "--out", r2)[0] == 0
    assert r1.read_bytes() == r2.read_bytes()
    reports = json.loads(r1.read_text())
    assert all(r["schema"] == "besovkit/1" for r in reports)


def test_verify_reports_failure_code(capsys, tmp_path):
    # pinning an impossible baseline makes the bounded check fail
    base = tmp_path / "base.json"
    cfg = {"d": 1, "m": 0, "n": 7, "J_max": 5, "seed": 0, "count": 2}
    base.write_text(json.dumps({"schema": "besovkit/1", "config": cfg, "constants": {}}))
    args = ["verify", "--suite", "peetre", "--grid", "1,0,7", "--count", 2, "--no-stability", "--baseline", base]
    assert run(capsys, *args)[0] == 0
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, *args, "--out", out)
    key = None
    for r in json.loads(out.read_text()):
        key = r["check_id"] + "|" + json.dumps(r["params"], sort_keys=True)
        break
    base.write_text(json.dumps({"schema": "besovkit/1", "config": cfg, "constants": {key: 1e-9}}))
    code, stdout, _ = run(capsys, *args)
    assert code == 1 and "failed" in stdout


def test_bad_flags_exit_2(capsys):
    assert main(["verify", "--grid", "1,0"]) == 2
    assert main(["nonsense"]) == 2
    assert main([]) == 2
