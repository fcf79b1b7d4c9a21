import subprocess
import sys

import pytest

from noswitch.cli import (
    ATTACK_COLUMNS,
    BB84_COLUMNS,
    KEYRATE_COLUMNS,
    VERIFY_COLUMNS,
    fmt,
    main,
    read_csv,
)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_keyrate_unit_transmission(capsys):
    code, out, _ = run(capsys, "keyrate", "--eta", "1.0", "--vn", "1", "--va", "100")
    assert code == 0
    assert out == (
        "eta,v_n,v_a,delta_i_noswitch,delta_i_switch,v_ab,v_eb_bound\n"
        "1,1,100,5.65821148,3.32192809,1,50.5\n"
    )


def test_keyrate_zero_transmission(capsys):
    _, out, _ = run(capsys, "keyrate", "--eta", "0", "--vn", "1", "--va", "100")
    assert read_csv(out)[0]["delta_i_noswitch"] == 0


def test_keyrate_sweep_grid(capsys):
    _, out, _ = run(capsys, "keyrate", "--eta-min", "0", "--eta-max", "1", "--eta-steps", "11", "--vn-min", "1",
                    "--vn-max", "2", "--vn-steps", "3")
    rows = read_csv(out)
    assert list(rows[0]) == KEYRATE_COLUMNS
    assert len(rows) == 33
    keys = [(r["eta"], r["v_n"]) for r in rows]
    assert keys == sorted(keys)
    assert sorted({r["eta"] for r in rows}) == pytest.approx([k / 10 for k in range(11)])
    assert "\r" not in out


def test_attack_rows(capsys):
    _, out, _ = run(capsys, "attack", "--eta-min", "0.3", "--eta-max", "0.6", "--eta-steps", "2", "--vn-min", "1",
                    "--vn-max", "1.5", "--vn-steps", "2")
    rows = read_csv(out)
    assert list(rows[0]) == ATTACK_COLUMNS
    assert len(rows) == 8
    for r in rows:
        assert r["gap"] >= -1e-9
        assert r["feasible"] is True
        if r["v_n"] == 1:
            assert r["epsilon_star"] == pytest.approx(r["eta"], abs=1e-9)
            assert r["v_added"] == 0
    for coh, ent in zip(rows[::2], rows[1::2]):
        assert (coh["attack_kind"], ent["attack_kind"]) == ("coherent", "entanglement")
        assert abs(coh["delta_i_attack"] - ent["delta_i_attack"]) < 1e-3


def test_attack_fixed_epsilon(capsys):
    _, out, _ = run(capsys, "attack", "--eta", "0.5", "--vn", "1.5", "--epsilon", "0.3", "--kind", "coherent")
    (row,) = read_csv(out)
    assert row["epsilon_star"] == 0.3


def test_attack_rejects_edge_transmission(capsys):
    code, _, err = run(capsys, "attack", "--eta", "1", "--vn", "1")
    assert code == 1 and "eta" in err


def test_verify_default_passes(capsys):
    code, out, _ = run(capsys, "verify")
    rows = read_csv(out)
    assert code == 0
    assert list(rows[0]) == VERIFY_COLUMNS
    assert len(rows) >= 20
    assert all(r["status"] == "pass" and r["se_multiple"] <= 5 for r in rows)


def test_verify_negative_control(capsys):
    code, out, _ = run(capsys, "verify", "--n", "100000", "--corrupt", "V_B+ heterodyne")
    assert code == 2
    bad = [r for r in read_csv(out) if r["status"] == "FAIL"]
    assert [r["check"] for r in bad] == ["V_B+ heterodyne"]
    assert bad[0]["se_multiple"] > 5


def test_verify_standard_error_scaling(capsys):
    _, small, _ = run(capsys, "verify", "--n", "10000")
    _, large, _ = run(capsys, "verify")
    ratio = read_csv(small)[0]["std_error"] / read_csv(large)[0]["std_error"]
    assert ratio == pytest.approx(10, rel=0.15)


def test_verify_seed_collision_warns(capsys):
    code, _, err = run(capsys, "verify", "--n", "10000", "--seed", "3", "3")
    assert code == 0 and "warning" in err


def test_verify_minimum_samples(capsys):
    code, _, err = run(capsys, "verify", "--n", "9999")
    assert code == 1 and "--n" in err


def test_bb84(capsys):
    _, out, _ = run(capsys, "bb84", "--trials", "1000000")
    rows = read_csv(out)
    assert list(rows[0]) == BB84_COLUMNS
    sw, ns = rows
    assert sw["variant"] == "switching" and ns["variant"] == "no-switching"
    assert sw["bits_per_signal"] == pytest.approx(0.5, abs=0.005)
    assert ns["bits_per_signal"] == pytest.approx(0.35, abs=0.005)


def test_bb84_single_trial(capsys):
    code, out, _ = run(capsys, "bb84", "--trials", "1")
    assert code == 0 and len(read_csv(out)) == 2


def test_output_file_round_trip(tmp_path, capsys):
    path = tmp_path / "k.csv"
    assert main(["keyrate", "--eta", "0.5", "--vn", "1.2", "-o", str(path)]) == 0
    assert capsys.readouterr().out == ""
    (row,) = read_csv(path)
    assert row["eta"] == 0.5 and row["v_n"] == 1.2


def test_unwritable_output(tmp_path, capsys):
    code, _, err = run(capsys, "keyrate", "--eta", "0.5", "--vn", "1", "-o", str(tmp_path / "no" / "x.csv"))
    assert code == 1 and "cannot write" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["keyrate", "--eta", "1.5", "--vn", "1"],
        ["keyrate", "--eta", "0.5", "--vn", "0.5"],
        ["keyrate", "--vn", "1"],
        ["keyrate", "--eta", "0.5", "--eta-min", "0", "--vn", "1"],
        ["attack", "--eta", "0.5", "--vn", "1", "--vsqz", "a,b"],
        ["bb84", "--trials", "0"],
    ],
)
def test_invalid_flags_exit_one(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and "error" in err


def test_argparse_errors_exit_one():
    proc = subprocess.run([sys.executable, "-m", "noswitch", "keyrate", "--bogus"], capture_output=True, text=True)
    assert proc.returncode == 1 and "unrecognized" in proc.stderr
    proc = subprocess.run([sys.executable, "-m", "noswitch"], capture_output=True, text=True)
    assert proc.returncode == 1


def test_float_formatting():
    assert fmt(-0.0) == "0"
    assert fmt(1 / 3) == "0.333333333"
    assert fmt(True) == "true"
    assert fmt(float("nan")) == "nan"
    assert fmt(7) == "7"
