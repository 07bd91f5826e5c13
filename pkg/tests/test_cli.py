import csv
import io
import json
import math
import subprocess
import sys

import pytest

from weakvalues.cli import EXIT_CONFIG, EXIT_NUMERICAL, main, parse_params


def run_cli(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def run_json(*argv):
    code, text = run_cli(*argv)
    assert code == 0, text
    return json.loads(text)


def test_three_path_union():
    rep = run_json("run", "--scenario", "three-path", "--params", "a=0.3333,a_prime=0.3333",
                   "--observable", "pi_1_union_2", "--delta-f", "0.01")
    f0 = rep["finals"][0]
    assert rep["schema"] == 1
    re, im = f0["weak_value"]
    assert abs(re) < 1e-12 and abs(im) < 1e-12
    assert f0["abl"] == pytest.approx(2 / 3, abs=1e-12)
    # both routes land on the same pointer position and cancel there
    assert abs(f0["conditional_mean"]) < 1e-12


def test_spin_complex_weak_value():
    rep = run_json("run", "--scenario", "spin",
                   "--params", "theta=3.14159264,theta_prime=3.14159264,phi=1,phi_prime=0")
    re, im = rep["finals"][0]["weak_value"]
    assert abs(complex(re, im) - complex(math.cos(1), math.sin(1))) < 1e-6
    assert rep["notes"] == []


def test_spin_exact_pi_note():
    rep = run_json("run", "--scenario", "spin",
                   "--params", f"theta={math.pi},theta_prime={math.pi},phi=1,phi_prime=0")
    assert rep["notes"]
    re, im = rep["finals"][0]["weak_value"]
    assert abs(complex(re, im) - complex(math.cos(1), math.sin(1))) < 1e-6


def test_identity_two_level_abl_equals_weak():
    rep = run_json("run", "--scenario", "identity-two-level", "--observable", "sigma_z")
    for f in rep["finals"]:
        assert f["abl"] == pytest.approx(f["weak_value"][0], abs=1e-12)
        assert f["weak_value"][1] == 0


def test_sweep_limits():
    rep = run_json("sweep", "--scenario", "spin", "--params", "theta=1,theta_prime=2,phi=0.7",
                   "--strengths", "0.001,0.1,10,1000")
    first, last = rep["rows"][0], rep["rows"][-1]
    for i in range(2):
        assert first[f"cond_mean_{i}"] == pytest.approx(first[f"abl_{i}"], abs=1e-6)
        assert last[f"cond_mean_{i}"] == pytest.approx(last[f"re_weak_{i}"], abs=1e-4)
        assert first[f"p_resolved_{i}"] >= 0 and first[f"p_interfering_{i}"] >= 0


def test_sweep_degenerate_is_flat():
    rep = run_json("sweep", "--scenario", "three-path", "--observable", "identity",
                   "--strengths", "0.01,1,100")
    values = [r["cond_mean_0"] for r in rep["rows"]]
    assert max(values) - min(values) < 1e-10
    assert values[0] == pytest.approx(1.0, abs=1e-10)


def test_sweep_csv_header():
    code, text = run_cli("sweep", "--scenario", "three-path", "--strengths", "0.1,1", "--output", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0][:8] == ["delta_f", "cond_mean_0", "abl_0", "re_weak_0", "p_0",
                           "p_resolved_0", "p_interfering_0", "uncond_mean_0"]
    assert len(rows) == 3


def test_run_csv_marks_divergence():
    code, text = run_cli("run", "--scenario", "three-path", "--params", "a=0.4,a_prime=0",
                         "--observable", "pi_1_union_2", "--output", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows[0]["weak_value"].startswith("divergent")


def test_mc_reproducible(tmp_path):
    argv = ["mc", "--scenario", "spin", "--params", "theta=1,theta_prime=2,phi=0.7",
            "--trials", "20000", "--seed", "9", "--delta-f", "0.01"]
    a = run_cli(*argv, "--dump-trials", str(tmp_path / "a.csv"))
    b = run_cli(*argv, "--dump-trials", str(tmp_path / "b.csv"))
    assert a == b and a[0] == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.csv").read_text().startswith("trial,final_index,reading\n")
    rep = json.loads(a[1])
    assert rep["regime"] == "strong"
    for f in rep["finals"]:
        assert abs(f["mean"] - f["oracle_abl"]) < 4 * f["mean_stderr"]


def test_mc_auto_weak():
    rep = run_json("mc", "--scenario", "three-path", "--trials", "1000", "--delta-f", "5")
    assert rep["regime"] == "weak"


def test_response_ratio():
    rep = run_json("response", "--scenario", "spin", "--params", "theta=2,theta_prime=2,phi=1",
                   "--strength", "0.01")
    f = rep["finals"][0]
    assert abs(f["residual"]) <= 5e-4 * 0.01
    assert f["residual_ratio"] == pytest.approx(4, rel=0.05)


def test_response_zero_strength():
    rep = run_json("response", "--scenario", "spin", "--params", "theta=2,theta_prime=2,phi=1",
                   "--strength", "0")
    for f in rep["finals"]:
        assert f["delta_p_exact"] == 0 and f["first_order_prediction"] == 0


@pytest.mark.parametrize("argv", [
    ["run", "--scenario", "nowhere.json"],
    ["run", "--scenario", "spin", "--params", "theta=1,theta_prime=5"],
    ["run", "--scenario", "three-path", "--params", "a"],
    ["run", "--scenario", "three-path", "--observable", "pi_9"],
    ["run", "--scenario", "three-path", "--delta-f", "-1"],
    ["run", "--scenario", "three-path", "--grid-span", "3"],
    ["run", "--scenario", "three-path", "--grid-points", "100"],
    ["sweep", "--scenario", "three-path", "--strengths", "1"],
    ["mc", "--scenario", "three-path", "--trials", "0"],
    ["frobnicate"],
])
def test_config_errors(argv, capsys):
    assert main(argv, out=io.StringIO()) == EXIT_CONFIG


def test_bad_scenario_file(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"schema": 1, "initial": [[1, 0], [1, 0]]}))
    assert main(["run", "--scenario", str(path)], out=io.StringIO()) == EXIT_CONFIG


def test_numerical_failures():
    assert main(["mc", "--scenario", "spin", "--params", "theta=1,theta_prime=2",
                 "--delta-f", "1e-8", "--trials", "10"], out=io.StringIO()) == EXIT_NUMERICAL
    assert main(["run", "--scenario", "three-path", "--delta-f", "1e-7"],
                out=io.StringIO()) == EXIT_NUMERICAL


def test_parse_params():
    assert parse_params("a=0.5,a_prime=0.1+0.2j") == {"a": 0.5, "a_prime": complex(0.1, 0.2)}
    assert parse_params("a=1-2i") == {"a": complex(1, -2)}
    assert parse_params(None) == {}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "weakvalues", "run", "--scenario", "three-path"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "run"
