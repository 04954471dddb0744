import json
import subprocess
import sys

import pytest

from twodescent.cli import JobConfig, parse_curve, render_text, run


def test_descend_y2_x3_minus_x():
    code, out, err = run(["descend", "--curve", "[0,0,0,-1,0]", "--height", "200"])
    assert code == 0 and err == ""
    rep = json.loads(out)
    assert rep["selmer_dim"] == "2"
    assert rep["rank_upper"] == "0"
    for key in ("curve", "S", "ambient_generators", "selmer_basis", "local_images", "classes", "verdict"):
        assert key in rep


def test_descend_congruent_five():
    code, out, _ = run(["descend", "--curve", "[0,0,0,-25,0]", "--height", "1000"])
    rep = json.loads(out)
    assert code == 0
    assert rep["rank_lower"] == "1" and rep["rank_upper"] == "1"
    assert rep["verdict"]["generators"]
    for cls in rep["classes"]:
        for key in ("d1", "d2", "conic_pair", "quartic_raw", "quartic_min", "quartic_red",
                    "witnesses", "local_solubility", "search", "mapped_points"):
            assert key in cls


def test_out_of_scope_curve():
    code, out, err = run(["selmer", "--curve", "[0,0,0,1,0]"])
    assert code == 2 and out == ""
    assert "out of scope" in err


@pytest.mark.parametrize("argv", [
    ["selmer", "--curve", "[0,0,0,-1]"],
    ["selmer", "--curve", "[0,0,zero,-1,0]"],
    ["selmer", "--roots", "[1,1,2]"],
    ["selmer", "--curve", "[0,0,0,0,0]"],
    ["selmer", "--roots", "[0,1,-1]", "--adjoin-primes", "4"],
    ["descend", "--roots", "[0,1,-1]", "--height", "-1"],
])
def test_malformed_input(argv):
    code, out, err = run(argv)
    assert code == 2 and out == ""
    assert err


def test_rational_input():
    code, out, _ = run(["selmer", "--roots", '["1/2", 0, "-1/2"]'])
    assert code == 0
    rep = json.loads(out)
    # x -> 4x is the least integral scaling: roots become -2, 0, 2
    assert rep["curve"]["roots"] == ["-2", "0", "2"]
    assert rep["curve"]["coordinate_change"]["u"] == "1/2"


def test_json_round_trip_and_determinism():
    argv = ["descend", "--roots", "[0,5,-5]", "--height", "300", "--seed", "3"]
    _, a, _ = run(argv)
    _, b, _ = run(argv)
    assert a == b
    assert json.dumps(json.loads(a), indent=2) + "\n" == a


def test_all_numbers_are_strings():
    _, out, _ = run(["descend", "--roots", "[-5,0,5]", "--height", "100"])

    def walk(node):
        if isinstance(node, dict):
            for v in node.values():
                walk(v)
        elif isinstance(node, list):
            for v in node:
                walk(v)
        else:
            assert isinstance(node, (str, bool)) or node is None

    walk(json.loads(out))


def test_subcommands_and_text_mode():
    for cmd in ("selmer", "coverings", "search"):
        code, out, _ = run([cmd, "--roots", "[-1,0,1]", "--height", "50"])
        assert code == 0
        json.loads(out)
    code, out, _ = run(["search", "--roots", "[-5,0,5]", "--height", "50", "--workers", "2"])
    rep = json.loads(out)
    assert any(c["search"] and c["search"]["points"] for c in rep["classes"])
    code, out, _ = run(["descend", "--roots", "[-5,0,5]", "--height", "100", "--format", "text"])
    assert code == 0 and "1 <= r <= 1" in out


def test_adjoin_primes_keeps_selmer():
    _, a, _ = run(["selmer", "--roots", "[-5,0,5]"])
    _, b, _ = run(["selmer", "--roots", "[-5,0,5]", "--adjoin-primes", "7,11"])
    ra, rb = json.loads(a), json.loads(b)
    assert ra["selmer_dim"] == rb["selmer_dim"]
    assert rb["S"] == ["2", "5", "7", "11", "inf"]


def test_job_config_validation():
    with pytest.raises(ValueError):
        JobConfig("selmer", [0, 1, 2], height=-1)
    assert parse_curve("[1, '2/3', -4]")[1] == parse_curve('[1, "2/3", -4]')[1]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "twodescent", "selmer", "--roots", "[-1,0,1]"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["selmer_dim"] == "2"
