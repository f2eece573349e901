from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from affdim import cli
from affdim.digits import Cofinite, DigitSetSpec, parse_digit_set
from affdim.empirics import read_pnm
from affdim.luroth import dim_1d, dim_2d, fiber_dimension, luroth_affinity_dimension
from affdim.pressure import AlphabetSpec, affinity_dimension
from affdim.spectrum import SpectrumRequest, realize_2d


def run_json(*argv):
    out = io.StringIO()
    code = cli.run([*argv, "--json"], stdout=out)
    assert code == 0, argv
    return json.loads(out.getvalue())


def run_text(*argv):
    out = io.StringIO()
    code = cli.run(list(argv), stdout=out)
    return code, out.getvalue()


def test_dim_1d_text_output():
    code, text = run_text("dim-1d", "--digits", "0:3;1:3")
    assert code == 0
    assert "0.386853" in text and "HutchinsonFinite" in text and "[" in text


def test_dim_2d_text_output():
    code, text = run_text("dim-2d", "--I", "2..inf", "--p", "0.5")
    assert code == 0
    assert "dimension: 2.000000" in text


def test_spectrum_cli():
    res = run_json("spectrum", "--target", "1.5", "--p", "0.5", "--tol", "1e-3")["result"]
    assert abs(res["achieved"]["value"] - 1.5) <= 1e-3
    J = parse_digit_set(res["digits"])
    assert J.zero == J.one


def test_equivalence_with_library():
    r = run_json("dim-1d", "--digits", "0:3;1:3")["result"]
    assert r["hausdorff"] == dim_1d(parse_digit_set("0:3;1:3"))[0].to_dict()
    J = parse_digit_set("0:3,4;1:5")
    r = run_json("dim-2d", "--digits", "0:3,4;1:5", "--p", "0.3")["result"]
    assert r["dimension"] == dim_2d(J, 0.3).to_dict()
    assert r["affinity"] == luroth_affinity_dimension(J, 0.3).to_dict()
    r = run_json("dim-affinity", "--maps", "1/4,1/16;1/4,1/16;1/4,1/16;1/4,1/16")["result"]
    assert r["dimension"] == affinity_dimension(AlphabetSpec.explicit([(0.25, 1 / 16)] * 4)).to_dict()
    r = run_json("dim-affinity", "--digits", "*:2..inf", "--p", "0.5", "--tol", "1e-8")["result"]
    lib = affinity_dimension(AlphabetSpec.luroth(0.5, DigitSetSpec.both(Cofinite(2))), 1e-8)
    assert r["dimension"] == lib.to_dict()
    r = run_json("dim-fiber", "--I0", "2,3", "--I1", "2")["result"]
    assert r["dimension"] == fiber_dimension({2, 3}, {2}, 0.5).to_dict()
    r = run_json("spectrum", "--target", "1.2", "--p", "0.4", "--tol", "1e-3")["result"]
    J, achieved = realize_2d(SpectrumRequest(1.2, p=0.4, tol=1e-3, planar=True))
    assert r["achieved"] == achieved.to_dict()


def test_nonauto_cli():
    r = run_json("dim-nonauto", "--period", "0:3|0:3;1:3")["result"]
    assert r["dimension"]["value"] == pytest.approx(0.193426403617270793, abs=1e-9)


def test_codec_cli():
    r = run_json("eval", "--digits", "0:3;0:3")["result"]
    assert r["exact"] == "7/18"
    r = run_json("expand", "--x", "7/18", "--n", "2")["result"]
    assert r["digits"] == "0:3;0:4"
    r = run_json("expand", "--x", "0.3", "--strategy", "prescribed", "--signs", "0110", "--n", "4")["result"]
    assert [int(t.split(":")[0]) for t in r["digits"].split(";")] == [0, 1, 1, 0]
    assert r["error"] <= r["error_bound"]


def test_osc_cli():
    r = run_json("osc-check", "--d", "3..50", "--digits", "0:2,3,4,5;1:3,4")["result"]
    assert r["all_passed"] and r["violation"]
    assert r["examples"][0]["right"] == "2/3"


def test_cover_and_boxcount_cli(tmp_path):
    csv = tmp_path / "cover.csv"
    r = run_json("cover", "--digits", "*:3", "--p", "0.5", "--depth", "3", "--out", str(csv))["result"]
    assert r["count"] == 8
    assert len(csv.read_text().splitlines()) == 9
    maps = ";".join(f"0.25,0.0625,{tx},{ty}" for tx in (0, 0.75) for ty in (0, 0.9375))
    out = tmp_path / "bc.csv"
    r = run_json("boxcount", "--maps", maps, "--depth", "6", "--csv", str(out))["result"]
    assert 0.70 <= r["slope"] <= 0.80
    assert out.read_text().startswith("delta,count,log2_delta,log2_count")
    r = run_json("boxcount", "--digits", "0:3;1:3", "--source", "intervals", "--depth", "8")["result"]
    assert abs(r["slope"] - 0.386852807) <= 0.05
    r = run_json("boxcount", "--digits", "0:2;1:2", "--source", "chaos", "--n-points", "2000")["result"]
    assert r["counts"][0] >= 1


def test_render_cli(tmp_path):
    pgm = tmp_path / "a.pgm"
    ppm = tmp_path / "all.ppm"
    r = run_json("render", "--figure", "a", "--resolution", "128", "--out", str(pgm), "--overlay", str(ppm))["result"]
    assert r["lowest_occupied_y"] >= 0.5 - 1 / 128
    assert read_pnm(pgm).shape == (128, 128)
    assert read_pnm(ppm).shape == (128, 128, 3)


def test_resolved_config_echoes_defaults():
    payload = run_json("boxcount", "--digits", "0:3;1:3", "--depth", "2")
    assert payload["config"]["ladder"] == "4..12"
    assert payload["config"]["seed"] == 0
    assert run_json("dim-1d", "--digits", "0:3")["config"]["tol"] == 1e-9
    assert payload["threads"] == 1


def test_threads_env(monkeypatch):
    monkeypatch.setenv("AFFDIM_THREADS", "3")
    assert run_json("eval", "--digits", "0:2")["threads"] == 3
    monkeypatch.setenv("AFFDIM_THREADS", "zero")
    assert run_text("eval", "--digits", "0:2")[0] == cli.EXIT_INVALID


@pytest.mark.parametrize(
    "argv",
    [
        ["dim-fiber", "--I0", "2,3", "--I1", "2,5", "--p", "0.37"],
        ["spectrum", "--target", "0.6", "--tol", "1e-4", "--space", "1d"],
        ["boxcount", "--digits", "*:3,4", "--p", "0.3", "--depth", "5", "--window", "1..6"],
        ["expand", "--x", "3/11", "--strategy", "bernoulli", "--p", "0.2", "--seed", "9"],
    ],
)
def test_json_round_trip(tmp_path, argv):
    first = io.StringIO()
    assert cli.run([*argv, "--json"], stdout=first) == 0
    path = tmp_path / "prev.json"
    path.write_text(first.getvalue())
    second = io.StringIO()
    assert cli.run([argv[0], "--config", str(path), "--json"], stdout=second) == 0
    assert second.getvalue() == first.getvalue()


def test_flags_override_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"I0": "2,3", "I1": "2", "p": 0.2}))
    payload = run_json("dim-fiber", "--config", str(path), "--p", "0.6")
    assert payload["config"]["p"] == 0.6 and payload["config"]["I0"] == "2,3"


@pytest.mark.parametrize(
    "argv, code",
    [
        (["bogus"], cli.EXIT_INVALID),
        (["dim-1d"], cli.EXIT_INVALID),
        (["dim-1d", "--digits", "0:1"], cli.EXIT_INVALID),
        (["dim-2d", "--I", "3", "--p", "1.5"], cli.EXIT_INVALID),
        (["spectrum", "--target", "0.5", "--space", "3d"], cli.EXIT_INVALID),
        (["cover", "--digits", "*:2..20", "--depth", "9"], cli.EXIT_BUDGET),
        (["spectrum", "--target", "0.01", "--space", "1d", "--max-digit", "1000"], cli.EXIT_TOLERANCE),
    ],
)
def test_exit_codes(argv, code):
    assert run_text(*argv)[0] == code


def test_bad_config_is_invalid(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"digits": "0:3", "tol": "small"}))
    assert run_text("dim-1d", "--config", str(path))[0] == cli.EXIT_INVALID
    path.write_text(json.dumps({"digits": "0:3", "colour": 1}))
    assert run_text("dim-1d", "--config", str(path))[0] == cli.EXIT_INVALID
    path.write_text(json.dumps({"command": "dim-2d", "config": {}}))
    assert run_text("dim-1d", "--config", str(path))[0] == cli.EXIT_INVALID


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "affdim", "dim-1d", "--digits", "0:3;1:3", "--json"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["hausdorff"]["value"] == pytest.approx(0.3868528, abs=1e-7)
    proc = subprocess.run([sys.executable, "-m", "affdim", "dim-1d"], capture_output=True, check=False)
    assert proc.returncode == 1
