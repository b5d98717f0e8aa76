import json

import numpy as np
import pytest

from stet.cli import default_nfft, main, parse_recipe, CliError
from stet.io import read_branch_map, read_grid_bin, read_signal_csv, sha256

TONE_W = 0.3 * np.pi * 100


def run_ok(*argv):
    assert main([str(a) for a in argv]) == 0


def run_err(capsys, *argv):
    status = main([str(a) for a in argv])
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("stet: error E_")
    return status, err[0]


def tone_impulse(tmp_path):
    out = tmp_path / "syn"
    run_ok("synth", "--tone", f"A=1,w={TONE_W!r}", "--impulse", "A=0.32,t0=5.12",
           "--fs", 100, "--dur", 10.24, "--out", out)
    return out / "signal.csv"


def test_lfm_example_echoes_boundary(tmp_path):
    run_ok("synth", "--lfm", "A=1,b=62.8,c=628", "--fs", 2000, "--dur", 1, "--out", tmp_path / "s")
    s = read_signal_csv(tmp_path / "s" / "signal.csv")
    assert len(s) == 2000 and not s.is_real
    run_ok("analyze", "--input", tmp_path / "s" / "signal.csv", "--method", "stet2", "--out", tmp_path / "a")
    names = {p.name for p in (tmp_path / "a").iterdir()}
    assert {"stet2.csv", "stet2.json", "branch_map.csv", "manifest.json"} <= names
    cfg = json.loads((tmp_path / "a" / "stet2.json").read_text())["config"]
    assert cfg["boundary"] == pytest.approx(cfg["beta"] ** (-2 / 3), rel=1e-12)
    assert cfg["n_fft"] == default_nfft_for(cfg)


def default_nfft_for(cfg):
    length = 2 * cfg["window_half_len_samples"] + 1
    return 1 << (4 * length - 1).bit_length()


def test_default_nfft_is_power_of_two():
    class W:
        length = 101
    assert default_nfft(W) == 512


def test_set_export_equals_stft_export_on_impulse(tmp_path):
    run_ok("synth", "--impulse", "A=1,t0=0.5", "--fs", 1000, "--dur", 1, "--out", tmp_path / "s")
    sig = tmp_path / "s" / "signal.csv"
    for m in ("set", "stft"):
        run_ok("analyze", "--input", sig, "--method", m, "--two-sided", "--out", tmp_path / m)
    S = np.loadtxt(tmp_path / "set" / "set.csv", delimiter=",")
    V = np.loadtxt(tmp_path / "stft" / "stft.csv", delimiter=",")
    gamma = json.loads((tmp_path / "set" / "set.json").read_text())["config"]["gamma"]
    valid = V >= gamma * V.max()
    assert np.array_equal(S[valid], V[valid])
    assert not S[~valid].any()


def test_round_trip_reconstruction(tmp_path):
    sig = tone_impulse(tmp_path)
    run_ok("analyze", "--input", sig, "--method", "stet2", "--format", "bin", "--sigma-ms", 128,
           "--out", tmp_path / "a")
    G = read_grid_bin(tmp_path / "a" / "stet2.bin", branch_map=read_branch_map(tmp_path / "a" / "branch_map.csv"))
    assert G.kind == "STET2" and G.two_sided
    run_ok("reconstruct", "--analysis", tmp_path / "a", "--reference", sig, "--out", tmp_path / "r")
    rep = json.loads((tmp_path / "r" / "report.json").read_text())
    assert rep["interior_snr_db"] >= 10.0
    for name in ("s1", "s2", "total"):
        assert len(read_signal_csv(tmp_path / "r" / f"{name}.csv")) == 1024


def test_reconstruct_from_input(tmp_path):
    sig = tone_impulse(tmp_path)
    run_ok("reconstruct", "--input", sig, "--sigma-ms", 128, "--out", tmp_path / "r")
    rep = json.loads((tmp_path / "r" / "report.json").read_text())
    assert rep["interior_snr_db"] >= 10.0
    assert rep["config"]["method"] == "stet2"


def test_metrics_outputs(tmp_path):
    sig = tone_impulse(tmp_path)
    run_ok("metrics", "--input", sig, "--method", "stet2", "--sigma-ms", 128, "--ridge", "time",
           "--snr-sweep", "-5,20", "--seed", 4, "--out", tmp_path / "m")
    rep = json.loads((tmp_path / "m" / "report.json").read_text())
    assert rep["report"]["renyi_alpha"] == 3.0
    assert [p[0] for p in rep["snr_sweep"]["points"]] == [-5.0, 20.0]
    curve = np.loadtxt(tmp_path / "m" / "energy_curve.csv", delimiter=",", skiprows=1)
    assert np.all(np.diff(curve[:, 1]) >= 0) and curve[-1, 1] == 1.0
    ridge = np.loadtxt(tmp_path / "m" / "ridge.csv", delimiter=",", skiprows=1)
    assert ridge.shape[1] == 3


def test_manifest_lists_every_file(tmp_path):
    sig = tone_impulse(tmp_path)
    run_ok("analyze", "--input", sig, "--method", "stet", "--fields", "--out", tmp_path / "a")
    out = tmp_path / "a"
    man = json.loads((out / "manifest.json").read_text())
    files = {p.name for p in out.iterdir()} - {"manifest.json"}
    assert set(man["files"]) == files
    for name, digest in man["files"].items():
        assert digest == sha256(out / name)
    params = man["parameters"]
    assert params["method"] == "stet" and params["boundary"] == pytest.approx(params["beta"] ** (-2 / 3))


def test_outputs_are_byte_identical(tmp_path):
    def once(tag):
        d = tmp_path / tag
        run_ok("synth", "--tone", f"A=1,w={TONE_W!r}", "--impulse", "A=0.32,t0=5.12", "--fs", 100,
               "--dur", 10.24, "--snr", 5, "--seed", 9, "--out", d / "s")
        return d

    a, b = once("a"), once("b")
    assert (a / "s" / "signal.csv").read_bytes() == (b / "s" / "signal.csv").read_bytes()
    sig = a / "s" / "signal.csv"
    for d in ("x", "y"):
        run_ok("analyze", "--input", sig, "--format", "bin", "--out", tmp_path / d / "an")
        run_ok("metrics", "--input", sig, "--snr-sweep", "0,10", "--out", tmp_path / d / "me")
    for sub in ("an", "me"):
        for p in sorted((tmp_path / "x" / sub).iterdir()):
            assert p.read_bytes() == (tmp_path / "y" / sub / p.name).read_bytes(), p.name


def test_config_errors_exit_2(tmp_path, capsys):
    sig = tone_impulse(tmp_path)
    status, line = run_err(capsys, "analyze", "--input", sig, "--method", "bogus", "--out", tmp_path / "x")
    assert status == 2 and "E_CONFIG" in line
    status, _ = run_err(capsys, "analyze", "--input", sig, "--nfft", 8, "--out", tmp_path / "x")
    assert status == 2
    status, _ = run_err(capsys, "analyze", "--input", sig, "--beta", -1, "--out", tmp_path / "x")
    assert status == 2
    status, _ = run_err(capsys, "analyze", "--input", sig, "--gamma", 0, "--out", tmp_path / "x")
    assert status == 2
    status, _ = run_err(capsys, "synth", "--fs", 100, "--dur", 1, "--out", tmp_path / "x")
    assert status == 2
    status, _ = run_err(capsys, "synth", "--tone", "A=1,q=3", "--fs", 100, "--dur", 1, "--out", tmp_path / "x")
    assert status == 2
    status, _ = run_err(capsys, "reconstruct", "--out", tmp_path / "x")
    assert status == 2
    # above Nyquist
    status, _ = run_err(capsys, "synth", "--tone", "A=1,w=1000", "--fs", 100, "--dur", 1, "--out", tmp_path / "x")
    assert status == 2


def test_input_errors_exit_3(tmp_path, capsys):
    status, line = run_err(capsys, "analyze", "--input", tmp_path / "missing.csv", "--out", tmp_path / "x")
    assert status == 3 and "E_INPUT" in line
    bad = tmp_path / "bad.csv"
    bad.write_text("time_s,real\n0,1\n0.1,oops\n")
    assert run_err(capsys, "metrics", "--input", bad, "--out", tmp_path / "x")[0] == 3
    (tmp_path / "empty").mkdir()
    assert run_err(capsys, "reconstruct", "--analysis", tmp_path / "empty", "--out", tmp_path / "x")[0] == 3


def test_numeric_errors_exit_4(tmp_path, capsys):
    z = tmp_path / "z.csv"
    z.write_text("time_s,real,imag\n" + "".join(f"{k / 100!r},0,0\n" for k in range(400)))
    status, line = run_err(capsys, "metrics", "--input", z, "--out", tmp_path / "x")
    assert status == 4 and "E_NUMERIC" in line


def test_parse_recipe():
    assert parse_recipe("lfm", "A=2,b=1,c=3") == {"A": 2.0, "a": 0.0, "b": 1.0, "c": 3.0}
    with pytest.raises(CliError):
        parse_recipe("lfm", "A=2,b=1")
    with pytest.raises(CliError):
        parse_recipe("tone", "w=abc")
