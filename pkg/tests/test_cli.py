import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from gradflux.cli import main, parse_range

RING = {"area_left_um2": 1573.0, "area_right_um2": 1573.0, "alpha": 0.0, "ring_area_um2": 3145.8}
ASYM = {"area_left_um2": 1581.776, "area_right_um2": 1564.024, "alpha": -0.0031, "ring_area_um2": 3145.8}
SAMPLE_A = {"e_j_ghz": 9.21, "e_c_ghz": 3.97, "e_l_ghz": 1.95}


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)

    write.dir = tmp_path
    return write


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_range():
    assert np.array_equal(parse_range("-2:2:5"), np.linspace(-2, 2, 5))


class TestSimulate:
    def test_rows_per_family(self, files, capsys):
        code, out, _ = run(
            ["simulate", "--params", files("a.json", SAMPLE_A), "--geometry", files("g.json", RING), "--m", "1", "--b", "-2:2:201"],
            capsys,
        )
        assert code == 0
        counts = {}
        for r in rows(out):
            counts[(r["family"], r["transition"])] = counts.get((r["family"], r["transition"]), 0) + 1
        assert counts and set(counts.values()) == {201}
        assert ("main", "0-1") in counts and ("multi_photon", "0-2/2") in counts

    def test_even_locks_identical(self, files, capsys):
        p, g = files("a.json", SAMPLE_A), files("g.json", ASYM | {"alpha": 0.0})
        outs = []
        for m in ("0", "2"):
            code, out, _ = run(["simulate", "--params", p, "--geometry", g, "--m", m, "--b", "-20:20:41"], capsys)
            assert code == 0
            outs.append(out)
        assert outs[0] == outs[1]

    def test_minimum_at_sweet_spot(self, files, capsys):
        p, g = files("a.json", SAMPLE_A), files("g.json", ASYM)
        out_csv = str(files.dir / "c.csv")
        code, out, _ = run(
            ["simulate", "--params", p, "--geometry", g, "--m", "1", "--b", "-30:30:601", "--out", out_csv, "--max-level", "1"],
            capsys,
        )
        assert code == 0
        b_spot = json.loads(out)["sweet_spot_b_ut"]
        main_rows = [r for r in rows(open(out_csv).read()) if r["transition"] == "0-1"]
        b = np.array([float(r["b_ext_ut"]) for r in main_rows])
        f = np.array([float(r["freq_ghz"]) for r in main_rows])
        assert abs(b[np.argmin(f)] - b_spot) <= 0.5 * (b[1] - b[0])

    def test_malformed_json(self, files, capsys):
        code, _, err = run(
            ["simulate", "--params", files("a.json", "{not json"), "--geometry", files("g.json", RING), "--m", "1", "--b", "0:1:3"],
            capsys,
        )
        assert code == 2 and err.startswith("error: ")

    def test_missing_key(self, files, capsys):
        code, _, err = run(
            ["simulate", "--params", files("a.json", {"e_j_ghz": 1.0}), "--geometry", files("g.json", RING), "--m", "1", "--b", "0:1:3"],
            capsys,
        )
        assert code == 2 and "schema" in err

    def test_no_convergence(self, files, capsys):
        code, _, err = run(
            ["simulate", "--params", files("a.json", SAMPLE_A), "--geometry", files("g.json", RING), "--m", "1",
             "--b", "0:0:1", "--tol", "1e-300", "--max-level", "1"],
            capsys,
        )
        assert code == 3 and err.startswith("error: ")

    def test_bad_flag(self, capsys):
        code, _, err = run(["simulate", "--nope"], capsys)
        assert code == 2 and err.startswith("error: ")


class TestSynthAndFit:
    def synth(self, files, capsys, seed="7"):
        code, out, _ = run(
            ["synth", "--params", files("d.json", {"e_j_ghz": 8.87, "e_c_ghz": 3.88, "e_l_ghz": 1.87}),
             "--geometry", files("g.json", ASYM), "--m", "0", "--m", "1", "--b", "-60:60:40",
             "--sigma-ghz", "0.002", "--seed", seed],
            capsys,
        )
        assert code == 0
        return out

    def test_synth_deterministic(self, files, capsys):
        assert self.synth(files, capsys) == self.synth(files, capsys)
        assert self.synth(files, capsys) != self.synth(files, capsys, seed="8")

    def test_fit_spectrum(self, files, capsys):
        data = files("data.csv", self.synth(files, capsys))
        code, out, _ = run(["fit-spectrum", "--data", data], capsys)
        assert code == 0
        res = json.loads(out)
        assert res["converged"] and res["n_points"] == 80
        assert abs(res["estimates"]["e_j"] - 8.87) < 3 * res["sigmas"]["e_j"] + 1e-3
        code, again, _ = run(["fit-spectrum", "--data", data, "--seed", "1"], capsys)
        assert again == out

    def test_fit_schema_violation(self, files, capsys):
        code, _, err = run(["fit-spectrum", "--data", files("bad.csv", "x,y\n1,2\n")], capsys)
        assert code == 2 and "schema" in err

    def test_fit_cannot_seed(self, files, capsys):
        text = "b_ext_ut,freq_ghz,sigma_ghz,m,transition,cooldown\n" + "".join(
            f"{b},5.0,0.001,1,0-2,0\n" for b in range(5)
        )
        code, _, _ = run(["fit-spectrum", "--data", files("d.csv", text)], capsys)
        assert code == 4


class TestDesignLock:
    def test_design_alpha_zero(self, capsys):
        code, out, _ = run(["design", "--target", "alpha-zero"], capsys)
        assert code == 0
        assert json.loads(out)["x_um"] == pytest.approx(-0.070, abs=1e-3)

    def test_design_all(self, capsys):
        code, out, _ = run(["design"], capsys)
        assert code == 0 and set(json.loads(out)["crossings_um"]) >= {"alpha-zero", "aeff-zero", "delta-a-zero"}

    def test_design_unsolvable(self, files, capsys):
        code, _, err = run(
            ["design", "--target", "alpha-zero", "--coeffs", files("c.json", {"alpha_slope_pct_per_um": 0.0})], capsys
        )
        assert code == 5 and err.startswith("error: ")

    def test_lock(self, files, capsys):
        code, out, _ = run(["lock", "--b-cd-ut", "0.66", "--geometry", files("r.json", RING)], capsys)
        assert code == 0 and json.loads(out) == {"m": 1, "parity": "pi"}

    def test_lock_ambiguous(self, files, capsys):
        b_half = 0.5 * 2.067833848e-15 / (3145.8e-18)
        code, _, _ = run(["lock", "--b-cd-ut", repr(b_half), "--geometry", files("r.json", RING)], capsys)
        assert code == 5

    def test_lock_many(self, files, capsys):
        code, out, _ = run(["lock", "--b-cd-ut", "0.66", "--geometry", files("r.json", [RING] * 8)], capsys)
        assert code == 0 and json.loads(out)["summary"] == {"zero": 0, "pi": 8, "ambiguous": 0}


class TestFitDecay:
    def trace(self, files, y):
        t = np.linspace(0, 100, 101)
        return files("t.csv", "time_us,population\n" + "".join(f"{a!r},{b!r}\n" for a, b in zip(t.tolist(), y(t).tolist())))

    def test_echo_sweet_spot(self, files, capsys):
        code, out, _ = run(["fit-decay", "--kind", "echo", "--sweet-spot", "--data", self.trace(files, lambda t: np.exp(-t / 20))], capsys)
        assert code == 0
        assert json.loads(out)["t2e_us"] == pytest.approx(20.0, rel=1e-6)

    def test_t1(self, files, capsys):
        code, out, _ = run(["fit-decay", "--kind", "t1", "--data", self.trace(files, lambda t: np.exp(-t / 20))], capsys)
        assert code == 0 and json.loads(out)["t1_us"] == pytest.approx(20.0, rel=1e-6)

    def test_no_decay(self, files, capsys):
        code, _, err = run(["fit-decay", "--kind", "t1", "--data", self.trace(files, lambda t: 0 * t + 0.5)], capsys)
        assert code == 4 and err.startswith("error: ")

    def test_missing_file(self, capsys):
        code, _, _ = run(["fit-decay", "--kind", "t1", "--data", "/nonexistent.csv"], capsys)
        assert code == 2


def test_every_command_byte_identical(files, capsys):
    p, g = files("a.json", SAMPLE_A), files("g.json", ASYM)
    t = np.linspace(0, 100, 101)
    trace = files("t.csv", "time_us,population\n" + "".join(f"{a!r},{b!r}\n" for a, b in zip(t.tolist(), np.exp(-t / 20).tolist())))
    code, data, _ = run(["synth", "--params", p, "--geometry", g, "--b", "-60:60:12", "--sigma-ghz", "0.002", "--seed", "3"], capsys)
    data = files("d.csv", data)
    commands = [
        ["simulate", "--params", p, "--geometry", g, "--m", "1", "--b", "-2:2:11"],
        ["synth", "--params", p, "--geometry", g, "--b", "-60:60:12", "--sigma-ghz", "0.002", "--seed", "3"],
        ["fit-spectrum", "--data", data, "--seed", "3"],
        ["design"],
        ["lock", "--b-cd-ut", "0.66", "--geometry", g],
        ["fit-decay", "--kind", "echo", "--data", trace],
    ]
    for argv in commands:
        a = run(argv, capsys)
        b = run(argv, capsys)
        assert a[0] == 0 and a == b, argv


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "gradflux.cli", "design", "--target", "aeff-zero"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["x_um"] == pytest.approx(-0.1695, abs=5e-4)
