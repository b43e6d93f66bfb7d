import math
import os
import subprocess
import sys

import numpy as np
import pytest

from centralspin import cli
from centralspin.experiments import read_csv


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_kv(line):
    return dict(item.split("=", 1) for item in line.split())


def write_config(tmp_path, text, name="c.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestDecoherence:
    def test_default(self, capsys, tmp_path):
        code, out, _ = run(capsys, "decoherence", "--out", str(tmp_path))
        assert code == 0
        info = parse_kv(out)
        assert info["rows"] == "2001" and info["sigma_x_bath"] == "true"
        assert float(info["max_abs_diff"]) < 1e-10
        rows = read_csv(tmp_path / "decoherence.csv")
        first = [float(v) for v in rows[0].values()]
        np.testing.assert_allclose(first, [0.0, 1.0, 1.0, 0.0], atol=1e-12)

    def test_uncoupled(self, capsys, tmp_path):
        cfg = write_config(tmp_path, "[bath]\nlambda = 0.0\n")
        assert run(capsys, "decoherence", "--config", cfg, "--out", str(tmp_path), "--steps", "50")[0] == 0
        col = [float(r["F_closed"]) for r in read_csv(tmp_path / "decoherence.csv")]
        assert col == [1.0] * 50

    def test_bad_range(self, capsys, tmp_path):
        assert run(capsys, "decoherence", "--out", str(tmp_path), "--steps", "1")[0] == 2


class TestGp:
    def test_default(self, capsys):
        code, out, _ = run(capsys, "gp")
        assert code == 0
        info = parse_kv(out)
        assert info["weak_coupling_consistent"] == "true"
        assert float(info["gp_exact"]) == pytest.approx(3.0632, abs=1e-4)
        assert float(info["gp_unitary"]) == pytest.approx(math.pi)
        assert info["kinematic_status"] == "ok"

    def test_uncoupled_all_equal(self, capsys, tmp_path):
        cfg = write_config(tmp_path, "[system]\ntheta0 = 1.0\n[bath]\nlambda = 0.0\n")
        info = parse_kv(run(capsys, "gp", "--config", cfg)[1])
        vals = [float(info[k]) for k in ("gp_exact", "gp_kinematic", "gp_perturbative", "gp_unitary")]
        assert max(vals) - min(vals) < 1e-9

    def test_antipodal(self, capsys, tmp_path):
        cfg = write_config(tmp_path, f"[system]\ntheta0 = {math.pi!r}\n[bath]\nlambda = 0.4\n")
        info = parse_kv(run(capsys, "gp", "--config", cfg)[1])
        assert abs(float(info["gp_exact"])) < 1e-10

    def test_cycles(self, capsys):
        info = parse_kv(run(capsys, "gp", "--cycles", "3")[1])
        assert float(info["gp_unitary"]) == pytest.approx(3 * math.pi)

    def test_complex_factor_exit(self, capsys, tmp_path):
        cfg = write_config(tmp_path, "[bath]\nstate = [1.0, 0.0, 0.0, 0.0]\n")
        code, _, err = run(capsys, "gp", "--config", cfg)
        assert code == 4 and "sigma_x" in err

    def test_heterogeneous_has_no_expansion(self, capsys, tmp_path):
        cfg = write_config(tmp_path, "[bath]\nspins = [[1.0, 0.1, 0.7071067811865476, 0, 0.7071067811865476, 0],"
                                     " [0.6, 0.2, 0.7071067811865476, 0, -0.7071067811865476, 0]]\n")
        code, out, _ = run(capsys, "gp", "--config", cfg)
        assert code == 0 and parse_kv(out)["gp_perturbative"] == "nan"


class TestSweep:
    def test_unknown(self, capsys, tmp_path):
        code, _, err = run(capsys, "sweep", "fig9", "--out", str(tmp_path))
        assert code == 2 and "fig9" in err

    def test_fig1(self, capsys, tmp_path):
        code, out, err = run(capsys, "sweep", "fig1", "--out", str(tmp_path))
        assert code == 0
        assert parse_kv(out)["rows"] == "2091" and parse_kv(out)["failed"] == "0"
        assert "wall_time" in err and "wall_time" not in out
        assert len(read_csv(tmp_path / "fig1.csv")) == 2091
        assert "fig1.csv" in (tmp_path / "fig1.gp").read_text()

    def test_fig5(self, capsys, tmp_path):
        assert run(capsys, "sweep", "fig5", "--out", str(tmp_path))[0] == 0
        rows = read_csv(tmp_path / "fig5.csv")
        last = [r for r in rows if r["case"] == "commensurate_l0.05"][-1]
        assert last["m"] == "10" and float(last["ratio"]) == pytest.approx(10, rel=1e-9)

    def test_fig5_from_config(self, capsys, tmp_path):
        cfg = write_config(tmp_path, "[system]\ntheta0 = 1.0\n[bath]\nn = 4\nlambda = 0.08\nomega = 0.9\n")
        assert run(capsys, "sweep", "fig5", "--config", cfg, "--out", str(tmp_path))[0] == 0
        cases = {r["case"] for r in read_csv(tmp_path / "fig5.csv")}
        assert cases == {"commensurate_l0.08", "commensurate_l0.16", "config_l0.08"}

    def test_dispersion(self, capsys, tmp_path):
        code, out, _ = run(capsys, "sweep", "dispersion", "--out", str(tmp_path))
        assert code == 0 and "slope=" in out
        assert (tmp_path / "dispersion_fit.txt").exists()
        assert [r["n"] for r in read_csv(tmp_path / "dispersion.csv")] == ["2", "4", "8", "16", "32", "64"]

    def test_stdout_stable(self, capsys, tmp_path):
        a = run(capsys, "sweep", "fig2", "--out", str(tmp_path))[1]
        b = run(capsys, "sweep", "fig2", "--out", str(tmp_path))[1]
        assert a == b

    def test_unwritable(self, capsys, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert run(capsys, "sweep", "fig2", "--out", str(blocker / "sub"))[0] == 3


class TestValidate:
    def test_default_suites(self, capsys):
        code, out, _ = run(capsys, "validate")
        lines = out.splitlines()
        names = [ln.split()[1].rstrip(":") for ln in lines[:5]]
        assert names == ["factor_closed_vs_exact", "rho_formula_vs_full_hilbert", "kinematic_vs_exact",
                         "perturbative_order", "sign_determination"]
        assert lines[-1].startswith("perturbative_sign=-1")
        for ln in lines:
            if not ln.startswith("FAIL kinematic"):
                assert not ln.startswith("FAIL"), ln
        # the kinematic suite is the one known mismatch; see the decisions notes
        assert code == (0 if all(ln.startswith("PASS") for ln in lines[:5]) else 1)

    def test_heterogeneous_config(self, capsys, tmp_path):
        cfg = write_config(tmp_path, "[bath]\nspins = [[1.0, 0.1, 1, 0, 0, 0], [0.8, 0.3, 0.6, 0, 0.8, 0],"
                                     " [0.3, 0.2, 0, 1, 0, 0], [1.1, 0.05, 0.6, 0.8, 0, 0]]\n")
        code, out, _ = run(capsys, "validate", "--config", cfg)
        assert "PASS rho_formula_vs_full_hilbert" in out
        assert "skipped: complex decoherence factor" in out
        assert code == 1


class TestUsage:
    def test_bad_config(self, capsys, tmp_path):
        cfg = write_config(tmp_path, "[bath]\nn = -3\n")
        code, _, err = run(capsys, "gp", "--config", cfg)
        assert code == 2 and "config error" in err

    @pytest.mark.parametrize("flag", [["--tol", "0"], ["--workers", "0"], ["--cycles", "0"]])
    def test_bad_flags(self, capsys, flag):
        assert run(capsys, "gp", *flag)[0] == 2

    def test_module_entry(self, tmp_path):
        env = dict(os.environ)
        proc = subprocess.run([sys.executable, "-m", "centralspin", "gp"], capture_output=True, text=True,
                              cwd=tmp_path, env=env)
        assert proc.returncode == 0 and proc.stdout.startswith("gp_exact=")
