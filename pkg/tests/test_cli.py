import json
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from semismooth_nlse import __version__
from semismooth_nlse.cli import main
from semismooth_nlse.config import CACHE_ENV, OUT_ENV
from semismooth_nlse.fieldio import load_field
from semismooth_nlse.grid import Grid1D

RUN = """
[problem]
a = -1
b = 1
sigma = 0.5
beta = {beta}

[initial]
kind = mode
mode = 2

[discretization]
N = 64
tau = 0.001

[horizon]
T = 1
observe_every = 100

[io]
checkpoint_every = {ck}
"""

STUDY = """
[problem]
a = -1
b = 1
sigma = 0.5
beta = {beta}

[initial]
kind = {kind}
mode = 3

[study]
T = 0.1
tau_list = 0.02, 0.01, 0.005, 0.0025
N_list = 16, 32, 64
N_ref = 128
tau_ref = 0.0001
seeds = 0, 1

[assert_time]
l2 = {l2}

[assert_space]
l2 = 1.8
"""


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    monkeypatch.delenv(OUT_ENV, raising=False)
    monkeypatch.setenv(CACHE_ENV, str(tmp_path / "cache"))


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestSimulate:
    def test_free_single_mode_matches_analytic_phase(self, tmp_path):
        cfg = write(tmp_path, "run.ini", RUN.format(beta=0, ck=0))
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
        field, head = load_field(tmp_path / "o" / "final.ckpt")
        g = Grid1D(-1.0, 1.0, 64)
        exact = np.exp(-1j * np.pi**2 * 1.0) * np.sin(np.pi * (g.nodes + 1))
        assert_allclose(field.values, exact, atol=1e-10)
        assert head["step_index"] == 1000 and head["time"] == 1.0
        assert head["scheme"] == "lie_kinetic_last"

    def test_artifacts_and_determinism(self, tmp_path):
        cfg = write(tmp_path, "run.ini", RUN.format(beta=-1, ck=250))
        main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")])
        main(["simulate", "--config", cfg, "--out", str(tmp_path / "b")])
        csv_a = (tmp_path / "a" / "observables.csv").read_bytes()
        assert csv_a == (tmp_path / "b" / "observables.csv").read_bytes()
        lines = csv_a.decode().splitlines()
        assert lines[0] == "time,mass,energy,l2,h1,linf"
        assert len(lines) == 1 + 11 + 1
        assert lines[-1].startswith("# config_hash=") and f"version={__version__}" in lines[-1]
        summary = json.loads((tmp_path / "a" / "summary.json").read_text())
        assert {"final_mass", "final_energy", "wall_time_s"} <= summary.keys()
        assert_allclose(summary["final_mass"], 1.0, rtol=1e-12)
        cks = sorted(p.name for p in (tmp_path / "a").glob("checkpoint-*.ckpt"))
        assert cks == ["checkpoint-00000250.ckpt", "checkpoint-00000500.ckpt", "checkpoint-00000750.ckpt"]

    def test_seed_and_output_override(self, tmp_path, monkeypatch):
        cfg = write(tmp_path, "run.ini", RUN.format(beta=-1, ck=0).replace("kind = mode", "kind = type2"))
        monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
        assert main(["simulate", "--config", cfg, "--seed", "5"]) == 0
        assert (tmp_path / "env" / "final.ckpt").exists()
        assert main(["simulate", "--config", cfg, "--seed", "6", "--out", str(tmp_path / "flag")]) == 0
        a, _ = load_field(tmp_path / "env" / "final.ckpt")
        b, _ = load_field(tmp_path / "flag" / "final.ckpt")
        assert not np.allclose(a.values, b.values)

    def test_config_errors_exit_2(self, tmp_path, capsys):
        cfg = write(tmp_path, "run.ini", RUN.format(beta=-1, ck=0).replace("tau = 0.001", "tau = 0.003"))
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 2
        assert "discretization.tau" in capsys.readouterr().err
        assert main(["simulate", "--config", str(tmp_path / "missing.ini")]) == 2

    def test_blow_up_exits_4(self, tmp_path, capsys):
        cfg = write(tmp_path, "run.ini", RUN.format(beta="inf", ck=0))
        with np.errstate(all="ignore"):
            assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 4
        assert "step 1" in capsys.readouterr().err


class TestObservables:
    def test_initial_and_checkpoint(self, tmp_path, capsys):
        cfg = write(tmp_path, "run.ini", RUN.format(beta=-1, ck=0))
        out = str(tmp_path / "o")
        assert main(["observables", "--config", cfg, "--out", out]) == 0
        assert "mass 1" in capsys.readouterr().out
        main(["simulate", "--config", cfg, "--out", out])
        assert main(["observables", "--config", cfg, "--out", out, "--checkpoint", f"{out}/final.ckpt"]) == 0
        text = (tmp_path / "o" / "final-observables.csv").read_text().splitlines()
        assert text[1].startswith("1.0,")


class TestConverge:
    def test_time_sweep_passes_and_plots(self, tmp_path, capsys):
        cfg = write(tmp_path, "study.ini", STUDY.format(beta=-1, kind="type2", l2=0.85))
        assert main(["converge", "--config", cfg, "--axis", "time", "--svg", "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "[PASS] time l2 slope" in out and "minimum over seeds" in out
        assert (tmp_path / "sweep_time_seed0.csv").exists() and (tmp_path / "sweep_time_seed1.csv").exists()
        svg = (tmp_path / "sweep_time.svg").read_text()
        assert 'class="guide" data-order="0.5"' in svg and 'data-order="1.0"' in svg
        assert list((tmp_path / "cache").glob("ref-*.ckpt"))

    def test_space_sweep_with_single_seed(self, tmp_path):
        cfg = write(tmp_path, "study.ini", STUDY.format(beta=-1, kind="type2", l2=0.85))
        assert main(["converge", "--config", cfg, "--axis", "space", "--seed", "4", "--out", str(tmp_path),
                     "--svg", "--guide", "2"]) == 0
        assert (tmp_path / "sweep_space.csv").read_text().startswith("resolution,e_l2,e_h1,e_linf")
        assert 'data-order="2.0"' in (tmp_path / "sweep_space.svg").read_text()

    def test_failed_slope_assertion_exits_3(self, tmp_path, capsys):
        cfg = write(tmp_path, "study.ini", STUDY.format(beta=-1, kind="type2", l2=3.0))
        assert main(["converge", "--config", cfg, "--axis", "time", "--out", str(tmp_path)]) == 3
        assert "slope assertion failed" in capsys.readouterr().err

    def test_degenerate_fit(self, tmp_path, capsys):
        cfg = write(tmp_path, "study.ini", STUDY.format(beta=0, kind="mode", l2=0.85))
        assert main(["converge", "--config", cfg, "--axis", "time", "--out", str(tmp_path)]) == 3
        assert "degenerate fit" in capsys.readouterr().err

    def test_bad_thread_count(self, tmp_path):
        cfg = write(tmp_path, "study.ini", STUDY.format(beta=-1, kind="type2", l2=0.85))
        with pytest.raises(SystemExit):
            main(["converge", "--config", cfg, "--axis", "time", "--threads", "0"])


class TestReferenceAndSelftest:
    def test_reference_build_cache(self, tmp_path, capsys):
        cfg = write(tmp_path, "study.ini", STUDY.format(beta=-1, kind="type2", l2=0.85))
        assert main(["reference", "--config", cfg, "--build-cache", "--out", str(tmp_path)]) == 0
        assert len(list((tmp_path / "cache").glob("ref-*.ckpt"))) == 2
        assert "cache:" in capsys.readouterr().out

    def test_selftest_quick(self, capsys):
        assert main(["selftest", "--quick"]) == 0
        out = capsys.readouterr().out
        assert "1000/1000 pass" in out and "monitored ratios" in out

    def test_selftest_fault_injection(self, capsys):
        assert main(["selftest", "--quick", "--inject-fault", "q_coeff"]) == 3
        assert "FAILED: C3 junction at rho = eps^2" in capsys.readouterr().out

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "semismooth_nlse", "--version"], capture_output=True, text=True)
        assert res.returncode == 0 and res.stdout.strip() == __version__
