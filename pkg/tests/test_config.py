import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from semismooth_nlse.config import RunConfig, StudyFile, parse_potential
from semismooth_nlse.experiments import DataKind, InitialData, StudyConfig
from semismooth_nlse.grid import ConfigurationError, Grid1D
from semismooth_nlse.propagators import Scheme

RUN = """
[problem]
a = -16
b = 16
sigma = 0.5
beta = -1
potential = harmonic(0.5)   ; trap

[initial]
kind = type2
seed = 7

[discretization]
N = 128
tau = 0.01
scheme = strang

[horizon]
T = 1
observe_every = 5

[io]
out = results
formats = csv
"""

STUDY = """
[problem]
a = -1
b = 1
sigma = 0.5
beta = -1

[initial]
kind = type2

[study]
T = 1
tau_list = 0.1, 0.05, 0.025
N_list = 64 128 256
N_ref = 1024
tau_ref = 1e-5
seeds = 0, 1, 2

[assert_time]
l2 = 0.85
h1 = 0.35
"""


class TestRunConfig:
    def test_parse(self):
        cfg = RunConfig.from_text(RUN)
        assert (cfg.a, cfg.b, cfg.N, cfg.tau, cfg.T) == (-16.0, 16.0, 128, 0.01, 1.0)
        assert cfg.scheme is Scheme.STRANG
        assert cfg.initial == InitialData(DataKind.TYPE_II, seed=7)
        assert cfg.n_steps == 100
        assert cfg.formats == ("csv",)
        assert cfg.observe_every == 5

    def test_round_trip(self):
        cfg = RunConfig.from_text(RUN)
        assert RunConfig.from_text(cfg.to_text()) == cfg

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.01, 3.0), st.floats(-20, 20), st.integers(2, 4096), st.integers(1, 10_000),
           st.sampled_from(list(Scheme)), st.integers(0, 2**64 - 1))
    def test_round_trip_property(self, sigma, beta, N, n, scheme, seed):
        tau = 0.001 * 3**0.5
        cfg = RunConfig(a=-1.5, b=2.0, sigma=sigma, beta=beta, N=N, tau=tau, T=n * tau, scheme=scheme,
                        initial=InitialData(DataKind.TYPE_II, seed=seed))
        assert RunConfig.from_text(cfg.to_text()) == cfg

    def test_non_integral_horizon_names_field(self):
        with pytest.raises(ConfigurationError, match=r"^discretization\.tau: T/tau"):
            RunConfig.from_text(RUN.replace("tau = 0.01", "tau = 0.03"))

    @pytest.mark.parametrize("old,new,field", [
        ("N = 128", "N = 1", "N >= 2"),
        ("sigma = 0.5", "sigma = 0", "sigma"),
        ("N = 128", "N = many", "discretization.N"),
        ("scheme = strang", "scheme = euler", "discretization.scheme"),
        ("observe_every = 5", "observe_every = 0", "horizon.observe_every"),
        ("formats = csv", "formats = xml", "io.formats"),
        ("kind = type2", "kind = type9", "initial"),
    ])
    def test_invalid_values(self, old, new, field):
        with pytest.raises(ConfigurationError, match=field):
            RunConfig.from_text(RUN.replace(old, new))

    def test_missing_key(self):
        with pytest.raises(ConfigurationError, match=r"problem\.beta: missing"):
            RunConfig.from_text(RUN.replace("beta = -1", ""))

    def test_syntax_error(self):
        with pytest.raises(ConfigurationError, match="syntax"):
            RunConfig.from_text("no section header")


class TestPotentialSpec:
    def test_kinds(self, tmp_path):
        g = Grid1D(0.0, 1.0, 4)
        assert np.all(parse_potential("zero", g).values == 0)
        assert_allclose(parse_potential(" harmonic( 2 ) ", g).values, 4 * (g.nodes - 0.5) ** 2)
        np.savetxt(tmp_path / "V.txt", np.arange(5.0))
        assert_allclose(parse_potential("samples(V.txt)", g, tmp_path).values, np.arange(5.0))

    @pytest.mark.parametrize("spec", ["cubic(1)", "harmonic(x)", "samples(missing.txt)"])
    def test_bad_specs(self, spec, tmp_path):
        with pytest.raises(ConfigurationError, match="problem.potential"):
            parse_potential(spec, Grid1D(0.0, 1.0, 4), tmp_path)

    def test_wrong_sample_count(self, tmp_path):
        np.savetxt(tmp_path / "V.txt", np.arange(3.0))
        with pytest.raises(ConfigurationError, match="5 samples"):
            parse_potential("samples(V.txt)", Grid1D(0.0, 1.0, 4), tmp_path)


class TestStudyFile:
    def test_parse(self):
        sf = StudyFile.from_text(STUDY)
        assert sf.study == StudyConfig(sigma=0.5, domain=(-1, 1), tau_list=(0.1, 0.05, 0.025),
                                       N_list=(64, 128, 256), N_ref=1024, tau_ref=1e-5)
        assert sf.seeds == (0, 1, 2)
        assert [i.seed for i in sf.initials()] == [0, 1, 2]
        assert sf.assert_time == {"l2": 0.85, "h1": 0.35}
        assert sf.assert_space == {}

    def test_round_trip(self):
        sf = StudyFile.from_text(STUDY)
        assert StudyFile.from_text(sf.to_text()) == sf

    def test_only_zero_potential(self):
        with pytest.raises(ConfigurationError, match="V = 0"):
            StudyFile.from_text(STUDY.replace("beta = -1", "beta = -1\npotential = harmonic(1)"))

    def test_unknown_norm(self):
        with pytest.raises(ConfigurationError, match="assert_time.h2"):
            StudyFile.from_text(STUDY + "h2 = 1\n")

    def test_type1_ignores_seeds(self):
        sf = StudyFile.from_text(STUDY.replace("kind = type2", "kind = type1"))
        assert sf.initials() == [InitialData()]
