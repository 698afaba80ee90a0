import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from semismooth_nlse.grid import (
    ConfigurationError,
    Grid1D,
    NodalField,
    SpectralField,
    dst_analyze,
    dst_synthesize,
    embed_into,
    evaluate_series,
)
from semismooth_nlse.nonlinearity import SemiSmoothNonlinearity
from semismooth_nlse.observables import (
    ObservableRecord,
    central_second_diff,
    embedding_ratio,
    energy,
    error_norms,
    forward_diff,
    gagliardo_nirenberg_ratio,
    mass,
    norm_equivalence_check,
    records_from_csv,
    records_to_csv,
)
from semismooth_nlse.propagators import Potential, Scheme, SimulationState, SplitConfig, evolve


def random_spectral(grid, rng, decay=1.0):
    n = grid.N - 1
    return SpectralField(grid, (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / grid.modes**decay)


def quad_abs2(fn, a, b):
    return quad(lambda x: abs(fn(x)) ** 2, a, b, limit=500, epsabs=1e-14, epsrel=1e-12)[0]


def series_derivative(c, x):
    g = c.grid
    return np.cos(np.multiply.outer(x - g.a, g.frequencies)) @ (g.frequencies * c.coefficients)


class TestConservedQuantities:
    def setup_method(self):
        rng = np.random.default_rng(4)
        self.g = Grid1D(-2.0, 1.0, 12)
        self.c = random_spectral(self.g, rng)
        self.v = dst_synthesize(self.c)

    def test_mass_against_quadrature(self):
        ref = quad_abs2(lambda x: evaluate_series(self.c, x), self.g.a, self.g.b)
        assert_allclose(mass(self.v), ref, rtol=1e-10)

    def test_energy_against_quadrature_and_node_sums(self):
        g = self.g
        pot = Potential.harmonic(g, 1.3)
        nl = SemiSmoothNonlinearity(-2.0, 0.3)
        kinetic = quad_abs2(lambda x: series_derivative(self.c, x), g.a, g.b)
        local = sum(
            g.h * (pot.values[j] * abs(self.v.values[j]) ** 2
                   + -2.0 / 1.3 * abs(self.v.values[j]) ** (2 * 1.3))
            for j in range(1, g.N)
        )
        assert_allclose(energy(self.v, pot, nl), kinetic + local, rtol=1e-9)

    def test_energy_grid_mismatch(self):
        with pytest.raises(ConfigurationError):
            energy(self.v, Potential.zero(Grid1D(-2.0, 1.0, 8)), SemiSmoothNonlinearity(1.0, 1.0))

    def test_linear_free_run_conserves_energy(self):
        g = self.g
        pot = Potential.zero(g)
        nl = SemiSmoothNonlinearity(0.0, 1.0)
        out = evolve(SimulationState(self.v), SplitConfig(Scheme.LIE_KINETIC_LAST, 0.01, nl, pot), 100)
        assert_allclose(energy(out.field, pot, nl), energy(self.v, pot, nl), rtol=1e-12)


class TestErrorNorms:
    def test_identical_series_give_zero(self):
        rng = np.random.default_rng(0)
        coarse, fine = Grid1D(-1.0, 1.0, 16), Grid1D(-1.0, 1.0, 64)
        c = random_spectral(coarse, rng)
        l2, h1, linf = error_norms(dst_synthesize(c), embed_into(c, fine))
        assert l2 < 1e-15 and h1 < 1e-13 and linf < 1e-14

    def test_against_quadrature(self):
        rng = np.random.default_rng(1)
        coarse, fine = Grid1D(0.0, 2.0, 8), Grid1D(0.0, 2.0, 32)
        ref = random_spectral(fine, rng, decay=2.0)
        num = dst_synthesize(random_spectral(coarse, rng, decay=2.0))
        cn = dst_analyze(num)
        l2, h1, linf = error_norms(num, ref)

        def diff(x):
            return evaluate_series(ref, x) - evaluate_series(cn, x)

        def ddiff(x):
            return series_derivative(ref, x) - series_derivative(cn, x)

        q_l2 = quad_abs2(diff, 0.0, 2.0)
        q_h1 = quad_abs2(ddiff, 0.0, 2.0)
        assert_allclose(l2**2, q_l2, rtol=1e-9)
        assert_allclose(h1**2, q_l2 + q_h1, rtol=1e-9)
        at_nodes = [abs(num.values[j] - evaluate_series(ref, x)) for j, x in enumerate(coarse.nodes)]
        assert_allclose(linf, max(at_nodes), rtol=1e-12)

    def test_requires_refinement(self):
        with pytest.raises(ConfigurationError):
            error_norms(NodalField.zeros(Grid1D(0, 1, 8)), SpectralField.zeros(Grid1D(0, 1, 12)))


class TestDifferences:
    @pytest.mark.parametrize("l", [1, 5, 15])
    def test_second_difference_of_sine_mode(self, l):
        # delta_x^2 sin(mu x) = -mu^2 sinc^2(mu h / 2) sin(mu x) at interior nodes.
        g = Grid1D(-1.0, 3.0, 16)
        v = dst_synthesize(SpectralField.single_mode(g, l))
        mu = g.frequencies[l - 1]
        factor = -(mu**2) * np.sinc(mu * g.h / 2 / np.pi) ** 2
        assert_allclose(central_second_diff(v), factor * v.interior, atol=1e-11 * mu**2)

    def test_forward_difference(self):
        g = Grid1D(0.0, 1.0, 4)
        v = NodalField(g, [0, 1, 3, 2j, 0])
        assert_allclose(forward_diff(v), [4, 8, 8j - 12, -8j])


class TestNormEquivalence:
    def test_bounds_on_random_fields(self):
        rng = np.random.default_rng(2)
        for N in (8, 16, 32, 64):
            g = Grid1D(-1.0, 1.0, N)
            for _ in range(50):
                lhs, mid, rhs, ok = norm_equivalence_check(random_spectral(g, rng, decay=rng.uniform(0, 3)))
                assert ok and lhs <= mid * (1 + 1e-12) and mid <= rhs * (1 + 1e-12)

    def test_explicit_sums(self):
        rng = np.random.default_rng(3)
        g = Grid1D(0.0, 2.0, 10)
        c = random_spectral(g, rng)
        v = dst_synthesize(c)
        lhs = np.sqrt(sum(g.h * abs(v.values[j + 1] - v.values[j]) ** 2 / g.h**2 for j in range(g.N)))
        mid = np.sqrt(quad_abs2(lambda x: series_derivative(c, x), 0.0, 2.0))
        got = norm_equivalence_check(c)
        assert_allclose(got[0], lhs, rtol=1e-12)
        assert_allclose(got[1], mid, rtol=1e-9)

    def test_top_mode_approaches_upper_constant(self):
        # For the highest mode the ratio is (mu h / 2) / sin(mu h / 2), which tends to pi/2.
        for N in (16, 256):
            g = Grid1D(0.0, 1.0, N)
            lhs, mid, _, _ = norm_equivalence_check(SpectralField.single_mode(g, N - 1))
            t = g.frequencies[-1] * g.h / 2
            assert_allclose(mid / lhs, t / np.sin(t), rtol=1e-10)
        assert mid / lhs > 1.56


class TestMonitoredRatios:
    def test_ratios_are_finite(self):
        rng = np.random.default_rng(9)
        g = Grid1D(-1.0, 1.0, 32)
        c = random_spectral(g, rng)
        assert 0 < gagliardo_nirenberg_ratio(dst_synthesize(c)) < 10
        assert 0 < embedding_ratio(c) < 10
        assert gagliardo_nirenberg_ratio(NodalField.zeros(g)) == 0.0


class TestCsv:
    def test_round_trip_and_metadata(self):
        recs = [ObservableRecord(0.0, 1.0, -0.5, 1.0, 2.0, 0.7), ObservableRecord(0.1, 1.0 - 1e-15, -0.5 + 1e-9)]
        text = records_to_csv(recs, {"config_hash": "abc", "version": "0.1.0"})
        lines = text.splitlines()
        assert lines[0] == "time,mass,energy,l2,h1,linf"
        assert lines[-1] == "# config_hash=abc version=0.1.0"
        back = records_from_csv(text)
        assert back[0] == recs[0]
        assert back[1].mass == recs[1].mass and np.isnan(back[1].l2)
