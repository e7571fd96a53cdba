import math

import numpy as np
import pytest
from numpy.polynomial.hermite_e import hermegauss

from tickcoint.clock import EventClock
from tickcoint.errors import ConfigError, ConsistencyError, ParameterError
from tickcoint.fracgauss import white_noise_spec, gen_long_memory_gaussian
from tickcoint.shocks import (
    EfficientSpec,
    NoiseSpec,
    coint_error_decomposition,
    gen_efficient,
    gen_noise,
    gen_weak_noise,
    gen_xi,
    leverage_constants,
    xi_transform,
)


def gauss_expect(f, deg=80):
    x, w = hermegauss(deg)
    return float(np.sum(w * f(x)) / math.sqrt(2 * math.pi))


class TestEfficient:
    @pytest.mark.parametrize("law", ["gaussian", "two-point", "uniform"])
    def test_variance(self, law):
        e = gen_efficient(EfficientSpec(2.0, law), 400_000, seed=1)
        assert e.mean() == pytest.approx(0.0, abs=0.01)
        assert e.var() == pytest.approx(2.0, rel=0.02)

    def test_two_point_support(self):
        e = gen_efficient(EfficientSpec(4.0, "two-point"), 100, seed=2)
        assert set(np.unique(e)) <= {-2.0, 2.0}

    def test_validation(self):
        with pytest.raises(ParameterError):
            EfficientSpec(0.0)
        with pytest.raises(ParameterError):
            EfficientSpec(1.0, "cauchy")


class TestNoise:
    def test_weak_partial_sums_scale(self):
        spec = NoiseSpec("weak", hurst=0.25, scale=0.5)
        sums = np.array([gen_weak_noise(spec, 64, seed=s).sum() for s in range(4000)])
        assert sums.var() == pytest.approx(0.25 * 64**0.5, rel=0.08)

    def test_weak_hurst_range(self):
        with pytest.raises(ParameterError):
            NoiseSpec("weak", hurst=0.6)

    def test_none_regime(self):
        xi, eta = gen_noise(NoiseSpec(), None, 5, 0)
        assert not xi.any() and not eta.any() and xi.shape == (6,)

    def test_transforms(self):
        y = np.array([0.0, 1.0, 2.0])
        np.testing.assert_allclose(xi_transform("leverage-square", y), y**2 - 1)
        expected = y**2 - 1 - 0.75 * (y**3 - 3 * y)
        np.testing.assert_allclose(xi_transform("leverage-hermite23", y), expected)

    def test_leverage_uses_next_driver_value(self):
        y = np.arange(6.0) / 3
        xi, eta = gen_xi(NoiseSpec("strong", construction="leverage-square"), y, 5, 0)
        assert xi[0] == 0.0
        np.testing.assert_allclose(xi[1:], y[1:6] ** 2 - 1)
        np.testing.assert_allclose(np.cumsum(eta), xi[1:])

    def test_martingale_product(self):
        y = np.random.default_rng(0).standard_normal(11)
        xi, _ = gen_xi(NoiseSpec("standard", construction="martingale-product", sigma=0.6), y, 10, 3)
        np.testing.assert_allclose(np.abs(xi[1:]), np.exp(0.3 * y[:10]))

    def test_driver_required(self):
        spec = NoiseSpec("strong", construction="leverage-square")
        with pytest.raises(ConfigError):
            gen_xi(spec, None, 5, 0)
        with pytest.raises(ConfigError):
            gen_xi(spec, np.zeros(5), 5, 0)

    def test_independent_long_memory(self):
        spec = NoiseSpec("strong", hurst=0.75, construction="independent-long-memory", scale=2.0)
        xi, eta = gen_noise(spec, None, 100, 0)
        assert xi.shape == (101,) and eta.shape == (100,)
        assert xi[0] == 0.0
        with pytest.raises(ParameterError):
            NoiseSpec("strong", hurst=0.25, construction="independent-long-memory")

    def test_standard_default_is_iid(self):
        spec = NoiseSpec("standard", construction="independent-long-memory")
        xi = np.concatenate([gen_noise(spec, None, 200, s)[0][1:] for s in range(200)])
        assert xi.var() == pytest.approx(1.0, rel=0.05)


class TestLeverageConstants:
    @pytest.mark.parametrize("construction", ["leverage-square", "leverage-hermite23"])
    @pytest.mark.parametrize("sigma", [0.5, 1.0, 1.3])
    def test_closed_forms_against_quadrature(self, construction, sigma):
        k = leverage_constants(construction, sigma)
        g = lambda x: xi_transform(construction, x)  # noqa: E731
        lam = math.exp(-0.5 * sigma**2)
        m = gauss_expect(lambda x: g(x) * np.exp(sigma * x))
        c1 = gauss_expect(lambda x: x * np.exp(sigma * x))
        c2 = gauss_expect(lambda x: x * g(x) * np.exp(sigma * x))
        assert k.m == pytest.approx(m, rel=1e-10)
        assert k.mu_star == pytest.approx(lam * m, rel=1e-10)
        assert k.lm_coefficient == pytest.approx(c2 - lam * m * c1, rel=1e-9, abs=1e-12)
        assert k.xi_variance == pytest.approx(gauss_expect(lambda x: g(x) ** 2), rel=1e-10)

    def test_published_correlations(self):
        # square case equals 1 / sqrt(2 (e - 1)) ~ .539; Hermite case ~ .082
        assert leverage_constants("leverage-square").corr_scale == pytest.approx(1 / math.sqrt(2 * (math.e - 1)))
        assert leverage_constants("leverage-square").corr_scale == pytest.approx(0.539, abs=5e-4)
        assert leverage_constants("leverage-hermite23").corr_scale == pytest.approx(0.082, abs=5e-4)

    def test_corr_with_exponential_innovations(self):
        k = leverage_constants("leverage-square")
        y = np.random.default_rng(5).standard_normal(1_000_001)
        tau = np.random.default_rng(6).standard_exponential(1_000_000) * np.exp(y[1:])
        emp = np.corrcoef(xi_transform("leverage-square", y[1:]), tau)[0, 1]
        assert k.corr_tau(2.0) == pytest.approx(emp, abs=0.01)
        assert k.corr_tau(1.0) == pytest.approx(k.corr_scale)

    def test_mu_star_is_time_average(self):
        # calendar-time mean of xi_{N(s)}: xi_k is held for tau_{k+1}
        rng = np.random.default_rng(8)
        y = gen_long_memory_gaussian(white_noise_spec(), 2_000_001, rng)
        tau = rng.standard_exponential(2_000_001) * np.exp(y)
        xi = xi_transform("leverage-square", y[1:])
        emp = np.sum(xi * tau[1:]) / np.sum(tau[1:])
        assert emp == pytest.approx(leverage_constants("leverage-square").mu_star, rel=0.03)

    def test_hermite23_coefficient_vanishes_only_at_eight_ninths(self):
        assert leverage_constants("leverage-hermite23", 8 / 9).lm_coefficient == pytest.approx(0.0, abs=1e-12)
        assert leverage_constants("leverage-hermite23", 1.0).lm_coefficient == pytest.approx(-0.25 * math.exp(0.5))

    def test_long_memory_scale(self):
        k = leverage_constants("leverage-square")
        phi = math.sqrt(0.2 / (0.7 * 0.4))
        assert k.long_memory_scale(0.7, 0.2) == pytest.approx(phi * 2 * math.exp(0.5))

    def test_no_closed_form(self):
        with pytest.raises(ParameterError):
            leverage_constants("martingale-product")


class TestDecomposition:
    def test_hand_example(self):
        # asset 1 trades at 1, 3; asset 2 at 2, 4; theta = 2
        c1, c2 = EventClock(np.array([1.0, 3.0])), EventClock(np.array([2.0, 4.0]))
        e1, e2 = np.array([1.0, 10.0]), np.array([100.0, 1000.0])
        xi1, xi2 = np.array([0.0, 0.1, 0.2]), np.array([0.0, 0.01, 0.02])
        d = coint_error_decomposition(c1, c2, e1, e2, xi1, xi2, 2.0, [3.5])
        # at 3.5: N1 = 2, N2 = 1, last asset-2 trade at 2 saw one asset-1 event,
        # last asset-1 trade at 3 saw one asset-2 event
        assert d.r1[0] == 10.0
        assert d.r2[0] == 0.0
        assert d.noise1[0] == pytest.approx(0.2)
        assert d.noise2[0] == pytest.approx(0.01)

    def test_mismatch_raises(self):
        c = EventClock(np.array([1.0]))
        with pytest.raises(ConsistencyError):
            coint_error_decomposition(c, c, [1.0], [1.0], [0, 0], [0, 0], 1.0, [2.0], y1=[5.0], y2=[0.0])
