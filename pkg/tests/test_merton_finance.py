import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hawkes_merton.errors import ZeroVolatility
from hawkes_merton.gchp import DiffusionParams, GCHPModel, diffusion_params
from hawkes_merton.hawkes import ExponentialKernel, HawkesParams
from hawkes_merton.markov import MarkovChainSpec
from hawkes_merton.merton_finance import (
    FinanceMarket,
    expected_log_utility,
    grid_search_optimal_pi,
    optimal_fraction_finance,
    simulate_stock,
    simulate_wealth,
    stock_sde_coefficients,
    terminal_log_wealth,
)

REF = DiffusionParams.from_drift_vol(0.08, 0.2)
FLAT = DiffusionParams.from_drift_vol(0.0, 0.0)


def market(params=REF, r=0.0, x0=1.0):
    return FinanceMarket(r=r, params=params, x0=x0)


@st.composite
def markets(draw):
    sigma_bar = draw(st.floats(0.05, 2.0))
    drift = draw(st.floats(-1.0, 1.0)) * sigma_bar  # inside the count-noise floor for rate 1
    r = draw(st.floats(-0.05, 0.2))
    return market(DiffusionParams.from_drift_vol(drift, sigma_bar), r=r, x0=draw(st.floats(0.1, 100.0)))


class TestCoefficients:
    def test_zero_vol(self):
        assert stock_sde_coefficients(FLAT) == (0.0, 0.0)

    def test_ito_correction(self):
        mu, vol = stock_sde_coefficients(REF)
        assert mu == pytest.approx(0.10, abs=1e-15) and vol == 0.2

    def test_zero_mean_marks(self):
        chain = MarkovChainSpec([[0.5, 0.5], [0.5, 0.5]], [-1.0, 1.0])
        d = diffusion_params(GCHPModel(HawkesParams(1.0, ExponentialKernel(0.5, 1.0)), chain))
        mu, _ = stock_sde_coefficients(d)
        assert mu == pytest.approx(d.sigma_star**2 / 2, rel=1e-14)


class TestOptimalFraction:
    def test_zero_excess(self):
        assert optimal_fraction_finance(REF, 0.10).pi_star == pytest.approx(0.0, abs=1e-14)

    def test_hand_value(self):
        assert optimal_fraction_finance(REF, 0.0).pi_star == pytest.approx(2.5, abs=1e-12)

    def test_driftless(self):
        d = DiffusionParams.from_drift_vol(0.0, 1.0)
        assert optimal_fraction_finance(d, 0.5).pi_star == 0.0

    def test_zero_vol_raises(self):
        with pytest.raises(ZeroVolatility):
            optimal_fraction_finance(FLAT, 0.0)

    @settings(max_examples=100, deadline=None)
    @given(markets(), st.floats(0.01, 1e3))
    def test_invariant_to_wealth_scale(self, m, c):
        scaled = market(m.params, m.r, m.x0 * c)
        assert optimal_fraction_finance(scaled.params, scaled.r) == optimal_fraction_finance(m.params, m.r)

    @settings(max_examples=200, deadline=None)
    @given(markets(), st.sampled_from([-1.0, -0.1, 0.1, 1.0]), st.floats(0.1, 10.0))
    def test_concave_at_optimum(self, m, h, T):
        pi = optimal_fraction_finance(m.params, m.r).pi_star
        assert expected_log_utility(m, pi + h, T) <= expected_log_utility(m, pi, T)


class TestUtility:
    def test_all_bond(self):
        m = market(r=0.03, x0=2.0)
        assert expected_log_utility(m, 0.0, 3.0) == pytest.approx(math.log(2.0) + 0.09, abs=1e-15)

    def test_hand_value(self):
        assert expected_log_utility(market(), 2.5, 1.0) == pytest.approx(0.125, abs=1e-15)

    def test_market_rejects_bad_wealth(self):
        with pytest.raises(ValueError):
            market(x0=0.0)


class TestSimulateWealth:
    def test_all_bond_exact(self):
        m = market(r=0.04, x0=3.0)
        path = simulate_wealth(m, 0.0, 2.0, 50, 1)
        np.testing.assert_allclose(path.wealth, 3.0 * np.exp(0.04 * path.times), rtol=1e-14)

    @pytest.mark.parametrize("pi", [-1.0, 0.5, 3.0])
    def test_deterministic_market(self, pi):
        m = market(FLAT, r=-0.02, x0=1.5)
        path = simulate_wealth(m, pi, 5.0, 20, 0)
        growth = m.r + pi * (m.mu_e - m.r)
        assert path.wealth[-1] == pytest.approx(1.5 * math.exp(growth * 5.0), rel=1e-13)

    def test_log_growth_full_stock(self):
        m = market()
        T = 1.0
        g = np.array([math.log(simulate_wealth(m, 1.0, T, 4, 100 + i).wealth[-1]) / T for i in range(10_000)])
        se = g.std(ddof=1) / math.sqrt(g.size)
        assert abs(g.mean() - 0.08) < 3 * se

    def test_positive_even_with_leverage(self):
        path = simulate_wealth(market(DiffusionParams.from_drift_vol(0.0, 1.0)), -4.0, 10.0, 1000, 3)
        assert np.all(path.wealth > 0)

    def test_extreme_leverage_does_not_raise(self):
        # log-wealth near -1280: representable in log space, underflows in wealth
        path = simulate_wealth(market(DiffusionParams.from_drift_vol(0.0, 2.0)), 8.0, 10.0, 1000, 3)
        assert np.all(path.wealth >= 0)

    def test_full_stock_equals_stock_pathwise(self):
        m = market(r=0.01, x0=2.0)
        w = simulate_wealth(m, 1.0, 3.0, 300, 17).wealth
        s = simulate_stock(m, 3.0, 300, 17)
        np.testing.assert_allclose(w, 2.0 * s, rtol=1e-12)

    def test_csv(self, tmp_path):
        lines = simulate_wealth(market(), 0.0, 1.0, 2, 0).to_csv(tmp_path / "w.csv").read_text().splitlines()
        assert lines[0] == "step,time,wealth" and lines[1] == "0,0,1" and len(lines) == 4


class TestGridSearch:
    def test_singleton(self):
        assert grid_search_optimal_pi(market(), [2.5], 1.0, 50, 0).best_pi == 2.5

    def test_deterministic_market_picks_largest(self):
        res = grid_search_optimal_pi(market(FLAT, r=-0.02), [0.0, 1.0, 2.0], 1.0, 10, 0)
        assert res.best_pi == 2.0

    def test_reference_grid(self):
        res = grid_search_optimal_pi(market(), np.arange(21) * 0.25, 1.0, 10_000, 2024)
        assert res.best_pi == 2.5
        k = 10
        assert abs(res.utility_mc[k] - 0.125) < 3 * res.stderr[k]

    def test_crn_matches_path_simulation(self):
        m = market(r=0.01)
        logx = terminal_log_wealth(m, [0.7], 2.0, 5, 40, n_steps=8)
        direct = [math.log(simulate_wealth(m, 0.7, 2.0, 8, 40 + i).wealth[-1]) for i in range(5)]
        np.testing.assert_allclose(logx[0], direct, rtol=1e-12)

    def test_mc_matches_analytic_random(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            sb = rng.uniform(0.1, 0.6)
            m = market(DiffusionParams.from_drift_vol(rng.uniform(-0.5, 0.5) * sb, sb), r=rng.uniform(0, 0.05))
            pi = rng.uniform(-2.0, 4.0)
            res = grid_search_optimal_pi(m, [pi], 1.0, 4000, int(rng.integers(1 << 30)))
            assert abs(res.utility_mc[0] - res.utility_analytic[0]) < 3 * res.stderr[0]
