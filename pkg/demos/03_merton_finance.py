# # Log-optimal investment in a Hawkes-driven stock
#
# With the stock's log-price replaced by its diffusion limit, the stock is
# a geometric Brownian motion with drift mu_e = drift + sigma_bar^2 / 2.
# A log-utility investor holds the constant fraction
# (mu_e - r) / sigma_bar^2 in it.

import numpy as np

from hawkes_merton import (
    DiffusionParams,
    FinanceMarket,
    expected_log_utility,
    grid_search_optimal_pi,
    optimal_fraction_finance,
    simulate_wealth,
)

params = DiffusionParams.from_drift_vol(0.08, 0.2)
market = FinanceMarket(r=0.0, params=params)
pi_star = optimal_fraction_finance(params, market.r).pi_star
print(f"mu_e = {market.mu_e:.3f}, closed-form pi* = {pi_star}")

# ## Utility curve
#
# E log X_T is a downward parabola in pi with its top at pi*.

grid = np.arange(21) * 0.25
res = grid_search_optimal_pi(market, grid, T=1.0, n_paths=10_000, seed=2024)
for p, mc, exact, se in zip(res.pi_grid, res.utility_mc, res.utility_analytic, res.stderr):
    bar = "#" * max(0, int(400 * (exact + 0.2)))
    print(f"pi = {p:4.2f}  MC {mc:+.4f} +/- {se:.4f}  exact {exact:+.4f}  {bar}")
print("Monte Carlo argmax:", res.best_pi)

# ## Wealth paths
#
# Levered portfolios grow fastest on average but swing hardest.

for p in (0.0, 1.0, pi_star, 5.0):
    w = np.array([simulate_wealth(market, p, 10.0, 10, seed=s).wealth[-1] for s in range(2000)])
    print(f"pi = {p:3.1f}: median X_10 = {np.median(w):7.3f}, 5% quantile {np.quantile(w, 0.05):6.3f}, "
          f"E log X_10 = {expected_log_utility(market, p, 10.0):+.3f}")
