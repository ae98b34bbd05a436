# # An insurer investing its surplus
#
# Claims arrive as a marked Hawkes sum; premiums flow in at rate c. The
# insurer keeps part of its surplus in a risky asset (drift a, volatility
# b) and the rest at the bank rate r. Under exponential utility the
# optimal fraction has a closed form.

import math

from hawkes_merton import (
    ExponentialKernel,
    GCHPModel,
    HawkesParams,
    InsuranceModel,
    MarkovChainSpec,
    hjb_first_order_check,
    optimal_fraction_insurance,
    poisson_optimal_fraction,
    stationary_distribution,
)
from hawkes_merton.merton_insurance import hjb_objective

claims = GCHPModel(
    HawkesParams(1.0, ExponentialKernel(0.5, 1.0)),
    MarkovChainSpec([[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.3, 0.3, 0.4]], [0.5, 1.0, 2.0]),
)
model = InsuranceModel.from_claims(claims, u=10.0, c=2.8, a=0.08, b=0.2, r=0.03)
print(f"expected claim rate {model.drift_claims:.4f}, premium {model.c}, sigma_bar {model.sigma_bar:.4f}")

sol = optimal_fraction_insurance(model)
print(f"theta = {sol.theta:.4f}, p = {sol.p:.4f}, pi = {sol.pi:.4f}")
print("p within the stated bound 2 u r / sigma_bar^2:", sol.p_constraint_ok)

# ## Checking the first-order condition
#
# The pi-dependent part of the HJB generator is a concave parabola whose
# vertex must be the closed-form fraction.

print("first-order residual:", hjb_first_order_check(model, sol))
for dp in (-0.05, 0.0, 0.05):
    print(f"  h(pi {dp:+.2f}) = {hjb_objective(model, sol.p, sol.pi + dp):.6f}")

# ## Hawkes claims versus Poisson claims
#
# Keep the long-run claim rate and the stationary claim-size law, but drop
# both the self-excitation and the Markov dependence between sizes. The
# Poisson corollary gives the fraction in closed form. sigma_bar is
# smaller, and the closed form scales the risky position down with it:
# the fraction vanishes as sigma_bar goes to zero.

w = stationary_distribution(claims.chain).pi_star
m1, m2 = float(w @ claims.chain.a), float(w @ claims.chain.a**2)
rate = claims.hawkes.mean_rate
poisson_pi = poisson_optimal_fraction(rate, m2, model.c, model.u, model.r, model.a, model.b, m1)
print(f"sigma_bar: Hawkes {model.sigma_bar:.4f}, Poisson {math.sqrt(rate * m2):.4f}")
print(f"fraction:  Hawkes {sol.pi:.4f}, Poisson {poisson_pi:.4f}")
