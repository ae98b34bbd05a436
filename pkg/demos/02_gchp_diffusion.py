# # Marked Hawkes sums and their diffusion approximation
#
# Attach to every Hawkes event a mark a(X_k), where X is a finite Markov
# chain. The running sum S(t) grows at rate a* lambda0 / (1 - mu_hat) and
# fluctuates like sigma_bar W(t), where sigma_bar mixes the mark noise and
# the count noise.

import math

import numpy as np

from hawkes_merton import (
    ExponentialKernel,
    GCHPModel,
    HawkesParams,
    approximate_diffusion_path,
    diffusion_params,
    simulate_gchp,
    sigma_squared,
    stationary_distribution,
    two_state_chain,
    two_state_params,
)

# ## A two-state chain
#
# State 1 carries +delta and stays put with probability p; state 2 carries
# -delta and stays with probability p'. The general matrix formula and the
# two-state closed form must agree.

chain = two_state_chain(1.0, 0.7, 0.6)
pi = stationary_distribution(chain)
print("stationary law:", pi.pi_star)
print("sigma^2 (matrix formula):", sigma_squared(chain, pi))
print("sigma^2 (closed form):   ", two_state_params(1.0, 0.7, 0.6)[1])

# ## Limit parameters

model = GCHPModel(HawkesParams(1.0, ExponentialKernel(0.5, 1.0)), chain)
params = diffusion_params(model)
for key, val in params.to_dict().items():
    print(f"  {key:>10s} = {val:.6f}")

# ## Simulated sum versus its diffusion
#
# Over a long horizon the terminal spread of S(T) - drift T, scaled by
# sqrt(T), matches sigma_bar.

T = 1000.0
inc = np.array([simulate_gchp(model, T, seed=i).terminal for i in range(300)])
z = (inc - params.drift * T) / math.sqrt(T)
print(f"empirical sd {z.std(ddof=1):.3f} vs sigma_bar {params.sigma_bar:.3f}")

diff = np.array([approximate_diffusion_path(params, 0.0, T, 10.0, seed=i).values[-1] for i in range(300)])
print(f"diffusion sd {((diff - params.drift * T) / math.sqrt(T)).std(ddof=1):.3f}")
