"""Hawkes and general compound Hawkes processes, their diffusion limits, and
closed-form Merton-optimal investment for a GCHP stock and a GCHP risk model."""
from importlib.resources import files

from .errors import (
    ConfigError,
    DegenerateChain,
    InvalidState,
    ModelError,
    NonErgodicChain,
    SigmaBarZero,
    SolveFailure,
    ZeroVolatility,
)
from .gchp import (
    DiffusionParams,
    GCHPModel,
    MarkedEventPath,
    a_star,
    approximate_diffusion_path,
    diffusion_params,
    fclt_statistic_gchp,
    sigma_squared,
    simulate_gchp,
    two_state_chain,
    two_state_params,
)
from .hawkes import (
    EventPath,
    ExponentialKernel,
    HawkesParams,
    ZeroKernel,
    branching_ratio,
    fclt_statistic_hp,
    intensity_at,
    lln_statistic_hp,
    simulate_hawkes,
)
from .markov import (
    MarkovChainSpec,
    StationaryDistribution,
    fundamental_solve,
    is_ergodic,
    simulate_chain,
    stationary_distribution,
)
from .merton_finance import (
    FinanceMarket,
    FinanceStrategy,
    expected_log_utility,
    grid_search_optimal_pi,
    optimal_fraction_finance,
    simulate_wealth,
    stock_sde_coefficients,
)
from .merton_insurance import (
    InsuranceModel,
    InsuranceSolution,
    SurplusPath,
    generator_coefficients,
    hjb_first_order_check,
    optimal_fraction_insurance,
    poisson_optimal_fraction,
    ruin_probability_mc,
    simulate_surplus_diffusion,
    simulate_surplus_jump,
    solve_p,
    theta,
)


def config_path(name: str):
    """Path of a bundled config, e.g. ``config_path("reference_two_state.cfg")``."""
    return files(__name__) / "configs" / name
