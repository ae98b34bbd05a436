"""Exception types raised by the model and harness layers."""


class ModelError(ValueError):
    """Base class for invalid or degenerate model inputs."""


class NonErgodicChain(ModelError):
    """The Markov chain is reducible or periodic."""


class SolveFailure(ModelError):
    """A linear system was numerically singular."""


class InvalidState(ModelError):
    """A chain state index fell outside 1..n."""


class DegenerateChain(ModelError):
    """Two-state chain with both states absorbing (p = p' = 1)."""


class ZeroVolatility(ModelError):
    """Total volatility sigma_bar is zero, so the closed form is undefined."""


class SigmaBarZero(ZeroVolatility):
    """FCLT normalisation by sigma_bar = 0."""


class ConfigError(ValueError):
    """Experiment configuration failed validation.

    The message always names the offending ``section.key``.
    """
