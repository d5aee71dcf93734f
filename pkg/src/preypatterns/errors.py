"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration: bad parameter values, unknown keys, broken files."""


class NumericalError(RuntimeError):
    """A numerical procedure failed: non-finite fields, no convergence, degenerate input."""


class NoTuringBifurcation(NumericalError):
    """The dispersion relation admits no marginal wavenumber with positive diffusion."""
