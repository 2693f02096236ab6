"""Exception types shared across the package."""


class DegenerateWindow(Exception):
    """Barrier window has numerically zero one-step survival probability."""


class SeriesNotConverged(Exception):
    """A reflection/image series hit its term cap before reaching tolerance."""


class InvalidRatio(Exception):
    """Importance-sampling density ratio evaluated to a non-finite value."""


class InvalidTwist(Exception):
    """An intermediate payoff-twist function evaluated to a non-positive value."""


class DegenerateSupport(Exception):
    """All resampling weights are zero; nothing can be selected."""


class ConfigError(Exception):
    """Experiment configuration violates an invariant; message names the field."""


class InsufficientReps(Exception):
    """Fewer than two repetitions per cell; standard errors undefined."""
