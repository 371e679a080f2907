"""Exception and warning types shared across the package."""


class RatingError(Exception):
    """Base class for every error raised by this package."""


class DataValidationError(RatingError):
    """Input data violates a structural requirement."""


class RosterSizeViolation(DataValidationError):
    """A map does not have exactly five distinct players per side."""


class DuplicateMapId(DataValidationError):
    """The same map identifier appears more than once."""


class PlayerOnBothTeams(DataValidationError):
    """A player is listed on both sides of the same map."""


class EmptyModel(DataValidationError):
    """An operation would leave no rows or no players to model."""


class MissingPrior(DataValidationError):
    """A rating prior is required but absent for at least one player."""


class ZeroVariance(DataValidationError):
    """A vector that must vary is constant."""


class TooFewPoints(DataValidationError):
    """Not enough observations for the requested statistic."""


class NeedTwoChains(DataValidationError):
    """Convergence diagnostics require at least two chains."""


class NumericalError(RatingError):
    """A solver or decomposition failed to produce finite results."""


class ScorelineWarning(UserWarning):
    """A one-round final margin, which a finished map cannot produce."""


class SingleClassFoldWarning(UserWarning):
    """A cross-validation fold holds only wins or only losses."""
