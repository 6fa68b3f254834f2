"""Exception types raised by the selection engine and its oracles."""


class RaiError(Exception):
    """Base class for all package-specific errors."""


class AllColumnsConstant(RaiError):
    """Every predictor column was constant; nothing to standardize."""


class ConstantResponse(RaiError):
    """The response has zero variance; selection is undefined."""


class CollinearFeature(RaiError):
    """A column lies in the span of the current basis (within tolerance)."""


class InsufficientDf(RaiError):
    """Too few residual degrees of freedom to form a t-statistic."""


class SingularSubset(RaiError):
    """A subset of columns is rank deficient."""


class SingularStep(RaiError):
    """Forward stepwise found no addable column (all remaining collinear)."""


class InsufficientWealth(RaiError):
    """A spend was requested that exceeds the current wealth."""


class NoFinitePass(RaiError):
    """No future pass level can be cleared by any remaining candidate."""


class BudgetExceeded(RaiError):
    """An enumeration would exceed the configured subset budget."""


class AllSubsetsSingular(RaiError):
    """Every candidate subset was numerically singular."""


class ConstantInteraction(RaiError):
    """A realized interaction column is constant and cannot be standardized."""


class DegenerateTerms(RaiError):
    """A true-model term column is constant; coefficients cannot be scaled."""


class LengthMismatch(RaiError):
    """Two vectors that must align have different lengths."""
