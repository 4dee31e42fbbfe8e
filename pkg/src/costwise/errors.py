"""Exception types shared across the package."""


class CostwiseError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(CostwiseError):
    """Vector/matrix shapes do not line up with the problem definition."""


class ZeroEvidence(CostwiseError):
    """All likelihood mass vanishes on the belief's support (contradictory evidence)."""


class UnknownAction(CostwiseError):
    """Action id not present in the decision problem."""


class UnknownState(CostwiseError):
    """State id not present in the decision problem."""


class DegenerateCosts(CostwiseError):
    """Cost matrix makes the two actions indistinguishable; no threshold exists."""


class Unparseable(CostwiseError):
    """Provider response contains no numeric token."""


class ProviderUnavailable(CostwiseError):
    """Provider transport is misconfigured or unreachable (not a parse failure)."""


class EmptyPanel(CostwiseError):
    """No provider estimates to aggregate."""


class RaggedMatrix(CostwiseError):
    """Provider rows disagree on the number of states."""


class InsufficientProviders(CostwiseError):
    """Disagreement statistics need at least two providers."""


class InconsistentModel(CostwiseError):
    """Outcome-model rows do not normalize to 1."""


class LengthMismatch(CostwiseError):
    """Paired samples have different lengths."""


class NoEligibleGroups(CostwiseError):
    """Fewer than two groups meet the minimum size for a parity gap."""


class ConfigError(CostwiseError):
    """Experiment configuration failed validation."""
