"""Exceptions raised by weldlab.

Every error carries a short machine readable ``kind`` so the command line
front end can map it to an exit status and a report field.
"""


class WeldlabError(Exception):
    """Base class. ``numerical`` errors map to exit status 2."""

    kind = "error"
    numerical = True


class ZeroLeadingCoefficient(WeldlabError):
    kind = "zero_leading_coefficient"


class WindowUnderflow(WeldlabError):
    kind = "window_underflow"


class ShapeMismatch(WeldlabError):
    kind = "shape_mismatch"


class NotInvertible(WeldlabError):
    kind = "not_invertible"


class NotMonotone(WeldlabError):
    kind = "not_monotone"


class BadMobiusParameter(WeldlabError):
    kind = "bad_mobius_parameter"


class NewtonDivergence(WeldlabError):
    kind = "newton_divergence"


class AliasRisk(WeldlabError):
    kind = "alias_risk"


class WindowTooSmall(WeldlabError):
    kind = "window_too_small"


class SingularSystem(WeldlabError):
    kind = "singular_system"


class ResidualTooLarge(WeldlabError):
    kind = "residual_too_large"


class SingularMatrix(WeldlabError):
    kind = "singular_matrix"


class NonPositiveDefinite(WeldlabError):
    kind = "non_positive_definite"
