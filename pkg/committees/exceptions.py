# committees/exceptions.py
"""Errors raised by the committee-selection library."""


class PanelforgeError(Exception):
    """Base class for every library error."""


class InvalidSpace(PanelforgeError):
    "Raised when feature domains do not describe a valid candidate space."


class InvalidTarget(PanelforgeError):
    "Raised when a target vector is off the simplex or touches its boundary."


class EmptyCommittee(PanelforgeError):
    "Raised when a representation profile is requested for an empty committee."


class ShapeMismatch(PanelforgeError):
    "Raised when two per-feature objects live on different candidate spaces."


class BadMarginal(PanelforgeError):
    "Raised when a marginal vector is negative or too far from summing to one."


class DegenerateInput(PanelforgeError):
    "Raised when a Bayes adjustment leaves no probability mass."


class NoSamples(PanelforgeError):
    "Raised when a confidence set is requested before any candidate was seen."


class NumericalFailure(PanelforgeError):
    "Raised when the simplex cannot certify a status for a program."


class NotStrictlyPositive(PanelforgeError):
    "Raised when the known-distribution program is built on a distribution with empty cells."


class InfeasibleProgram(PanelforgeError):
    "Raised when a committee program has no representative occupation measure."

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


class CommitteeFull(PanelforgeError):
    "Raised when a strategy is asked to decide after K acceptances."


class ZeroGain(PanelforgeError):
    "Raised when a policy never accepts, so the stopping time is infinite."


class SolverFallback(UserWarning):
    """Non-fatal: an episode program failed and the previous policy was kept."""
