"""
Exceptions raised by robustdec.

All errors derive from RobustDecError so callers can catch the package's
failures in one place. Parameter and shape problems also derive from
ValueError (and backend problems from TypeError) so generic handlers keep
working.
"""

__all__ = ['RobustDecError', 'DimensionError', 'InvalidParameterError',
           'InfeasibleBeliefError', 'InfeasiblePointError',
           'UnsupportedBackendError', 'MarketDegeneracyError',
           'SolverQualityError', 'CoherenceError', 'PreconditionError',
           'InvariantViolationError', 'CapacityError', 'ConfigurationError',
           'ScenarioValidationError']


class RobustDecError(Exception):
    pass


class DimensionError(RobustDecError, ValueError):
    pass


class InvalidParameterError(RobustDecError, ValueError):
    pass


class InfeasibleBeliefError(RobustDecError, ValueError):
    pass


class InfeasiblePointError(InfeasibleBeliefError):
    """
    A hypothesis point whose model has an empty belief for some action.
    """

    def __init__(self, message, point=None, action=None):
        super().__init__(message)
        self.point = point
        self.action = action


class UnsupportedBackendError(RobustDecError, TypeError):
    pass


class MarketDegeneracyError(RobustDecError):
    pass


class SolverQualityError(RobustDecError):
    pass


class CoherenceError(RobustDecError):
    pass


class PreconditionError(RobustDecError):
    pass


class InvariantViolationError(RobustDecError):
    """
    A checked invariant failed mid-computation.

    Inputs:
        message - Human readable description.
        diagnostics - Optional dict with the offending values, kept for reports.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class CapacityError(RobustDecError):
    def __init__(self, message, counts=None):
        super().__init__(message)
        self.counts = counts or {}


class ConfigurationError(RobustDecError):
    pass


class ScenarioValidationError(ConfigurationError):
    """
    Scenario document failed validation.

    Inputs:
        fields - List of (location, message) pairs, one per offending field.
    """

    def __init__(self, fields):
        self.fields = list(fields)
        lines = ['{}: {}'.format(loc, msg) for loc, msg in self.fields]
        super().__init__('invalid scenario:\n  ' + '\n  '.join(lines))
