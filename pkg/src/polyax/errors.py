"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument violates a mathematical precondition (order, sign, range)."""


class GridMismatchError(ValueError):
    """Fields or plans built on incompatible grids were combined."""


class NotAdmissibleError(ValueError):
    """A multiplier failed the scale-admissibility check.

    Carries the offending report in ``.report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class FieldFormatError(ValueError):
    """A field file (CSV or PAXF) is malformed or inconsistent."""


class ConfigError(ValueError):
    """An experiment config failed parse-time validation."""


class AccuracyWarning(UserWarning):
    """An operation ran outside its comfortable accuracy envelope."""
