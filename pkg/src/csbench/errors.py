"""Exception hierarchy shared across the toolkit.

Every error the library raises deliberately derives from ``CsBenchError``
so the CLI can map failures to exit codes without catching bare
exceptions.
"""


class CsBenchError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(CsBenchError, ValueError):
    """A precondition on an operation's arguments was violated."""


class DegenerateMatrixError(CsBenchError):
    """The matrix is unusable for the requested operation (e.g. zero column)."""


class BudgetExceededError(CsBenchError):
    """An exhaustive search would exceed its configured work budget."""


class UndefinedMetricError(CsBenchError):
    """The metric is undefined for these inputs (zero denominator)."""


class ConfigError(CsBenchError):
    """A configuration document failed to parse or validate.

    ``path`` names the offending key, dotted for nesting.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"config error at '{path}': {message}")
