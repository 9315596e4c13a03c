"""Exception hierarchy shared by every module."""


class InoueError(Exception):
    """Base class; ``code`` is the machine-readable name used by the CLI."""

    @property
    def code(self) -> str:
        return type(self).__name__


class NotUnimodular(InoueError):
    pass


class WrongEigenvaluePattern(InoueError):
    pass


class RootFindingFailure(InoueError):
    pass


class SingularBasis(InoueError):
    pass


class IntegerOverflow(InoueError):
    pass


class BranchUndefined(InoueError):
    pass


class StepUnderflow(InoueError):
    pass


class EmptyInput(InoueError):
    pass


class DomainError(InoueError, ValueError):
    pass


class ZeroInput(InoueError, ValueError):
    pass
