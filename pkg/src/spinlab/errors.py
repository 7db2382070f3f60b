"""Exception types raised across the package."""


class ContractError(ValueError):
    """An input violates a documented precondition (non-hermitian, non-unitary, ...)."""


class BudgetError(RuntimeError):
    """A computation would exceed its configured step or restart budget."""


class PrecisionFloorError(ArithmeticError):
    """Every sample sits below floating-point resolution, so no fit is possible."""


class SingularityError(ZeroDivisionError):
    """A closed-form expression was evaluated at its pole."""


class ProtocolError(RuntimeError):
    """A gate protocol failed its own consistency check (e.g. no barrier revival)."""


class NoRevivalWindowError(RuntimeError):
    """A revival search found no candidate duration worth refining."""
