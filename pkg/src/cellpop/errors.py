"""Exception types raised across the package."""


class CellPopError(Exception):
    pass


class DegenerateCell(CellPopError, ValueError):
    """A cell carries no energy (E_r + S <= 0) and cannot be controlled."""


class InvalidObjective(CellPopError, ValueError):
    pass


class NoEmission(CellPopError, ValueError):
    """Asked to plan an emission for a non-positive source."""


class InvalidWeight(CellPopError, ValueError):
    pass


class BudgetTooSmall(CellPopError, ValueError):
    pass


class DegenerateDomain(CellPopError, ValueError):
    pass


class NonPhysicalTemperature(CellPopError, ArithmeticError):
    pass


class TrackingOverflow(CellPopError, RuntimeError):
    pass


class InsufficientRuns(CellPopError, ValueError):
    pass


class DegenerateReference(CellPopError, ValueError):
    pass


class InfiniteFom(CellPopError, ArithmeticError):
    """RE^2 is exactly zero; the figure of merit is unbounded."""
