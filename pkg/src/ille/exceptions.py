"""Exception hierarchy shared by all ille modules."""


class IlleError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(IlleError, ValueError):
    """Input data violates a structural requirement (finiteness, sign, symmetry)."""


class ParameterError(IlleError, ValueError):
    """A hyperparameter is outside its admissible range."""


class ShapeError(IlleError, ValueError):
    """Array shapes are inconsistent."""


class NumericError(IlleError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy result."""


class ParseError(IlleError, ValueError):
    """A data file could not be parsed.

    ``row`` and ``col`` are 1-based locations when known.
    """

    def __init__(self, message, path=None, row=None, col=None):
        loc = ""
        if row is not None:
            loc = f" at ({row},{col})" if col is not None else f" at row {row}"
        where = f"{path}: " if path is not None else ""
        super().__init__(f"{where}{message}{loc}")
        self.path = path
        self.row = row
        self.col = col
