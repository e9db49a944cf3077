class NumericError(ArithmeticError):
    """Raised when an iterate or intermediate quantity stops being finite,
    or a matrix that must be inverted is numerically singular."""
