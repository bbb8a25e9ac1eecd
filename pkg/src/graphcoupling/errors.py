"""Exception hierarchy shared by the library and the command line tool.

Three failure families map onto the CLI exit codes: bad parameters or
violated call contracts (exit 2), malformed input data (exit 3), and
numerical breakdown during optimization (exit 4).
"""


class GraphCouplingError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ParameterError(GraphCouplingError):
    """A parameter value or call contract was violated."""

    exit_code = 2


class ContractViolationError(ParameterError):
    """An argument failed a structural precondition (shape, symmetry, domain)."""


class DataError(GraphCouplingError):
    """Input data could not be parsed or is unusable."""

    exit_code = 3


class DegenerateRowError(DataError):
    """A data row admits no meaningful neighbor distribution."""


class NumericalError(GraphCouplingError):
    """A computation broke down numerically."""

    exit_code = 4


class DivergenceError(NumericalError):
    """Optimization produced non-finite iterates that step control could not fix."""
