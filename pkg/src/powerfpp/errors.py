"""Exception types shared across the package."""


class PowerFppError(Exception):
    """Base class for all package errors."""


class GraphError(PowerFppError):
    """Invalid graph description or unsupported graph operation."""


class LoopEdgeError(GraphError):
    """An edge with identical endpoints was supplied (graphs are loopless)."""


class NonpositiveIntensityError(GraphError):
    """An edge intensity was zero, negative, or non-finite."""


class UnknownVertexError(GraphError):
    """An edge endpoint or query vertex is not in the graph."""


class OracleGraphUnsupportedError(GraphError):
    """Operation requires a finite graph but got an oracle-backed one."""


class TooLargeError(GraphError):
    """Graph exceeds the size limit of a brute-force operation."""


class NumericalError(PowerFppError):
    """Base class for certified-numerics failures."""


class TolUnreachableError(NumericalError):
    """The requested tolerance needs a series order beyond the configured cap."""


class UnreachableError(PowerFppError):
    """No path between the requested vertices (infinite critical time)."""


class NoMarginError(NumericalError):
    """No tilt exponent in the scanned grid certifies a sum below one."""


class FrontierExhaustedError(NumericalError):
    """Shortest-path search hit its node-expansion budget."""


class InvalidDistributionError(PowerFppError):
    """Weight-distribution parameters are malformed."""


class IoFailureError(PowerFppError):
    """Report could not be written."""
