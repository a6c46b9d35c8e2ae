"""Exception types shared across the simulator."""


class FeqcError(Exception):
    """Base class for simulator errors."""


class PreconditionError(FeqcError):
    """A state does not satisfy the occupancy/shape contract of an operation."""


class CircuitError(FeqcError):
    """A circuit failed structural validation (labels, references, arms)."""


class NonGaussianOperationError(FeqcError):
    """The correlation-matrix backend was asked for an operation it cannot
    represent (parity or spin readout, entangled-pair preparation)."""
