"""Exception hierarchy shared across the package."""


class PipeNavError(Exception):
    """Base class for all package-specific errors."""


class SchemaError(PipeNavError):
    """A document does not match the expected structure (bad/unknown/missing keys)."""


class InvariantError(PipeNavError):
    """A value violates a documented invariant. Messages name the offending field."""


class OutOfRoute(PipeNavError):
    """An arc-length coordinate lies outside [0, route_length]."""


class GeometryError(PipeNavError):
    """Arm geometry cannot reach the requested pipe wall."""


class NonFinite(PipeNavError):
    """A computation produced NaN or infinity."""


class NotStabilizable(PipeNavError):
    """The Riccati iteration failed to converge for the given plant."""


class NotNormalized(PipeNavError):
    """A particle set was used where normalized weights are required."""


class DegenerateWeights(PipeNavError):
    """All particle weights vanished during a measurement update."""


class DegeneratePosterior(PipeNavError):
    """A grid posterior lost all probability mass."""


class SimulationDiverged(PipeNavError):
    """The simulated state stopped being finite; carries the failing tick."""

    def __init__(self, message: str, tick: int | None = None):
        super().__init__(message)
        self.tick = tick
