"""Exception types shared across the package."""


class LtlSwarmError(Exception):
    """Base class for all errors raised by this package."""


class FormulaSyntaxError(LtlSwarmError):
    """Malformed formula text; carries the character position of the fault."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownAtomError(LtlSwarmError):
    """Formula references an atom that is not in the declared alphabet."""


class NormalFormError(LtlSwarmError):
    """Operation requires negation normal form and the input is not in it."""


class CosafetyError(LtlSwarmError):
    """Operation requires a syntactically co-safe formula."""


class StateLimitError(LtlSwarmError):
    """Automaton construction exceeded the configured state cap."""


class SynthesisError(LtlSwarmError):
    """No satisfying discrete plan exists for a mission."""


class ScenarioValidationError(LtlSwarmError):
    """Scenario violates a structural precondition."""


class InvariantViolationError(LtlSwarmError):
    """A run-time invariant that the theory guarantees was observed broken."""


class EdgeLossError(InvariantViolationError):
    """An existing connectivity edge stretched beyond the sensing radius."""

    def __init__(self, time: float, pair: tuple, distance: float):
        super().__init__(
            f"edge {pair} lost at t={time:.6f}: distance {distance:.6f} exceeds sensing radius"
        )
        self.time = time
        self.pair = pair
        self.distance = distance


class PotentialDomainError(LtlSwarmError, ValueError):
    """Pairwise distance at or beyond the sensing radius: potential undefined."""
