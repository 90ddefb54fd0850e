"""Exception hierarchy shared across the package."""


class RaspagentError(Exception):
    """Base class for all errors raised by this package."""


# structures
class StructureParseError(RaspagentError):
    pass


class MalformedStructureError(StructureParseError):
    pass


class GeometryError(RaspagentError):
    pass


# force fields
class ForceFieldError(RaspagentError):
    pass


class ForceFieldFormatError(ForceFieldError):
    pass


class UnsupportedPotentialError(ForceFieldError):
    pass


class DuplicateTypeError(ForceFieldError):
    pass


class MissingTypeError(ForceFieldError):
    pass


class IncompatibleForceFieldsError(ForceFieldError):
    pass


class DanglingReferenceError(ForceFieldError):
    pass


# simulation inputs
class SimulationInputError(RaspagentError):
    pass


class SimulationInputParseError(SimulationInputError):
    pass


class StructuralError(SimulationInputError):
    pass


class UnboundPlaceholderError(SimulationInputError):
    pass


class UnknownAdsorbateError(SimulationInputError):
    pass


class PlanningError(SimulationInputError):
    pass


# agents
class ProviderError(RaspagentError):
    def __init__(self, message: str, *, retryable: bool = False, attempts: int = 1):
        super().__init__(message)
        self.retryable = retryable
        self.attempts = attempts


class ReplayDivergenceError(ProviderError):
    pass


class ToolError(RaspagentError):
    """Raised inside a tool; reported back to the model rather than aborting."""


class ConfigurationError(RaspagentError):
    pass


class LiteratureError(RaspagentError):
    def __init__(self, message: str, *, retryable: bool = False):
        super().__init__(message)
        self.retryable = retryable


class SectionNotFoundError(LiteratureError):
    pass
