"""Exception hierarchy shared by every subsystem."""


class AdvFuzzError(Exception):
    """Base class for all package errors."""


class InvalidGeometryError(AdvFuzzError, ValueError):
    pass


class OutOfRoadError(AdvFuzzError, ValueError):
    pass


class NumericError(AdvFuzzError, ValueError):
    pass


class TreeStructureError(AdvFuzzError, ValueError):
    pass


class PlanningError(AdvFuzzError):
    """Raised when no acceptable waypoint curve could be sampled."""


class GenerationError(AdvFuzzError):
    pass


class MutationError(AdvFuzzError):
    pass


class CrossoverError(AdvFuzzError):
    pass


class EvaluationError(AdvFuzzError, ValueError):
    pass


class SetupError(AdvFuzzError, ValueError):
    """Scenario configuration rejected before simulation starts."""


class NotApplicableError(AdvFuzzError, ValueError):
    pass


class RecordFormatError(AdvFuzzError, ValueError):
    pass
