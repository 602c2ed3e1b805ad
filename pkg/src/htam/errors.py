"""Exception hierarchy shared across the package."""


class HtamError(Exception):
    """Base class for all package errors."""


# graph core
class GraphError(HtamError):
    pass


class CyclicGraph(GraphError):
    pass


class MissingNode(GraphError):
    pass


class InvalidMerge(GraphError):
    pass


class NonMonotoneMerge(InvalidMerge):
    pass


class NegativeBase(GraphError, ValueError):
    pass


# planning
class PlanningError(HtamError):
    pass


class NoListFound(PlanningError):
    pass


class UnparseableSelection(PlanningError):
    pass


class EmptySelection(PlanningError):
    pass


class PlanningFailed(PlanningError):
    pass


# metrics
class MetricError(HtamError):
    pass


class EmptyKeySet(MetricError, ValueError):
    pass


class BothEmpty(MetricError, ValueError):
    pass


class JudgeProtocolError(MetricError):
    pass


# benchmark generation
class BenchgenError(HtamError):
    pass


class InvalidTemplate(BenchgenError):
    pass


class ParameterizationMismatch(BenchgenError):
    pass


class EmptyQuestion(BenchgenError):
    pass


# backends
class BackendError(HtamError):
    pass


class TransportError(BackendError):
    pass


class ProtocolError(BackendError):
    pass


class RateLimited(TransportError):
    pass


class ProviderFailure(BackendError):
    pass


# harness
class ConfigError(HtamError):
    pass


class IoFailure(HtamError, OSError):
    pass


class InconsistentReport(HtamError, ValueError):
    """Stored aggregates disagree with the per-task rows they summarize."""
