"""Exception types raised across the package."""


class GraphSpaceError(ValueError):
    """Base class for all domain errors."""


class InvalidEdge(GraphSpaceError):
    pass


class InvalidIndex(GraphSpaceError):
    pass


class InvalidBase(GraphSpaceError):
    pass


class ResourceLimit(GraphSpaceError):
    """Request would enumerate or allocate beyond the configured guard."""


class NoPreimage(GraphSpaceError):
    pass


class NonDyadic(GraphSpaceError):
    """An exact dyadic value was required but the input has an infinite expansion."""


class UnsupportedExactRadius(GraphSpaceError):
    pass


class UndefinedStatistic(GraphSpaceError):
    """A graph statistic is undefined on the given (possibly truncated) graph."""


class DivergentExpectation(GraphSpaceError):
    pass


class EstimatorFailure(GraphSpaceError):
    pass


class InvalidFunction(GraphSpaceError):
    pass
