class StconsError(ValueError):
    """Base class for data and validation errors raised by the toolkit."""


class CorpusError(StconsError):
    pass


class LexiconError(StconsError):
    pass


class MetricError(StconsError):
    """A metric was asked for on input where it is undefined or not computable."""


class RescoreError(StconsError):
    pass


class TargetError(StconsError):
    pass
