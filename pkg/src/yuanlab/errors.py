"""Exception hierarchy shared by every yuanlab module."""


class YuanlabError(Exception):
    """Base class for all engine errors."""


class NotPrime(YuanlabError, ValueError):
    pass


class TooLarge(YuanlabError):
    """A desk-scale resource bound would be exceeded."""


class DimensionMismatch(YuanlabError, ValueError):
    pass


class ImproperIdeal(YuanlabError, ValueError):
    pass


class NotLocal(YuanlabError):
    pass


class NotLocalBase(YuanlabError):
    pass


class NotFree(YuanlabError):
    pass


class Unsolvable(YuanlabError):
    pass


class ConstraintMismatch(YuanlabError, ValueError):
    pass


class NotTruncatedAmbient(YuanlabError):
    pass


class NotExponentOne(YuanlabError):
    pass


class NotDiffSimple(YuanlabError):
    pass


class NonSplitResidueField(YuanlabError):
    pass


class BadParameters(YuanlabError, ValueError):
    pass


class InternalDisagreement(YuanlabError, AssertionError):
    """Two independent computations of the same quantity disagree."""
