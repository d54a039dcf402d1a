"""Exception hierarchy shared by all modules."""


class MonogamyError(Exception):
    """Base class for every error raised by this package."""


class ZeroState(MonogamyError, ValueError):
    pass


class BadLength(MonogamyError, ValueError):
    pass


class BadIndexSet(MonogamyError, ValueError):
    pass


class BadIndex(MonogamyError, ValueError):
    pass


class NotHermitian(MonogamyError, ValueError):
    pass


class NotDensity(MonogamyError, ValueError):
    pass


class RankTooHigh(MonogamyError, ValueError):
    pass


class IdenticallyZero(MonogamyError):
    """The tangle polynomial vanishes on the whole range of the operator."""


class NotOneRoot(MonogamyError, ValueError):
    pass


class Singular(MonogamyError):
    pass


class ParseError(MonogamyError, ValueError):
    pass


class NotFound(MonogamyError):
    pass


class NoConvergence(MonogamyError):
    pass
