"""Exception hierarchy shared by the library and the command line tool."""


class RFCodeError(Exception):
    """Base class for every error raised by :mod:`rfcode`."""


class ZeroInverse(RFCodeError, ZeroDivisionError):
    """Raised when inverting the zero element of a field."""


class ConfigInvalid(RFCodeError, ValueError):
    pass


class RankDeficient(RFCodeError):
    """The linear system does not have full column rank."""

    def __init__(self, rank, missing=()):
        self.rank = rank
        self.missing = tuple(missing)
        msg = f"matrix is rank deficient (rank {rank})"
        if self.missing:
            msg += f"; unresolved rows {list(self.missing)[:16]}"
        super().__init__(msg)


class InconsistentSystem(RFCodeError):
    """Right-hand side is outside the column span (corrupted symbols)."""


class MalformedSymbol(RFCodeError, ValueError):
    pass


class MissingFootprintSymbol(RFCodeError, KeyError):
    def __init__(self, missing):
        self.missing = tuple(sorted(missing))
        super().__init__(f"symbols required for repair are absent: {list(self.missing)}")

    def __str__(self):
        return self.args[0]


class NoLocalGroup(RFCodeError):
    """No covering parity has its whole footprint available."""


class HeaderMismatch(RFCodeError):
    pass


class CorruptShard(RFCodeError):
    pass
