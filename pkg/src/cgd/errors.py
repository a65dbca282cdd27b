"""Exception hierarchy shared by every module of the package."""


class CGDError(Exception):
    """Base class for all errors raised by :mod:`cgd`."""


class DisconnectedGraph(CGDError):
    pass


class PortConflict(CGDError):
    pass


class SignatureMismatch(CGDError):
    pass


class NoSuchVertex(CGDError):
    pass


class InconsistentUnion(CGDError):
    pass


class MissingDiskEntry(CGDError):
    def __init__(self, disk, message=None):
        self.disk = disk
        super().__init__(message or "no table entry for the observed disk")


class BudgetExceeded(CGDError):
    pass


class UnknownBuiltin(CGDError):
    pass


class ParseError(CGDError):
    def __init__(self, position, expected, text=None):
        self.position = position
        self.expected = expected
        msg = f"parse error at {position}: expected {expected}"
        if text is not None:
            msg += f" in {text!r}"
        super().__init__(msg)


class SemanticError(CGDError):
    def __init__(self, position, message):
        self.position = position
        super().__init__(f"semantic error at {position}: {message}")


class MalformedRing(CGDError):
    pass


class MalformedEncoding(CGDError):
    pass


class InvalidRule(CGDError):
    pass


class NotDone(CGDError):
    pass
