"""Exception types raised across the package."""


class TsBenchError(Exception):
    """Base class for all package errors."""


class ParseError(TsBenchError, ValueError):
    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


class LengthMismatch(TsBenchError, ValueError):
    pass


class IncompatibleStrategy(TsBenchError, ValueError):
    """A centroid strategy was paired with a distance it cannot average under."""


class EmptyClusterRepairFailed(TsBenchError, RuntimeError):
    pass


class MissingMethod(TsBenchError, KeyError):
    def __init__(self, methods):
        self.methods = sorted(methods)
        super().__init__(f"store lacks methods: {', '.join(self.methods)}")
