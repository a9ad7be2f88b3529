"""Exception types shared across the package."""


class GateSimpError(Exception):
    """Base class for all package errors."""


class GraphParseError(GateSimpError, ValueError):
    def __init__(self, line_no, line, reason="expected exactly two tokens"):
        self.line_no = line_no
        self.line = line
        super().__init__(f"line {line_no}: {reason}: {line!r}")


class ResourceGuardError(GateSimpError, MemoryError):
    """Raised when a computation would exceed a configured size guard or search budget."""

    def __init__(self, guard, message):
        self.guard = guard
        super().__init__(f"{guard}: {message}")


class InfeasibleCoverError(GateSimpError, ValueError):
    def __init__(self, uncovered, total):
        self.uncovered = list(uncovered)[:10]
        self.total = total
        shown = ", ".join(f"({a},{b})" for a, b in self.uncovered)
        super().__init__(f"{total} ground pair(s) cannot be covered by any candidate set, e.g. {shown}")
