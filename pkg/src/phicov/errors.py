"""Exception hierarchy shared by all phicov modules."""


class PhicovError(Exception):
    """Base class for every error raised by phicov."""


class ParseError(PhicovError, ValueError):
    """Malformed family descriptor or command argument."""


class DomainError(PhicovError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConstraintError(DomainError):
    """Constraint that violates its own invariants (bad parts, capacities...)."""


class SchemaError(PhicovError, ValueError):
    """Instance file that does not follow the JSON schema.

    ``path`` is a JSON-pointer-like location such as ``$.constraint.k``.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class ResourceLimitError(PhicovError, RuntimeError):
    """A computation would exceed its configured work cap."""


class InfeasibleError(PhicovError, RuntimeError):
    """The linear program has no feasible point."""


class GadgetError(PhicovError, RuntimeError):
    """Partitioning-system sampling failed to verify within the attempt budget."""

    def __init__(self, message, worst_deviation=None):
        self.worst_deviation = worst_deviation
        super().__init__(message)
