"""Exception types shared across the package.

The CLI maps these onto exit codes: parse and validation failures are data
errors (exit 2), solver failures are numerical errors (exit 3).
"""


class MeshError(Exception):
    """Base class for mesh-related failures."""


class MeshParseError(MeshError):
    """A mesh file could not be parsed.

    Carries the offending path and, when known, the 1-based line number
    (text formats) or byte offset (binary formats).
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}: "
            if line is not None:
                prefix = f"{path}:{line}: "
        super().__init__(prefix + message)


class MeshValidationError(MeshError):
    """A parsed mesh violates a structural requirement.

    ``element`` names the offending face or edge where one can be singled out.
    """

    def __init__(self, message, element=None):
        self.element = element
        super().__init__(message)


class EigensolverError(RuntimeError):
    """The iterative eigensolver did not reach the requested tolerance."""

    def __init__(self, message, worst_residual=None):
        self.worst_residual = worst_residual
        super().__init__(message)
