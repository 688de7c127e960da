"""Exception hierarchy; each class carries the CLI exit code it maps to."""


class KdppError(Exception):
    exit_code = 1


class DomainError(KdppError, ValueError):
    """Input outside an operation's domain (bad index, shape, non-PSD, ...)."""

    exit_code = 2


class KernelFileError(DomainError):
    exit_code = 2


class DegenerateStratumError(KdppError):
    """Z_k(L) vanishes numerically, so L is not in the k-stratum family."""

    exit_code = 3


class SingularKernelError(DomainError):
    """A positive definite kernel was required."""

    exit_code = 4


class BoundaryMLEError(KdppError):
    exit_code = 5

    def __init__(self, element, reason):
        self.element = element
        super().__init__(f"boundary MLE: element {element} {reason}")


class CapacityError(KdppError):
    exit_code = 6


class NotProjectionError(DomainError):
    exit_code = 7
