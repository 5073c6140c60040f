"""Exception taxonomy shared by the whole package.

The CLI maps these onto exit codes: InputError -> 1, DomainError and its
subclasses -> 2, InsufficientDataError -> 3.
"""


class LcgfError(Exception):
    pass


class InputError(LcgfError, ValueError):
    """Bad arguments: wrong dimension, duplicate points, unknown names."""


class CapacityError(InputError):
    """A configured size cap (matrix order, lattice volume) was exceeded."""


class DomainError(LcgfError, ValueError):
    """Mathematically invalid parameter regime (empty annulus, p > 1, ...)."""


class NotPDError(DomainError):
    """Cholesky failed: matrix is not positive definite.

    Carries the index of the failing pivot and its value (None when the
    factorization died before a pivot value was available).
    """

    def __init__(self, pivot_index, pivot=None):
        self.pivot_index = pivot_index
        self.pivot = pivot
        msg = f"matrix not positive definite at pivot {pivot_index}"
        if pivot is not None:
            msg += f" (pivot value {pivot:.3e})"
        super().__init__(msg)


class NegativeCorrectionVariance(DomainError):
    """The variance-matching correction came out negative for some offset.

    Signals that the microscopic box size is too large relative to the
    coarse box size for the chosen reference field.
    """

    def __init__(self, offset, value):
        self.offset = tuple(offset)
        self.value = float(value)
        super().__init__(
            f"correction variance {value:.6g} < 0 at in-box offset {self.offset}"
        )


class StateError(LcgfError, RuntimeError):
    """Operation needs state (e.g. retained level increments) that is absent."""


class InsufficientDataError(LcgfError):
    """Not enough usable data points for a fit."""
