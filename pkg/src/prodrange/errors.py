"""Exception hierarchy shared by all prodrange modules."""


class ProdRangeError(Exception):
    """Base class. ``module`` names the subsystem that raised it."""

    module = "prodrange"


class InputError(ProdRangeError):
    """The caller supplied a malformed or inconsistent argument."""


class NumericError(ProdRangeError):
    """A computation failed although its inputs were valid."""


class UsageError(InputError):
    """Bad command-line arguments or configuration."""

    module = "cli"


class NotHermitian(InputError):
    module = "tensor-linalg"


class NotUnitary(InputError):
    module = "tensor-linalg"


class DimensionMismatch(InputError):
    module = "tensor-linalg"


class BadFactorIndex(InputError):
    module = "tensor-linalg"


class NoConvergence(NumericError):
    module = "tensor-linalg"


class ValueOutsideRange(InputError):
    module = "numerical-range"


class DegenerateBoundary(NumericError):
    module = "numerical-range"


class AttainFailure(NumericError):
    module = "numerical-range"


class AngleOverflow(InputError):
    module = "minkowski-algebra"


class ContainsZero(InputError):
    module = "minkowski-algebra"


class NotProductDiagonal(InputError):
    module = "product-range"


class NotFound(NumericError):
    """Heuristic search gave up. Not a proof that nothing exists."""

    module = "hermitian-bounds"

    def __init__(self, msg, best_residual=None):
        super().__init__(msg)
        self.best_residual = best_residual


class EmptyMask(InputError):
    module = "geometry-raster"


class ParseError(InputError):
    module = "cli"

    def __init__(self, path, detail):
        super().__init__(f"{path}: {detail}")
        self.path = str(path)
        self.detail = detail
