"""Exception types shared across the package."""


class SpectralError(Exception):
    """Base class for all domain and numeric failures raised by qgmaryland."""


class DirichletPointError(SpectralError):
    """z is (numerically) on the Dirichlet spectrum: s(1;z) ~ 0, so 1/s(1;z) is meaningless."""


class InsideSpectrumError(SpectralError):
    """A Green-function argument hit the spectrum of the free lattice Laplacian."""


class GapViolationError(SpectralError):
    """lambda is not inside a spectral gap of the Hill operator (|eta(lambda)| <= 2)."""


class BranchViolationError(SpectralError):
    """The Cayley-symbol logarithm left its analyticity region (strip assumption failed)."""


class ArithmeticClashError(SpectralError):
    """Frequency/phase arithmetic produced coinciding targets (rational resonance)."""


class OutOfRangeError(SpectralError):
    """A computation overflowed or could not meet the requested accuracy."""
