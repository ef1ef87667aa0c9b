"""Exception hierarchy shared by every module."""


class SesquiError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(SesquiError, ValueError):
    """Bad input: wrong shape, mismatched contexts, out-of-domain parameter."""


class UnsupportedFlavorError(ValidationError):
    pass


class DegenerateFormError(SesquiError):
    """The form vanishes where a nonzero value is required (e.g. phi(e, e) = 0)."""


class NoEigenstateError(SesquiError):
    """Requested eigenvalue is not in the point spectrum under the rank tolerance."""


class DepthError(ValidationError):
    """Ladder index beyond the depth where the truncated model is exact."""


class CoherentUndefinedError(ValidationError):
    """Coherent forms requested outside their domain (q = -1, or |z| too large)."""


class NumericalError(SesquiError):
    """A numerical routine produced an unusable result."""
