"""Exception hierarchy shared by every module of the package."""


class PhotonAddError(Exception):
    """Base class for all errors raised by photonadd."""


class CutoffMismatch(PhotonAddError, ValueError):
    """Two operands were built on different Fock truncations."""


class ZeroNorm(PhotonAddError):
    """An operator annihilated the state (squared norm below 1e-24)."""

    step = None


class TruncationOverflow(PhotonAddError):
    """Probability leaked onto the highest retained Fock level beyond ``tail_tol``."""

    step = None


class ZeroClickProbability(PhotonAddError):
    """The herald detector never fires for the requested configuration."""


class InvalidCount(PhotonAddError, ValueError):
    """A sample count was not a positive integer."""
