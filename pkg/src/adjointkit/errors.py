"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A computation failed numerically (singular system, non-convergence).

    Input validation problems raise ``ValueError`` instead; this class is
    reserved for failures that can only be detected while computing.
    """
