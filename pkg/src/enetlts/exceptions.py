"""Exception types raised by the enet-LTS toolkit."""


class EnetLTSError(Exception):
    """Base class for all package errors."""


class ZeroSpreadColumn(EnetLTSError, ValueError):
    """A predictor column has zero spread (MAD or standard deviation)."""

    def __init__(self, column, name=None):
        self.column = column
        self.name = name
        label = f"{column}" if name is None else f"{column} ({name!r})"
        super().__init__(f"column {label} has zero spread; drop it before fitting")


class NoConvergence(EnetLTSError, RuntimeError):
    """An iterative solver hit its iteration cap."""


class DegenerateWeights(EnetLTSError, RuntimeError):
    """All IRLS weights vanished (complete separation without ridge penalty)."""


class DegenerateDraw(EnetLTSError, RuntimeError):
    """Elemental subsets kept producing degenerate fits."""


class InfeasibleSplit(EnetLTSError, ValueError):
    """Class-balanced subset sizes exceed the available class counts."""


class FoldDegenerate(EnetLTSError, RuntimeError):
    """A cross-validation training fold lost one of the classes."""


class AllZeroWeights(EnetLTSError, RuntimeError):
    """Every observation was flagged as an outlier."""


class DegenerateSample(EnetLTSError, RuntimeError):
    """A simulated binary response contains a single class."""
