"""Exception types shared across the package."""


class WteError(Exception):
    """Base class for all package errors."""


class DataError(WteError):
    """Problems with input data files or dataset invariants."""


class EmptyFile(DataError):
    pass


class MissingColumn(DataError):
    def __init__(self, name):
        super().__init__(f"column {name!r} not found in header")
        self.name = name


class NonNumericCell(DataError):
    def __init__(self, row, col):
        super().__init__(f"non-numeric cell at data row {row}, column {col!r}")
        self.row = row
        self.col = col


class NaNValue(DataError):
    def __init__(self, row, col):
        super().__init__(f"NaN or infinite value at data row {row}, column {col!r}")
        self.row = row
        self.col = col


class NonBinaryTreatment(DataError):
    def __init__(self, row):
        super().__init__(f"treatment value at data row {row} is not 0 or 1")
        self.row = row


class BothArmsRequired(DataError):
    pass


class EstimationError(WteError):
    """Problems raised while estimating."""


class AlphaOutOfRange(EstimationError):
    def __init__(self, alpha):
        super().__init__(f"alpha must lie in (0, 1], got {alpha}")
        self.alpha = alpha


class EmptyInput(EstimationError):
    pass


class KOutOfRange(EstimationError):
    pass


class FoldTooSmall(EstimationError):
    pass


class InsufficientArmSamples(EstimationError):
    pass


class SingleArmInput(EstimationError):
    pass


class SingularDesign(EstimationError):
    pass


class NonConvergence(EstimationError):
    pass


class LevelOutOfRange(EstimationError):
    pass


class InvalidSpec(EstimationError):
    pass
