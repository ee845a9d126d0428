"""Package-wide exception types."""


class TasteVecError(Exception):
    """Base class for tastevec errors."""


class DataError(TasteVecError):
    """Malformed or inconsistent input data / artifact files."""


class TrainingDivergedError(TasteVecError):
    """Training produced a non-finite loss or gradient.

    Carries a human-readable location (step / epoch / batch) so the failure
    can be pinned down in logs.
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step
