"""Semantic exception hierarchy.

Every recoverable failure raised by the library derives from FairshiftError,
split into input/contract problems (ValueError flavored) and data problems
that only surface once the records are inspected.
"""


class FairshiftError(Exception):
    """Base class for all library errors."""


class DataError(FairshiftError):
    """The data violates an assumption (bad file, empty cell, degenerate sample)."""


class ContractError(FairshiftError, ValueError):
    """An argument violates the operation's contract."""


# --- ingestion ---------------------------------------------------------------

class EmptyFile(DataError):
    pass


class MissingColumn(DataError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"column {column!r} not found in header")


class NonBinaryGroupOrLabel(DataError):
    def __init__(self, row: int, column: str, value: str):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}: column {column!r} must be 0 or 1, got {value!r}")


class UnparseableNumber(DataError):
    def __init__(self, row: int, column: str, value: str):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}: column {column!r} is not a number: {value!r}")


# --- normalization / generation ----------------------------------------------

class ZeroRange(DataError):
    def __init__(self, feature: int):
        self.feature = feature
        super().__init__(f"feature {feature} is constant; min-max scaling undefined")


class InvalidSpec(ContractError):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


# --- metrics -----------------------------------------------------------------

class EmptyConditioningCell(DataError):
    def __init__(self, metric: str, group: int):
        self.metric = metric
        self.group = group
        super().__init__(f"no records in the conditioning cell for {metric}, group {group}")


class TooFewDefinedBins(DataError):
    pass


class TooShort(ContractError):
    pass


# --- classifiers / strategic -------------------------------------------------

class DimensionMismatch(ContractError):
    pass


class NonUnitNormal(ContractError):
    pass


class DegenerateLabels(DataError):
    """Only one label value present; a classifier cannot be trained."""


class NotSeparable(DataError):
    """No threshold reproduces the labels exactly."""


class NotSelective(ContractError):
    """The fair threshold does not exceed the base threshold."""


class NoCrossingFound(DataError):
    def __init__(self, target: str):
        self.target = target
        super().__init__(f"curve for {target!r} never crosses its reference constant")
