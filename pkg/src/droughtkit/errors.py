"""Exception types shared across the toolkit."""


class DroughtkitError(Exception):
    """Base class for all toolkit errors."""


# --- ingest ---

class MissingColumn(DroughtkitError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"input CSV is missing required column {column!r}")


class MalformedRow(DroughtkitError):
    def __init__(self, row_number, reason):
        self.row_number = row_number
        self.reason = reason
        super().__init__(f"row {row_number}: {reason}")


class EmptyFile(DroughtkitError):
    pass


class NoScoreDays(DroughtkitError):
    def __init__(self, fips):
        self.fips = fips
        super().__init__(f"county {fips} has no score release days")


class AllMissingVariable(DroughtkitError):
    def __init__(self, variable, week_end):
        self.variable = variable
        self.week_end = week_end
        super().__init__(
            f"variable {variable!r} has no observed daily values in the week ending {week_end}"
        )


class UnknownFips(DroughtkitError):
    def __init__(self, fips):
        self.fips = fips
        super().__init__(f"fips {fips} not present in county metadata")


# --- windowing ---

class RaggedCounties(DroughtkitError):
    pass


class DegenerateSplit(DroughtkitError):
    pass


class EmptySplit(DroughtkitError):
    pass


# --- models ---

class EmptyTraining(DroughtkitError):
    pass


class DimensionMismatch(DroughtkitError):
    pass


class UntrainedModel(DroughtkitError):
    pass


class DivergedLoss(DroughtkitError):
    pass


# --- evaluation ---

class LengthMismatch(DroughtkitError):
    pass


class EmptyInput(DroughtkitError):
    pass


class DegenerateVariance(DroughtkitError):
    pass


# --- synth / cli ---

class InvalidSpec(DroughtkitError):
    pass


class UsageError(DroughtkitError):
    pass
