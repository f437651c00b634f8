"""Exception hierarchy.

Two families matter to the CLI: :class:`ValidationError` (bad input files,
arguments or configuration; exit code 1) and :class:`DataError` (inputs are
well-formed but cannot support the requested computation; exit code 2).
"""


class MintEvalError(Exception):
    pass


class ValidationError(MintEvalError, ValueError):
    pass


class DataError(MintEvalError, ValueError):
    pass


class MalformedRow(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class UnknownMetric(ValidationError):
    def __init__(self, metric, line=None):
        self.metric = metric
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}unknown metric {metric!r}")


class DuplicateKey(ValidationError):
    def __init__(self, key, line=None):
        self.key = key
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}duplicate key {key!r}")


class InvalidArgument(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class LeakageError(ValidationError):
    pass


class EmptyReference(ValidationError):
    pass


class EmptyCorpus(ValidationError):
    pass


class EmptyPool(ValidationError):
    pass


class EmptyReport(ValidationError):
    pass


class DimensionMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class InsufficientOverlap(DataError):
    pass


class TooFewRows(DataError):
    pass


class TooFewSegments(DataError):
    pass


class NonFiniteInput(DataError):
    pass


class MissingScores(DataError):
    def __init__(self, missing, message="missing scores"):
        self.missing = list(missing)
        shown = ", ".join(map(str, self.missing[:10]))
        more = f" (+{len(self.missing) - 10} more)" if len(self.missing) > 10 else ""
        super().__init__(f"{message}: {shown}{more}")


class MissingHuman(MissingScores):
    def __init__(self, missing):
        super().__init__(missing, "missing human scores")


class MissingCell(DataError):
    pass


class EmptySet(DataError):
    pass


class NoValidSources(DataError):
    pass
