"""Exception hierarchy shared across the toolkit.

Loaders and constructors never repair bad input: every invariant violation
raises one of these, carrying enough context to locate the offending cell,
line, or field.
"""


class StcausalError(Exception):
    """Base class for all toolkit errors."""


class InvalidConfig(StcausalError):
    """A configuration value violates its invariant.

    ``field`` names the offending entry so CLI callers can report it.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class MissingCell(StcausalError):
    """Panel grid is incomplete; reports the first missing (unit, subunit, t)."""

    def __init__(self, unit: int, subunit: int, t: int):
        self.cell = (unit, subunit, t)
        super().__init__(f"missing panel cell (unit={unit}, subunit={subunit}, t={t})")


class MalformedRow(StcausalError):
    """A CSV row failed to parse; reports the 1-based line number."""

    def __init__(self, line: int, reason: str):
        self.line = line
        super().__init__(f"line {line}: {reason}")


class NonBinaryTreatment(StcausalError):
    """A treatment value outside {0, 1}; reports the 1-based line number."""

    def __init__(self, line: int, value: str):
        self.line = line
        super().__init__(f"line {line}: treatment must be 0 or 1, got {value!r}")


class SelfLoop(StcausalError):
    """A graph edge connects a unit to itself."""

    def __init__(self, unit: int):
        self.unit = unit
        super().__init__(f"self-loop on unit {unit}")


class IndexOutOfRange(StcausalError):
    """A graph edge references a unit index outside [0, n_units)."""

    def __init__(self, index: int, n_units: int):
        self.index = index
        super().__init__(f"unit index {index} out of range for n_units={n_units}")


class ParseError(StcausalError):
    """Input file is not structurally valid (bad JSON, wrong header, ...)."""


class RankDeficient(StcausalError):
    """Design matrix has linearly dependent columns; names one of them."""

    def __init__(self, column: str):
        self.column = column
        super().__init__(f"design matrix is rank deficient: column {column!r} is "
                         f"linearly dependent on earlier columns")


class TooShortPanel(StcausalError):
    """Lagged features need at least two time steps."""


class TooFewRows(StcausalError):
    """Not enough rows to honor the minimum leaf size."""


class MissingUnitModel(StcausalError):
    """A fit does not cover every unit of the panel."""


class HorizonOutOfRange(StcausalError):
    """Requested simulation horizon exceeds the panel length (or is < 1)."""


class StateSpaceTooLarge(StcausalError):
    """Exact enumeration refused: toy model exceeds the enumerable bounds."""
