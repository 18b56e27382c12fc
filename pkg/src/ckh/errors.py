"""Exception types shared across modules."""


class CKHError(Exception):
    """Base class; ``code`` is used for machine-readable CLI output."""

    code = "error"


class ParseError(CKHError):
    code = "parse_error"


class NotAUnit(CKHError):
    code = "not_a_unit"


class WeightMismatch(CKHError):
    code = "weight_mismatch"


class NotAntidominant(CKHError):
    code = "not_antidominant"


class IllegalDiagram(CKHError):
    code = "illegal_diagram"


class BoundaryMismatch(CKHError):
    code = "boundary_mismatch"


class NotDisjoint(CKHError):
    code = "not_disjoint"


class NonTerminating(CKHError):
    code = "non_terminating"


class NonUnitMatrix(CKHError):
    code = "non_unit_matrix"


class IncompatibleCochain(CKHError):
    code = "incompatible_cochain"


class DegreeDataMissing(CKHError):
    code = "degree_data_missing"


class NoCircle(CKHError):
    code = "no_circle"


class WidthError(CKHError):
    code = "width_error"


class OrientationError(CKHError):
    code = "orientation_error"


class NotClosed(CKHError):
    code = "not_closed"


class UnknownCircle(CKHError):
    code = "unknown_circle"


class CocycleFailure(CKHError):
    code = "cocycle_failure"


class NoSolution(CKHError):
    code = "no_solution"


class RuleTableError(CKHError):
    code = "rule_table_error"
