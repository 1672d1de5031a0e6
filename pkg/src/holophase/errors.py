"""Exception hierarchy.

Every error carries a short upper-case ``code`` used in CSV cells
(``ERROR:<code>``) and in the CLI's diagnostics.
"""


class HolophaseError(Exception):
    code = "HOLOPHASE"


class NotHermitian(HolophaseError, ValueError):
    code = "NOT_HERMITIAN"


class NotAntiHermitian(HolophaseError, ValueError):
    code = "NOT_ANTI_HERMITIAN"


class NotPSD(HolophaseError, ValueError):
    code = "NOT_PSD"


class RankDeficient(HolophaseError, ValueError):
    code = "RANK_DEFICIENT"


class NoConvergence(HolophaseError, RuntimeError):
    code = "NO_CONVERGENCE"


class GapClosure(HolophaseError, ValueError):
    code = "GAP_CLOSURE"


class GapClosureOnPath(GapClosure):
    code = "GAP_CLOSURE_ON_PATH"


class GaugePole(HolophaseError, ValueError):
    code = "GAUGE_POLE"


class GaugeDiscontinuity(HolophaseError, ValueError):
    code = "GAUGE_DISCONTINUITY"


class NonpositiveTemperature(HolophaseError, ValueError):
    code = "NONPOSITIVE_TEMPERATURE"


class OpenPath(HolophaseError, ValueError):
    code = "OPEN_PATH"


class TooFewSegments(HolophaseError, ValueError):
    code = "TOO_FEW_SEGMENTS"


class NoBracket(HolophaseError, ValueError):
    code = "NO_BRACKET"


class EmptyDome(HolophaseError, ValueError):
    code = "EMPTY_DOME"


class NotClosed(HolophaseError, ValueError):
    code = "NOT_CLOSED"


class StepTooLarge(HolophaseError, ValueError):
    code = "STEP_TOO_LARGE"


class InvalidConfig(HolophaseError, ValueError):
    """Bad user input (ranges, grid sizes, options); the CLI maps it to exit 2."""

    code = "INVALID_CONFIG"
