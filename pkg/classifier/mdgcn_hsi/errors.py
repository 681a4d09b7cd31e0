"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from .constants import EXIT_INTERNAL, EXIT_NUMERIC, EXIT_USAGE


class MdgcnError(Exception):
    exit_code = EXIT_INTERNAL


# ── Input / usage errors (exit 2) ────────────────────────────────────


class InputError(MdgcnError, ValueError):
    exit_code = EXIT_USAGE


class FormatError(InputError):
    """Bad magic or malformed text record."""


class LengthError(InputError):
    """Payload shorter or longer than its header declares."""


class DataError(InputError):
    """Non-finite value in a cube."""


class ShapeError(InputError):
    """Dimensions of two companion artifacts disagree."""


class ParameterError(InputError):
    pass


class SamplingError(InputError):
    pass


class ConfigError(InputError):
    pass


class CheckpointError(InputError):
    """Checkpoint does not fit the cube / labels it is applied to."""


class PaletteError(InputError):
    pass


class EvaluationError(InputError):
    pass


class TrainingSetupError(InputError):
    pass


class ContractError(InputError):
    """A dimension or symmetry precondition of a numeric operation failed."""


# ── Numeric failures (exit 3) ────────────────────────────────────────


class NumericError(MdgcnError, ArithmeticError):
    exit_code = EXIT_NUMERIC


class DivergenceError(NumericError):
    pass


# ── Internal ──────────────────────────────────────────────────────────


class InvariantError(MdgcnError, RuntimeError):
    exit_code = EXIT_INTERNAL
