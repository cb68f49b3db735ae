"""Exception hierarchy.

Two roots so the CLI can map failures to exit codes: ``InputError`` for bad
arguments or data (exit 2) and ``NumericalError`` for computations that
cannot produce a finite answer (exit 3).
"""


class WaveHurstError(Exception):
    pass


class InputError(WaveHurstError, ValueError):
    pass


class NumericalError(WaveHurstError, ArithmeticError):
    pass


class UnsupportedFilter(InputError):
    pass


class InvalidShape(InputError):
    pass


class InvalidLevelRange(InputError):
    pass


class InvalidHurst(InputError):
    pass


class AlreadyCorrected(InputError):
    pass


class InsufficientLevels(InputError):
    pass


class DegeneratePair(InputError):
    pass


class InsufficientGroups(InputError):
    pass


class InsufficientExtent(InputError):
    pass


class EmbeddingFailure(NumericalError):
    pass


class DegenerateLevel(NumericalError):
    """A level has zero mean energy, so its log-energy is undefined."""
