"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class SpectralMIError(Exception):
    """Base class for all errors raised by spectral_mi."""


class ContractError(SpectralMIError, ValueError):
    """Inputs violate an operation's preconditions (CLI exit code 2)."""


class InsufficientDataError(ContractError):
    """Not enough samples to form a single analysis window."""


class ExcludedPairError(ContractError):
    """Within-process request for the same frequency on both sides."""


class DomainError(SpectralMIError, ValueError):
    """Argument outside a function's mathematical domain."""


class UnsupportedModelError(SpectralMIError, ValueError):
    """No closed-form oracle exists for the requested model."""


class ParseError(SpectralMIError, ValueError):
    """Malformed input file (CLI exit code 3).

    ``row`` is the 1-based line number of the offending record, if known.
    """

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class FormatError(ParseError):
    """Structurally inconsistent file, e.g. ragged or missing columns."""
