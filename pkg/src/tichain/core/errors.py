from dataclasses import dataclass

from tichain.core.prometheus_metrics import FailureReason

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2


class TIChainError(Exception):
    """Base class for every error raised by the library."""

    exit_code: int = EXIT_USAGE
    reason: FailureReason = FailureReason.INVALID_INPUT


class InvalidStateError(TIChainError, ValueError):
    """A distribution, density matrix, loop or box violates its invariants."""

    reason = FailureReason.INVALID_INPUT


class InconsistentMarginalError(TIChainError, ValueError):
    """Left and right marginals of a window distribution differ."""

    exit_code = EXIT_NEGATIVE
    reason = FailureReason.INCONSISTENT


class NumericalError(TIChainError, ArithmeticError):
    reason = FailureReason.NUMERICAL


class CapExceededError(TIChainError):
    """A configured size cap (de Bruijn edges, ring size, DD budget) was hit."""

    reason = FailureReason.CAP_EXCEEDED


class EigensolverError(NumericalError):
    reason = FailureReason.EIGENSOLVER


class LPError(NumericalError):
    """Infeasible or unbounded program, or a failed primal certificate."""

    reason = FailureReason.LP


class BracketError(NumericalError):
    reason = FailureReason.BRACKET


class InputFormatError(TIChainError, ValueError):
    """Malformed input file or unknown identifier."""

    reason = FailureReason.INVALID_INPUT


@dataclass(frozen=True)
class ErrorMatch:
    reason: FailureReason
    exit_code: int
    log_message: str = ""


def classify_error(error: BaseException, *, command: str = "") -> ErrorMatch:
    """Map an exception raised below the CLI to an exit code and a log line."""
    prefix = f"{command}: " if command else ""
    if isinstance(error, TIChainError):
        return ErrorMatch(
            reason=error.reason,
            exit_code=error.exit_code,
            log_message=f"{prefix}{type(error).__name__}: {error}",
        )
    # pydantic ValidationError and json.JSONDecodeError are both ValueErrors
    if isinstance(error, (ValueError, KeyError, OSError)):
        return ErrorMatch(
            reason=FailureReason.INVALID_INPUT,
            exit_code=EXIT_USAGE,
            log_message=f"{prefix}invalid input: {error}",
        )
    return ErrorMatch(
        reason=FailureReason.INTERNAL,
        exit_code=EXIT_USAGE,
        log_message=f"{prefix}unexpected {type(error).__name__}: {error}",
    )
