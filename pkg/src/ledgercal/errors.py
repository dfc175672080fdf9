"""Exception taxonomy shared across the ledger, runtime, contracts and codecs."""


class LedgerCalError(Exception):
    """Base class; ``code`` is the stable machine-readable name."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# --- ledger ---------------------------------------------------------------

class BadSignature(LedgerCalError):
    code = "bad_signature"


class BadNonce(LedgerCalError):
    code = "bad_nonce"


class UnknownContract(LedgerCalError):
    code = "unknown_contract"


class NonMonotonicTimestamp(LedgerCalError):
    code = "non_monotonic_timestamp"


class InsufficientBalance(LedgerCalError):
    code = "insufficient_balance"


class ChainVerificationError(LedgerCalError):
    """Replay failure; carries the block height where the check failed."""

    def __init__(self, height: int, message: str = ""):
        super().__init__(message)
        self.height = height


class BrokenChain(ChainVerificationError):
    code = "broken_chain"


class StateMismatch(ChainVerificationError):
    code = "state_mismatch"


# --- contract runtime -----------------------------------------------------

class UnknownKind(LedgerCalError):
    code = "unknown_kind"


class UnknownOperation(LedgerCalError):
    code = "unknown_operation"


class AccessDenied(LedgerCalError):
    code = "access_denied"


class QuotaExceeded(LedgerCalError):
    code = "quota_exceeded"


class ReadOnlyViolation(LedgerCalError):
    code = "read_only_violation"


class ReentrancyBlocked(LedgerCalError):
    code = "reentrancy_blocked"


class InvalidArguments(LedgerCalError):
    code = "invalid_arguments"


# --- contracts ------------------------------------------------------------

class EmptyBody(LedgerCalError):
    code = "empty_body"


class InvalidRange(LedgerCalError):
    code = "invalid_range"


class NotFound(LedgerCalError):
    code = "not_found"


class InvalidWindow(LedgerCalError):
    code = "invalid_window"


class TextTooLong(LedgerCalError):
    code = "text_too_long"


#: contract-level errors a transaction may fail with while still being included
CONTRACT_ERRORS = (
    AccessDenied,
    QuotaExceeded,
    ReadOnlyViolation,
    ReentrancyBlocked,
    InvalidArguments,
    UnknownOperation,
    EmptyBody,
    InvalidRange,
    NotFound,
    InvalidWindow,
    TextTooLong,
)


# --- calendar codec -------------------------------------------------------

class OutOfRange(LedgerCalError):
    code = "out_of_range"


class InvalidCivil(LedgerCalError):
    code = "invalid_civil"


class MalformedDateTime(LedgerCalError):
    code = "malformed_datetime"


class MalformedDocument(LedgerCalError):
    code = "malformed_document"


# --- scorecard ------------------------------------------------------------

class WrongLength(LedgerCalError):
    code = "wrong_length"


class OverrideWithoutRationale(LedgerCalError):
    code = "override_without_rationale"
