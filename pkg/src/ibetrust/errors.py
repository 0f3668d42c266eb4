"""Shared exception types."""


class Reject(Exception):
    """A message or request was refused for a protocol reason.

    Carried everywhere a verifier can turn a message away: ciphertext
    decryption, MAC checks, trust database lookups, nonce bookkeeping.
    The reason string is stable and machine-readable so logs and tests
    can match on it.
    """

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


class AccessViolation(Exception):
    """Secure-region access attempted from the normal world."""


class ConfigError(ValueError):
    """Invalid scenario, parameter or chain configuration."""
