"""Exception hierarchy.  The CLI maps each class to its own exit code."""


class ChaospeechError(Exception):
    exit_code = 1


class InvalidKey(ChaospeechError, ValueError):
    exit_code = 3


class FormatError(ChaospeechError, ValueError):
    """Malformed WAV, container or packet data."""

    exit_code = 4


class TransportError(ChaospeechError):
    exit_code = 5


class CipherFault(ChaospeechError, ArithmeticError):
    """Chaotic state left the finite int64-convertible range."""

    exit_code = 6
