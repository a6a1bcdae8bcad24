"""Compressed speech over multicast with three-level chaotic encryption.

Levels: bit permutation inside 512-byte groups, byte permutation across a
16384-byte frame, and a multi-round chaotic stream cipher.  Frames are
independent, so a lost frame costs one block of audio and nothing more.
"""
from .errors import CipherFault, ChaospeechError, FormatError, InvalidKey, TransportError
from .keys import KeyBundle, keygen, load_key, save_key
from .pipeline import decrypt_file, encrypt_file

__version__ = "0.1.0"

__all__ = [
    "ChaospeechError", "CipherFault", "FormatError", "InvalidKey", "KeyBundle",
    "TransportError", "decrypt_file", "encrypt_file", "keygen", "load_key", "save_key",
]
