"""Security analysis: Lyapunov spectrum, NIST subset, NPCR/UACI, sensitivity, key space."""
from .differential import Histogram, DiffReport, average_npcr_uaci, histogram, npcr_uaci
from .keyspace import KeySpace, key_space
from .lyapunov import LyapunovResult, lyapunov_spectrum, sweep
from .randomness import battery, stat_tests
from .sensitivity import SensitivityMatrix, sensitivity_scan

__all__ = [
    "DiffReport", "Histogram", "KeySpace", "LyapunovResult", "SensitivityMatrix",
    "average_npcr_uaci", "battery", "histogram", "key_space", "lyapunov_spectrum",
    "npcr_uaci", "sensitivity_scan", "stat_tests", "sweep",
]
