"""Runtime-error verification for ladder IL programs (one scan, SMT-backed)."""

__version__ = "0.1.0"
