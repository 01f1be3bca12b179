"""residua: a structure-preserving partial evaluator for MiniF77 programs."""

__version__ = "0.1.0"
