"""Structure-preserving specialization of MiniF77 programs."""

from .key import SpecializationKey, VariantCache, VariantEntry
from .policy import ReplacementPolicy
from .program import Report, SpecializationResult, specialize_program

__all__ = ["SpecializationKey", "VariantCache", "VariantEntry", "ReplacementPolicy",
           "Report", "SpecializationResult", "specialize_program"]
