"""Reference interpreter and differential testing."""

from .difftest import Mismatch, Verdict, diff_test
from .inputs import InputVector, random_inputs
from .machine import ConcreteState, ExitKind, run
from .monitor import check_soundness

__all__ = ["Mismatch", "Verdict", "diff_test", "InputVector", "random_inputs",
           "ConcreteState", "ExitKind", "run", "check_soundness"]
