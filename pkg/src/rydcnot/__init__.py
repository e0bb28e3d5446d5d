"""Two-atom Rydberg-blockade CNOT simulator and analysis toolkit."""

from ._kernel import BACKEND
from .qcore import AtomLevel, ReadoutMode, TwoAtomState, computational_state

__version__ = "0.1.0"


def compiled_core_active() -> bool:
    """True when the compiled propagation kernel is in use."""
    return BACKEND == "cython"


__all__ = [
    "AtomLevel",
    "ReadoutMode",
    "TwoAtomState",
    "computational_state",
    "compiled_core_active",
    "BACKEND",
    "__version__",
]
