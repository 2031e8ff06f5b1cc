"""Grassmann matrix product states with Clifford disentangling.

Tensor-network ground-state searches for spinless fermion chains.  The
layers, bottom up: ``grassmann`` (signed tensor calculus over composite
indices), ``pauli`` (operator strings as Grassmann kernels), ``models``
(t-V chains), ``clifford`` (the two-site gate group and its reduction to
twelve disentangling candidates), ``mps``/``dmrg`` (the variational
engine), ``ed`` (exact references), ``cli`` (benchmark front end).
"""

from . import clifford, dmrg, ed, grassmann, models, mps, pauli, store
from .dmrg import DMRGResult, SweepConfig, run_dmrg
from .grassmann import GrassmannTensor, Leg, contract, gsvd
from .mps import GMPS
from .pauli import Hamiltonian, PauliString

__version__ = "0.1.0"

__all__ = [
    "GMPS",
    "DMRGResult",
    "GrassmannTensor",
    "Hamiltonian",
    "Leg",
    "PauliString",
    "SweepConfig",
    "clifford",
    "contract",
    "dmrg",
    "ed",
    "grassmann",
    "gsvd",
    "models",
    "mps",
    "pauli",
    "run_dmrg",
    "store",
]
