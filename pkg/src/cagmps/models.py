"""Spinless-fermion chain Hamiltonians in label-string form.

The t-V chain on L sites with open ends,

    H = -t sum_i (c^+_i c_{i+1} + c^+_{i+1} c_i)
        + V sum_i (n_i - 1/2)(n_{i+1} - 1/2),

translates per bond into three Grassmann kernel strings: the hopping
pair (-i t/2) X_i Y_{i+1} + (i t/2) Y_i X_{i+1} and the interaction
(V/4) Z_i Z_{i+1} (n - 1/2 = -Z/2 in kernel form).  Zero-coefficient
strings are dropped, so the tight-binding chain has 2(L-1) terms and the
interacting chain 3(L-1).
"""

from __future__ import annotations

import dataclasses

from .pauli import Hamiltonian, PauliString

__all__ = ["ModelSpec", "build_tv", "build_tight_binding"]


@dataclasses.dataclass(frozen=True)
class ModelSpec:
    """Chain model parameters."""

    name: str
    n_sites: int
    t: float = 1.0
    V: float = 0.0

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError("chain needs at least two sites")
        if self.name not in ("tv", "tight-binding"):
            raise ValueError(f"unknown model {self.name!r}")

    def build(self) -> Hamiltonian:
        V = self.V if self.name == "tv" else 0.0
        return build_tv(self.n_sites, self.t, V)


def _bond_string(n: int, i: int, a: str, b: str) -> str:
    labels = ["I"] * n
    labels[i] = a
    labels[i + 1] = b
    return "".join(labels)


def build_tv(n_sites: int, t: float, V: float) -> Hamiltonian:
    """Open t-V chain as a kernel-string Hamiltonian."""
    terms = []
    for i in range(n_sites - 1):
        if t != 0.0:
            terms.append(PauliString(-0.5j * t, _bond_string(n_sites, i, "X", "Y")))
            terms.append(PauliString(+0.5j * t, _bond_string(n_sites, i, "Y", "X")))
        if V != 0.0:
            terms.append(PauliString(0.25 * V, _bond_string(n_sites, i, "Z", "Z")))
    return Hamiltonian(n_sites, terms)


def build_tight_binding(n_sites: int, t: float = 1.0) -> Hamiltonian:
    return build_tv(n_sites, t, 0.0)
