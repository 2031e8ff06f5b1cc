"""Exact diagonalization reference for short chains.

Fermion operators are built as sparse Kronecker chains with explicit
parity strings (Z factors on every earlier site), fixing the occupation
basis |i_0 i_1 ...> = (c^+_0)^{i_0} (c^+_1)^{i_1} ... |vac> with site 0
in the most significant bit.  All references here are independent of the
tensor machinery: only scipy.sparse and dense eigensolvers.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

__all__ = [
    "annihilators",
    "dense_hamiltonian",
    "ground_energy",
    "free_fermion_energy",
    "anticommutator_defect",
]

_MAX_SITES = 12

_Z = sp.csr_matrix(np.diag([1.0, -1.0]))
_LOWER = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
_ID = sp.identity(2, format="csr")


def annihilators(n_sites: int) -> list[sp.csr_matrix]:
    """Sparse c_i for each site, with parity strings on earlier sites."""
    if n_sites > _MAX_SITES:
        raise ValueError(f"exact diagonalization limited to {_MAX_SITES} sites")
    ops = []
    for i in range(n_sites):
        factors = [_Z] * i + [_LOWER] + [_ID] * (n_sites - i - 1)
        op = factors[0]
        for f in factors[1:]:
            op = sp.kron(op, f, format="csr")
        ops.append(op)
    return ops


def dense_hamiltonian(n_sites: int, t: float, V: float) -> np.ndarray:
    """Open-chain t-V Hamiltonian matrix."""
    cs = annihilators(n_sites)
    dim = 1 << n_sites
    H = sp.csr_matrix((dim, dim), dtype=np.complex128)
    half = sp.identity(dim, format="csr") * 0.5
    for i in range(n_sites - 1):
        ci, cj = cs[i], cs[i + 1]
        H = H - t * (ci.conj().T @ cj - ci @ cj.conj().T)
        if V != 0.0:
            ni = ci.conj().T @ ci
            nj = cj.conj().T @ cj
            H = H + V * ((ni - half) @ (nj - half))
    return H.toarray()


def ground_energy(n_sites: int, t: float, V: float) -> float:
    H = dense_hamiltonian(n_sites, t, V)
    return float(np.linalg.eigvalsh(H)[0])


def free_fermion_energy(n_sites: int, t: float) -> float:
    """Ground energy of the open tight-binding chain from its band."""
    k = np.arange(1, n_sites + 1)
    eps = -2.0 * t * np.cos(k * np.pi / (n_sites + 1))
    return float(np.sum(eps[eps < 0.0]))


def anticommutator_defect(n_sites: int) -> float:
    """Largest violation of the canonical anticommutation relations."""
    cs = annihilators(n_sites)
    dim = 1 << n_sites
    worst = 0.0
    for i, ci in enumerate(cs):
        for j, cj in enumerate(cs):
            acc = (ci @ cj + cj @ ci).toarray()
            worst = max(worst, np.abs(acc).max())
            mixed = (ci @ cj.conj().T + cj.conj().T @ ci).toarray()
            target = np.eye(dim) if i == j else 0.0
            worst = max(worst, np.abs(mixed - target).max())
    return worst
