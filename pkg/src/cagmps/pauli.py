"""Pauli-label operator strings as Grassmann kernels.

A Hamiltonian term is stored as a coefficient and a label string over
{I, X, Y, Z}, one label per site.  Each label names a single-site
Grassmann kernel (a 2x2 coefficient matrix on a conjugated/plain leg
pair); a multi-site term is the site-ascending Grassmann product of its
kernels, which inserts anticommutation signs whenever odd factors (X, Y)
cross.  Because of those crossing signs a label string here is a
fermionic operator, not a qubit Kronecker product: for example
(-i/2) X_i Y_{i+1} + (i/2) Y_i X_{i+1} is the hopping
c^+_i c_{i+1} + c^+_{i+1} c_i.

``dense_operator`` and ``string_matrix`` return the matrix that acts on
occupation-basis state vectors (site 0 in the most significant bit),
matching both the dense chain state layout and the
exact-diagonalization module.  One representation fact to keep in mind:
contracting a kernel onto a state is sign-free only with the ket as the
left Berezin factor, which makes the state action the *transpose* of the
kernel coefficient matrix.  The action matrix of a bare Y label is
therefore sigma_y^T = -sigma_y, while every Hermitian combination (all
model Hamiltonians here) is transpose-invariant and unaffected.
"""

from __future__ import annotations

import dataclasses
from functools import lru_cache

import numpy as np

from . import grassmann as ga

__all__ = [
    "PAULI_MATRICES",
    "PAULI_PARITY",
    "PauliString",
    "Hamiltonian",
    "site_kernel",
    "nested_pair",
    "string_parity",
    "string_matrix",
    "dense_operator",
]

PAULI_MATRICES = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

PAULI_PARITY = {"I": 0, "X": 1, "Y": 1, "Z": 0}


def string_parity(labels: str) -> int:
    """Fermion parity of a label string: number of odd factors mod 2."""
    return sum(PAULI_PARITY[c] for c in labels) % 2


@lru_cache(maxsize=None)
def _site_kernel_coeffs(label: str) -> np.ndarray:
    arr = PAULI_MATRICES[label].copy()
    arr.setflags(write=False)
    return arr

def site_kernel(label: str) -> ga.GrassmannTensor:
    """Single-site kernel with signature (conjugated, plain)."""
    arr = _site_kernel_coeffs(label)
    par = PAULI_PARITY[label]
    return ga.GrassmannTensor((ga.Leg(1, True), ga.Leg(1, False)), arr, par)


def nested_pair(label_a: str, label_b: str) -> ga.GrassmannTensor:
    """Two-site kernel in nested signature (conj_a, conj_b, plain_b, plain_a)."""
    t = ga.outer(site_kernel(label_a), site_kernel(label_b))
    return ga.sign_permute(t, (0, 2, 3, 1))


@dataclasses.dataclass(frozen=True)
class PauliString:
    """One weighted label string."""

    coeff: complex
    labels: str

    def __post_init__(self):
        bad = set(self.labels) - set("IXYZ")
        if bad:
            raise ValueError(f"unknown labels {sorted(bad)}")

    @property
    def parity(self) -> int:
        return string_parity(self.labels)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.labels) if c != "I")

    def weight(self) -> int:
        return len(self.support)


@dataclasses.dataclass
class Hamiltonian:
    """Sum of even-parity label strings, checked Hermitian at build time.

    The formal dagger maps a label string to itself with the coefficient
    conjugated and multiplied by (-1)**C(k,2), k the number of odd
    factors (reversing k mutually anticommuting factors).  Distinct
    label strings are linearly independent, so Hermiticity is a
    per-string condition on the summed coefficients.
    """

    n_sites: int
    terms: list[PauliString]

    def __post_init__(self):
        combined: dict[str, complex] = {}
        for term in self.terms:
            if len(term.labels) != self.n_sites:
                raise ValueError(
                    f"term {term.labels!r} does not cover {self.n_sites} sites"
                )
            if term.parity != 0:
                raise ValueError(
                    f"term {term.labels!r} is parity-odd; chains conserve fermion parity"
                )
            combined[term.labels] = combined.get(term.labels, 0.0) + term.coeff
        for labels, c in combined.items():
            if abs(c) == 0.0:
                continue
            k = sum(PAULI_PARITY[ch] for ch in labels)
            sgn = -1.0 if (k * (k - 1) // 2) % 2 else 1.0
            if abs(np.conj(c) * sgn - c) > 1e-12 * abs(c):
                raise ValueError(
                    f"non-Hermitian coefficient {c} on {labels!r}"
                )

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a.astype(np.uint64)).astype(np.int64)


def string_matrix(labels: str) -> np.ndarray:
    """Dense matrix of a unit-coefficient label string (site 0 = MSB)."""
    n = len(labels)
    dim = 1 << n
    prod = np.array([[1.0 + 0j]])
    for ch in labels:  # site a lands in bit a of the little-endian index
        prod = np.kron(PAULI_MATRICES[ch], prod)

    idx = np.arange(dim)
    bits = ((idx[:, None] >> np.arange(n)[None, :]) & 1).astype(np.uint8)
    below = np.zeros((dim, n), dtype=np.uint8)
    acc = np.zeros(dim, dtype=np.uint8)
    for b in range(n):
        below[:, b] = acc
        acc ^= bits[:, b]
    # kernel sign: sum_{a<b} j_a i_b plus C(popcount(row), 2)
    cross = np.zeros((dim, dim), dtype=np.uint8)
    for b in range(n):
        cross ^= bits[:, b][:, None] & below[:, b][None, :]
    pc = _popcount(idx)
    diag = ((pc * (pc - 1) // 2) & 1).astype(np.uint8)
    sign = 1.0 - 2.0 * (cross ^ diag[:, None])
    kernel_little = prod * sign

    # state action is the kernel transpose; then flip to site-0-MSB order
    rev = np.zeros(dim, dtype=np.int64)
    for i in range(dim):
        v = 0
        for b in range(n):
            v |= ((i >> b) & 1) << (n - 1 - b)
        rev[i] = v
    little = kernel_little.T
    out = np.empty_like(little)
    out[rev[:, None], rev[None, :]] = little
    return out


def dense_operator(h: Hamiltonian) -> np.ndarray:
    """Dense matrix of a Hamiltonian on up to 12 sites."""
    if h.n_sites > 12:
        raise ValueError(f"dense conversion limited to 12 sites, got {h.n_sites}")
    dim = 1 << h.n_sites
    out = np.zeros((dim, dim), dtype=np.complex128)
    for term in h.terms:
        out += term.coeff * string_matrix(term.labels)
    return out
