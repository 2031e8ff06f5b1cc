"""The two-site Clifford gate group and its reduction to 12 candidates.

Everything here works in the 4 x 4 matrix representation: a gate matrix
acts on the dense two-site occupation basis (|i_j i_{j+1}>, earlier site
in the most significant bit).  Words are tuples of generator ids and a
word's matrix is the product of its generator matrices in written order.

Pipeline: breadth-first enumeration of the group modulo global phase
(11520 elements), quotient by the Pauli subgroup keeping the unique
representative whose conjugation images of X1, Z1, X2, Z2 are all
plus-signed (720), restriction to parity-block-diagonal matrices (32),
and identification of gates that differ by an even single-site product
applied after them (12).

For use inside the chain the module also converts gate matrices to
Grassmann tensors in nested signature and computes conjugation tables in
the *kernel pair* basis: the table entry for (mu, nu) says how the
two-site piece of a Hamiltonian label string transforms, including the
fermionic crossing signs that make this basis differ from plain qubit
Kronecker products.
"""

from __future__ import annotations

import dataclasses
from functools import lru_cache

import numpy as np

from . import grassmann as ga
from . import pauli

__all__ = [
    "GATE_NAMES",
    "CliffordGate",
    "GateSetResult",
    "generator_matrices",
    "word_matrix",
    "canonical_key",
    "enumerate_group",
    "tensor_from_matrix",
    "tensor_to_matrix",
    "pair_action_matrix",
    "tableau_of",
    "tableau_inverse",
    "gate_set",
    "classify_matrix",
]

GATE_NAMES = ("H0", "S0", "H1", "S1", "CX01", "CX10")

_LABELS = "IXYZ"
_PARITY_OF_INDEX = np.array([0, 1, 1, 0])  # popcount of two-bit indices mod 2


def generator_matrices() -> tuple[np.ndarray, ...]:
    """Hadamard and phase on each site plus both controlled flips."""
    h = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
    s = np.diag([1.0, 1.0j])
    i2 = np.eye(2, dtype=np.complex128)
    cx01 = np.zeros((4, 4), dtype=np.complex128)
    for j, out in enumerate((0, 1, 3, 2)):
        cx01[out, j] = 1.0
    cx10 = np.zeros((4, 4), dtype=np.complex128)
    for j, out in enumerate((0, 3, 2, 1)):
        cx10[out, j] = 1.0
    return (
        np.kron(h, i2),
        np.kron(s, i2),
        np.kron(i2, h),
        np.kron(i2, s),
        cx01,
        cx10,
    )


def word_matrix(word) -> np.ndarray:
    gens = generator_matrices()
    out = np.eye(4, dtype=np.complex128)
    for g in word:
        out = out @ gens[g]
    return out


def _canonical_batch(mats: np.ndarray) -> tuple[np.ndarray, list[bytes]]:
    """Phase-normalize a batch of matrices and hash them.

    The first entry (row-major) of magnitude above 1e-6 is rotated to the
    positive real axis; entries are rounded to nine digits so equal
    elements hash identically.
    """
    n = mats.shape[0]
    flat = mats.reshape(n, -1)
    first = np.argmax(np.abs(flat) > 1e-6, axis=1)
    pivot = flat[np.arange(n), first]
    phase = np.conj(pivot) / np.abs(pivot)
    canon = flat * phase[:, None]
    rounded = np.round(canon, 9) + 0.0
    return rounded.reshape(mats.shape), [row.tobytes() for row in rounded]


def canonical_key(mat: np.ndarray) -> bytes:
    return _canonical_batch(mat[None])[1][0]


def enumerate_group(max_elements: int = 50000):
    """Breadth-first closure of the generators modulo global phase.

    Returns (matrices, words); the word stored for each element is the
    shortest one, with ties broken lexicographically by generator id.
    """
    gens = np.stack(generator_matrices())
    elems = [np.eye(4, dtype=np.complex128)]
    words: list[tuple[int, ...]] = [()]
    seen = {canonical_key(elems[0])}
    frontier = [0]
    while frontier:
        batch = np.stack([elems[i] for i in frontier])
        cand = np.einsum("fij,gjk->fgik", batch, gens)
        cand = cand.reshape(-1, 4, 4)
        _, keys = _canonical_batch(cand)
        nxt = []
        for pos, key in enumerate(keys):
            if key in seen:
                continue
            seen.add(key)
            f, g = divmod(pos, len(gens))
            elems.append(cand[pos])
            words.append(words[frontier[f]] + (g,))
            nxt.append(len(elems) - 1)
            if len(elems) > max_elements:
                raise RuntimeError("group closure exceeded the safety bound")
        frontier = nxt
    return elems, words


_PAULI1 = [pauli.PAULI_MATRICES[c] for c in _LABELS]


@lru_cache(maxsize=1)
def _kron_basis() -> np.ndarray:
    out = np.empty((16, 4, 4), dtype=np.complex128)
    for m in range(4):
        for n in range(4):
            out[4 * m + n] = np.kron(_PAULI1[m], _PAULI1[n])
    return out


def _conjugation_images(mats: np.ndarray, probes: np.ndarray):
    """Decompose U P U^+ in the Kronecker-Pauli basis for each probe P.

    Returns (labels, signs) with shape (n_mats, n_probes); asserts each
    image is exactly +-1 times a basis element.
    """
    basis = _kron_basis()
    n = mats.shape[0]
    labels = np.empty((n, probes.shape[0]), dtype=np.int64)
    signs = np.empty((n, probes.shape[0]), dtype=np.int64)
    for pi, P in enumerate(probes):
        img = np.einsum("nij,jk,nlk->nil", mats, P, np.conj(mats))
        coeff = np.einsum("bij,nji->nb", basis, img) / 4.0
        best = np.argmax(np.abs(coeff), axis=1)
        val = coeff[np.arange(n), best]
        if np.abs(np.abs(val) - 1.0).max() > 1e-9 or np.abs(val.imag).max() > 1e-9:
            raise RuntimeError("conjugation image is not a signed Pauli")
        resid = img - np.sign(val.real)[:, None, None] * basis[best]
        if np.abs(resid).max() > 1e-9:
            raise RuntimeError("conjugation image has extra components")
        labels[:, pi] = best
        signs[:, pi] = np.sign(val.real).astype(np.int64)
    return labels, signs


def _sign_positive_representatives(elems, words):
    """One element per Pauli coset: the one with all-plus probe images."""
    mats = np.stack(elems)
    probes = np.stack(
        [_kron_basis()[4 * 1 + 0], _kron_basis()[4 * 3 + 0], _kron_basis()[1], _kron_basis()[3]]
    )  # X1, Z1, X2, Z2
    labels, signs = _conjugation_images(mats, probes)
    cosets: dict[tuple, list[int]] = {}
    for i in range(len(elems)):
        cosets.setdefault(tuple(labels[i]), []).append(i)
    reps = []
    for key, members in cosets.items():
        if len(members) != 16:
            raise RuntimeError(f"Pauli coset of size {len(members)}, expected 16")
        plus = [i for i in members if np.all(signs[i] == 1)]
        if len(plus) != 1:
            raise RuntimeError("sign-positive representative is not unique")
        reps.append(plus[0])
    reps.sort(key=lambda i: (len(words[i]), words[i]))
    return [(elems[i], words[i]) for i in reps]


def _is_parity_even(mat: np.ndarray, tol: float = 1e-9) -> bool:
    pr = _PARITY_OF_INDEX
    mask = pr[:, None] != pr[None, :]
    return bool(np.abs(mat[mask]).max() <= tol)


@lru_cache(maxsize=1)
def _local_even_products() -> tuple[np.ndarray, ...]:
    """Products of even single-site factors, 32 elements modulo phase.

    Single-site even factors are diag(1, i**k) and their antidiagonal
    partners; evenness of the product requires matching diagonal or
    antidiagonal structure on both sites.
    """
    s = np.diag([1.0, 1.0j])
    x = pauli.PAULI_MATRICES["X"]
    diag = [np.linalg.matrix_power(s, k) for k in range(4)]
    anti = [x @ d for d in diag]
    out = []
    seen = set()
    for family in (diag, anti):
        for a in family:
            for b in family:
                m = np.kron(a, b)
                key = canonical_key(m)
                if key not in seen:
                    seen.add(key)
                    out.append(m)
    if len(out) != 32:
        raise RuntimeError(f"expected 32 local even products, got {len(out)}")
    return tuple(out)


def _class_key(mat: np.ndarray) -> bytes:
    """Canonical label of the gate modulo local factors applied after it."""
    locals_ = _local_even_products()
    batch = np.einsum("cij,jk->cik", np.stack(locals_), mat)
    _, keys = _canonical_batch(batch)
    return min(keys)


# ---------------------------------------------------------------- tensors


_NESTED_LEGS = (ga.Leg(1, True), ga.Leg(1, True), ga.Leg(1, False), ga.Leg(1, False))
_SPLIT_PLAN = ga.SplitPlan(((1, 1), (1, 1)), (True, False))
_BITREV2 = np.array([0, 2, 1, 3])


def tensor_from_matrix(mat: np.ndarray) -> ga.GrassmannTensor:
    """Grassmann tensor in nested signature whose chain action is mat."""
    kernel = mat.T  # state action is the kernel transpose
    little = kernel[np.ix_(_BITREV2, _BITREV2)]
    joined = ga.GrassmannTensor(
        (ga.Leg(2, True), ga.Leg(2, False)), np.ascontiguousarray(little), None
    )
    split = ga.split_legs(joined, _SPLIT_PLAN)  # (conj_a, conj_b, plain_a, plain_b)
    nested = ga.sign_permute(split, (0, 1, 3, 2))
    nested.parity = nested.detect_parity(tol=1e-12)
    return nested


def tensor_to_matrix(t: ga.GrassmannTensor) -> np.ndarray:
    """Inverse of tensor_from_matrix."""
    if t.legs != _NESTED_LEGS:
        raise ga.LegMismatchError("expected a nested two-site operator tensor")
    tp = ga.sign_permute(t, (0, 1, 3, 2))
    kernel = ga.to_dense_matrix(tp, (0, 1))
    return kernel.T


@lru_cache(maxsize=None)
def pair_action_matrix(labels: str) -> np.ndarray:
    """Chain action of a two-site kernel pair, crossing signs included."""
    if len(labels) != 2:
        raise ValueError("need exactly two labels")
    return tensor_to_matrix(pauli.nested_pair(labels[0], labels[1]))


@lru_cache(maxsize=1)
def _pair_basis() -> np.ndarray:
    out = np.empty((16, 4, 4), dtype=np.complex128)
    for m, a in enumerate(_LABELS):
        for n, b in enumerate(_LABELS):
            out[4 * m + n] = pair_action_matrix(a + b)
    return out


@dataclasses.dataclass(frozen=True)
class ConjugationTable:
    """Phase-decorated permutation of the 16 kernel pairs.

    Entry k = 4*m + n says U A(m, n) U^+ = phase[k] * A(target[k]).  In
    this fermionic basis the phases live in {1, -1, i, -i}: same-site
    Majorana pairs re-expressed in Pauli labels carry factors of i, and
    a conjugation moving weight between pairs with different odd-factor
    counts must compensate with an imaginary unit to stay Hermitian.
    """

    target: np.ndarray  # (16,) int64, flattened 4*m' + n'
    phase: np.ndarray  # (16,) complex128

    def apply(self, m: int, n: int) -> tuple[complex, int, int]:
        k = 4 * m + n
        t = int(self.target[k])
        return complex(self.phase[k]), t // 4, t % 4

    def inverse(self) -> "ConjugationTable":
        target = np.empty(16, dtype=np.int64)
        phase = np.empty(16, dtype=np.complex128)
        for k in range(16):
            t = int(self.target[k])
            target[t] = k
            phase[t] = np.conj(self.phase[k])
        return ConjugationTable(target, phase)


_PHASE_CHOICES = np.array([1.0, 1.0j, -1.0, -1.0j])


def tableau_of(mat: np.ndarray, tol: float = 1e-10) -> ConjugationTable:
    """Conjugation table of a gate matrix in the kernel-pair basis."""
    basis = _pair_basis()
    img = np.einsum("ij,bjk,lk->bil", mat, basis, np.conj(mat))
    coeff = np.einsum("cij,bij->bc", np.conj(basis), img) / 4.0
    best = np.argmax(np.abs(coeff), axis=1)
    val = coeff[np.arange(16), best]
    snapped = _PHASE_CHOICES[
        np.argmin(np.abs(val[:, None] - _PHASE_CHOICES[None, :]), axis=1)
    ]
    if np.abs(val - snapped).max() > tol:
        raise ValueError("matrix does not permute the kernel-pair basis")
    resid = img - snapped[:, None, None] * basis[best]
    if np.abs(resid).max() > tol:
        raise ValueError("conjugation leaves the kernel-pair basis")
    if len(set(best.tolist())) != 16:
        raise ValueError("conjugation images collide")
    return ConjugationTable(best.astype(np.int64), snapped.astype(np.complex128))


def tableau_inverse(tab: ConjugationTable) -> ConjugationTable:
    return tab.inverse()


# ---------------------------------------------------------------- gate set


@dataclasses.dataclass(frozen=True)
class CliffordGate:
    """One disentangling candidate: matrix, word, tensor and tableau."""

    gate_id: int
    word: tuple[int, ...]
    matrix: np.ndarray
    tensor: ga.GrassmannTensor
    tableau: ConjugationTable

    @property
    def is_identity(self) -> bool:
        return len(self.word) == 0

    def word_names(self) -> tuple[str, ...]:
        return tuple(GATE_NAMES[g] for g in self.word)


@dataclasses.dataclass(frozen=True)
class GateSetResult:
    """Pipeline output: stage counts plus the final gate objects."""

    n_group: int
    n_sign_positive: int
    n_even: int
    gates: tuple[CliffordGate, ...]

    @property
    def counts(self) -> tuple[int, int, int, int]:
        return (self.n_group, self.n_sign_positive, self.n_even, len(self.gates))


@lru_cache(maxsize=1)
def gate_set() -> GateSetResult:
    """Run the full reduction pipeline (cached)."""
    elems, words = enumerate_group()
    reps = _sign_positive_representatives(elems, words)
    even = [(m, w) for m, w in reps if _is_parity_even(m)]

    classes: dict[bytes, list[tuple[np.ndarray, tuple[int, ...]]]] = {}
    for m, w in even:
        classes.setdefault(_class_key(m), []).append((m, w))

    chosen = []
    for members in classes.values():
        members.sort(key=lambda mw: (len(mw[1]), mw[1]))
        chosen.append(members[0])
    chosen.sort(key=lambda mw: (len(mw[1]), mw[1]))

    gates = []
    for gid, (mat, word) in enumerate(chosen):
        tensor = tensor_from_matrix(mat)
        gates.append(
            CliffordGate(
                gate_id=gid,
                word=word,
                matrix=mat,
                tensor=tensor,
                tableau=tableau_of(mat),
            )
        )
    return GateSetResult(
        n_group=len(elems),
        n_sign_positive=len(reps),
        n_even=len(even),
        gates=tuple(gates),
    )


def classify_matrix(mat: np.ndarray) -> int:
    """Gate id of the class containing an even group element."""
    if not _is_parity_even(mat):
        raise ValueError("matrix mixes parity sectors")
    key = _class_key(mat)
    for gate in gate_set().gates:
        if _class_key(gate.matrix) == key:
            return gate.gate_id
    raise ValueError("matrix is not in the even gate classes")
