"""Fermionic matrix product states built from graded tensors.

State layout
------------
Site ``a`` of an ``n``-site chain carries a tensor with signature::

    (Leg(g_in, conjugated), Leg(1, plain), Leg(g_out, plain))
       bond from the left     occupation      bond to the right

with the incoming bond dropped at ``a = 0`` and the outgoing bond
dropped at ``a = n - 1``.  Contracting a site's outgoing bond against
the next site's incoming bond places the plain leg immediately left of
its conjugated partner, so the chain glues together without extra
signs; the fully contracted coefficient array, flattened C-order, lists
occupation amplitudes with site 0 as the most significant bit — the
same layout used by the dense operators in :mod:`cagmps.pauli` and
:mod:`cagmps.ed`.

Every site tensor is parity even.  A bond slot's occupation parity then
equals the fermion-number parity to its left, Schmidt blocks never mix
sectors, and the global state is an even element as required for a
physical fermionic wavefunction.

Canonical form
--------------
``center`` marks the orthogonality center: sites to its left are left
isometries and sites to its right are right isometries on their
populated bond slots, so the state norm is the Frobenius norm of the
center tensor and single-bond Schmidt spectra drop out of one-site
splits as the center sweeps by.

Transfer contractions
---------------------
Matrix elements ``<bra| K_0 K_1 ... |ket>`` of single-site kernel
strings contract the network in the global product order: ket sites
ascending, kernels ascending, daggered bra sites descending.  Because
all site tensors are even they commute freely with any partially
absorbed kernel prefix, so a left environment can absorb one site's
(ket, kernel, bra) triple at a time with no leftover reordering signs
even while the absorbed kernel prefix is odd.  Environments are kept in
the fixed signature (ket bond: plain, bra bond: conjugated).
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import grassmann as ga
from . import pauli
from .grassmann import GrassmannTensor, Leg, ParityError

_DENSE_SITE_LIMIT = 16


def physical_axis(site: int, n_sites: int) -> int:
    """Axis of the occupation leg on a boundary-aware site tensor."""
    return 1 if site > 0 else 0


def entanglement_entropy(values: np.ndarray) -> float:
    """Von Neumann entropy of a Schmidt spectrum (normalized internally)."""
    v = np.asarray(values, dtype=float)
    w = v[v > 0.0] ** 2
    if w.size == 0:
        return 0.0
    p = w / w.sum()
    p = p[p > 1e-300]
    return float(-(p * np.log(p)).sum())


def _site_legs(n_sites: int, site: int, g_in: int, g_out: int) -> tuple[Leg, ...]:
    legs = []
    if site > 0:
        legs.append(Leg(g_in, True))
    legs.append(Leg(1, False))
    if site < n_sites - 1:
        legs.append(Leg(g_out, False))
    return tuple(legs)


@dataclasses.dataclass
class GMPS:
    """Graded matrix product state with an orthogonality center.

    sites   -- one even tensor per site, signatures as in the module
               docstring
    center  -- index of the orthogonality center (exact after any
               constructor or move_center call; a site update leaves the
               caller responsible for keeping it truthful)
    """

    sites: list[GrassmannTensor]
    center: int

    def __post_init__(self) -> None:
        n = len(self.sites)
        if n < 2:
            raise ValueError("need at least two sites")
        if not 0 <= self.center < n:
            raise ValueError("center out of range")
        for a, t in enumerate(self.sites):
            expected_rank = 2 if a in (0, n - 1) else 3
            if t.rank != expected_rank:
                raise ValueError(f"site {a} has rank {t.rank}, expected {expected_rank}")
            if t.parity != 0:
                raise ParityError(f"site {a} is parity odd")
            if t.legs[physical_axis(a, n)] != Leg(1, False):
                raise ValueError(f"site {a} physical leg malformed")
            if a > 0 and self.sites[a - 1].legs[-1].dual() != t.legs[0]:
                raise ValueError(f"bond {a - 1} legs are not dual")

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def product_state(cls, occupations) -> "GMPS":
        """Occupation-basis product state.

        The populated slot of bond a records the fermion-number parity
        of sites <= a, so every site tensor is even; this forces an even
        total occupation.
        """
        occ = [int(bool(x)) for x in occupations]
        n = len(occ)
        if n < 2:
            raise ValueError("need at least two sites")
        if sum(occ) % 2 != 0:
            raise ParityError("total occupation must be even for an even state")
        sites = []
        cum = 0
        for a in range(n):
            legs = _site_legs(n, a, 1, 1)
            coeffs = np.zeros([l.dimension for l in legs], dtype=np.complex128)
            nxt = (cum + occ[a]) % 2
            idx = []
            if a > 0:
                idx.append(cum)
            idx.append(occ[a])
            if a < n - 1:
                idx.append(nxt)
            coeffs[tuple(idx)] = 1.0
            sites.append(GrassmannTensor(legs, coeffs, 0))
            cum = nxt
        return cls(sites, center=0)

    @classmethod
    def random_even(cls, n_sites: int, chi_max: int, rng: np.random.Generator) -> "GMPS":
        """Random normalized even state with capped bond dimensions."""
        if n_sites < 2:
            raise ValueError("need at least two sites")
        gmax = max(1, math.ceil(math.log2(max(2, chi_max))))
        bond_g = [min(b + 1, n_sites - 1 - b, gmax) for b in range(n_sites - 1)]
        sites = []
        for a in range(n_sites):
            g_in = bond_g[a - 1] if a > 0 else 0
            g_out = bond_g[a] if a < n_sites - 1 else 0
            legs = _site_legs(n_sites, a, g_in, g_out)
            shape = [l.dimension for l in legs]
            coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            coeffs[~ga.even_mask(legs)] = 0.0
            sites.append(GrassmannTensor(legs, coeffs, 0))
        state = cls(sites, center=0)
        state._recanonicalize()
        state.normalize()
        return state

    # ------------------------------------------------------------------
    # basic queries

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def bond_leg(self, bond: int) -> Leg:
        """Outgoing leg of site `bond` (the leg crossing bond `bond`)."""
        return self.sites[bond].legs[-1]

    def max_bond_dimension(self) -> int:
        return max(self.bond_leg(b).dimension for b in range(self.n_sites - 1))

    def copy(self) -> "GMPS":
        return GMPS([t.copy() for t in self.sites], self.center)

    def norm(self) -> float:
        val = string_overlap(self, self)
        return float(math.sqrt(max(val.real, 0.0)))

    def normalize(self) -> None:
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize a zero state")
        c = self.sites[self.center]
        self.sites[self.center] = GrassmannTensor(c.legs, c.coeffs / nrm, c.parity)

    # ------------------------------------------------------------------
    # canonical moves

    def _shift_right(self, cutoff: float = 0.0) -> ga.GSVDResult:
        """Split the center leftwards-isometric and push S.V into the next site."""
        c = self.center
        if c >= self.n_sites - 1:
            raise ValueError("center already at the right edge")
        t = self.sites[c]
        res = ga.gsvd(t, tuple(range(t.rank - 1)), cutoff=cutoff)
        self.sites[c] = res.U
        self.sites[c + 1] = ga.contract(res.sv(), (1,), self.sites[c + 1], (0,))
        self.center = c + 1
        return res

    def _shift_left(self, cutoff: float = 0.0) -> ga.GSVDResult:
        """Split the center rightwards-isometric and push U.S into the previous site."""
        c = self.center
        if c <= 0:
            raise ValueError("center already at the left edge")
        t = self.sites[c]
        res = ga.gsvd(t, (0,), cutoff=cutoff)
        self.sites[c] = res.V
        prev = self.sites[c - 1]
        self.sites[c - 1] = ga.contract(prev, (prev.rank - 1,), res.us(), (0,))
        self.center = c - 1
        return res

    def move_center(self, to: int, cutoff: float = 0.0) -> None:
        if not 0 <= to < self.n_sites:
            raise ValueError("target site out of range")
        while self.center < to:
            self._shift_right(cutoff=cutoff)
        while self.center > to:
            self._shift_left(cutoff=cutoff)

    def _recanonicalize(self) -> None:
        """Restore canonical form by sweeping edge to edge (exact splits)."""
        self.center = 0
        self.move_center(self.n_sites - 1)
        self.move_center(0)

    # ------------------------------------------------------------------
    # spectra and entropies

    def schmidt_spectra(self) -> list[np.ndarray]:
        """Schmidt values across every bond (normalized; state untouched)."""
        work = self.copy()
        work.move_center(0)
        nrm = float(np.linalg.norm(work.sites[0].coeffs))
        if nrm == 0.0:
            raise ValueError("zero state has no Schmidt spectrum")
        out = []
        for _ in range(self.n_sites - 1):
            res = work._shift_right()
            out.append(res.S / nrm)
        return out

    def bond_entropies(self) -> np.ndarray:
        return np.array([entanglement_entropy(s) for s in self.schmidt_spectra()])

    # ------------------------------------------------------------------
    # dense conversion and expectations

    def dense_state(self) -> np.ndarray:
        """Occupation amplitudes, site 0 as the most significant bit."""
        n = self.n_sites
        if n > _DENSE_SITE_LIMIT:
            raise ValueError(f"dense conversion limited to {_DENSE_SITE_LIMIT} sites")
        acc = self.sites[0]
        for a in range(1, n):
            acc = ga.contract(acc, (acc.rank - 1,), self.sites[a], (0,))
        return acc.coeffs.reshape(-1)

    def expectation_string(self, labels: str) -> complex:
        """<self| kernel string |self> / <self|self>."""
        val = string_overlap(self, self, labels)
        nrm2 = string_overlap(self, self).real
        return val / nrm2

    def expectation(self, ham: pauli.Hamiltonian) -> complex:
        """<self| H |self> / <self|self> for a kernel-string Hamiltonian."""
        if ham.n_sites != self.n_sites:
            raise ValueError("operator and state have different lengths")
        nrm2 = string_overlap(self, self).real
        total = 0.0 + 0.0j
        for term in ham.terms:
            total += term.coeff * string_overlap(self, self, term.labels)
        return total / nrm2


def transfer_absorb_left(
    env: GrassmannTensor | None,
    ket_site: GrassmannTensor,
    bra_site: GrassmannTensor,
    label: str = "I",
) -> GrassmannTensor:
    """Absorb one (ket, kernel, daggered bra) column into a left environment.

    env carries the signature (ket bond: plain, bra bond: conjugated) or
    is None at the left edge.  The returned environment has the same
    signature one bond to the right.  Single-site kernels of any parity
    are allowed: even site tensors commute freely past the partially
    absorbed kernel prefix, so no reordering signs are left behind.
    """
    A = ket_site
    B = ga.conj(bra_site)
    if A.rank == 2 and not A.legs[0].conjugated:
        # left edge: legs (psi, phi)
        if env is not None:
            raise ValueError("edge site does not take an environment")
        T, pax = A, 0
        if label != "I":
            T = ga.contract(T, (0,), pauli.site_kernel(label), (0,))
            pax = 1
        return ga.contract(T, (pax,), B, (1,))
    if A.rank != 3:
        raise ValueError("left absorption expects an interior or left-edge site")
    if env is None:
        raise ValueError("interior absorption needs an environment")
    T = ga.contract(env, (0,), A, (0,))  # (bra bond, psi, phi)
    pax = 1
    if label != "I":
        T = ga.contract(T, (1,), pauli.site_kernel(label), (0,))
        pax = T.rank - 1
    # B legs (phi_a^, psi_a^, phi_{a-1})
    return ga.contract(T, (0, pax), B, (2, 1))


def transfer_close_left(
    env: GrassmannTensor | None,
    ket_site: GrassmannTensor,
    bra_site: GrassmannTensor,
    label: str = "I",
) -> complex:
    """Close a left environment on the right-edge site, returning the value."""
    A = ket_site
    if A.rank != 2 or not A.legs[0].conjugated:
        raise ValueError("closing expects the right-edge site")
    if env is None:
        raise ValueError("closing needs an environment")
    B = ga.conj(bra_site)  # legs (psi^, phi_{n-2})
    T = ga.contract(env, (0,), A, (0,))  # (bra bond, psi)
    if label != "I":
        T = ga.contract(T, (1,), pauli.site_kernel(label), (0,))
    out = ga.contract(T, (0, 1), B, (1, 0))
    return complex(out.coeffs.reshape(()))


def transfer_absorb_right(
    env: GrassmannTensor | None,
    ket_site: GrassmannTensor,
    bra_site: GrassmannTensor,
    label: str = "I",
) -> GrassmannTensor:
    """Mirror of transfer_absorb_left, growing an environment leftwards.

    Right environments carry the signature (ket bond: conjugated, bra
    bond: plain); env is None at the right edge.
    """
    A = ket_site
    B = ga.conj(bra_site)
    if A.rank == 2 and A.legs[0].conjugated:
        # right edge: legs (phi^, psi)
        if env is not None:
            raise ValueError("edge site does not take an environment")
        T = A
        if label != "I":
            T = ga.contract(T, (1,), pauli.site_kernel(label), (0,))
        # B legs (psi^, phi_{n-2})
        return ga.contract(T, (1,), B, (0,))
    if A.rank != 3:
        raise ValueError("right absorption expects an interior or right-edge site")
    if env is None:
        raise ValueError("interior absorption needs an environment")
    T = A
    bond_ax = 2
    if label != "I":
        T = ga.contract(T, (1,), pauli.site_kernel(label), (0,))  # (phi^, phi, psi')
        bond_ax = 1
    T = ga.contract(T, (bond_ax,), env, (0,))  # (phi^, psi', bra bond)
    # B legs (phi_a^, psi_a^, phi_{a-1})
    return ga.contract(T, (1, 2), B, (1, 0))


def transfer_close_right(
    env: GrassmannTensor | None,
    ket_site: GrassmannTensor,
    bra_site: GrassmannTensor,
    label: str = "I",
) -> complex:
    """Close a right environment on the left-edge site, returning the value."""
    A = ket_site
    if A.rank != 2 or A.legs[0].conjugated:
        raise ValueError("closing expects the left-edge site")
    if env is None:
        raise ValueError("closing needs an environment")
    B = ga.conj(bra_site)  # legs (phi0^, psi0^)
    T = A
    bond_ax = 1
    if label != "I":
        T = ga.contract(T, (0,), pauli.site_kernel(label), (0,))  # (phi, psi')
        bond_ax = 0
    T = ga.contract(T, (bond_ax,), env, (0,))  # (psi', bra bond)
    out = ga.contract(T, (0, 1), B, (1, 0))
    return complex(out.coeffs.reshape(()))


def string_overlap(bra: GMPS, ket: GMPS, labels: str | None = None) -> complex:
    """<bra| K(labels) |ket> via a left-to-right transfer contraction.

    labels is a length-n string over IXYZ (None means pure overlap).
    Kernel factors are inserted in site-ascending order between the ket
    chain and the descending daggered bra chain, matching
    pauli.string_matrix acting on dense amplitudes.
    """
    n = ket.n_sites
    if bra.n_sites != n:
        raise ValueError("bra and ket have different lengths")
    if labels is not None and len(labels) != n:
        raise ValueError("label string has the wrong length")
    env: GrassmannTensor | None = None
    for a in range(n - 1):
        lab = "I" if labels is None else labels[a]
        env = transfer_absorb_left(env, ket.sites[a], bra.sites[a], lab)
    lab = "I" if labels is None else labels[n - 1]
    return transfer_close_left(env, ket.sites[n - 1], bra.sites[n - 1], lab)
