"""Two-site ground-state sweeps with optional in-sweep Clifford disentangling.

The optimizer is a standard two-site scheme over the graded states of
:mod:`cagmps.mps`: at each bond the two site tensors are fused, the
lowest eigenvector of the effective Hamiltonian on that window is found
(Lanczos on the parity-even sector), and the window is split again with
a capped, parity-blocked SVD.

The Hamiltonian is held as a list of kernel strings (coefficient plus
one I/X/Y/Z label per site).  Environments are cached per cut:

* ``agg``   -- one tensor summing every string whose support is already
  fully absorbed, coefficients baked in.  Such strings carry identity
  labels on the window under any later rewriting, so the baked sums
  never go stale.
* ``envs``  -- one tensor per string whose support crosses the cut,
  coefficient NOT baked in (a later window rewrite may change it).

Because every site tensor is parity even, the canonical half-chain
transfer is exactly the identity matrix (an eye on the bond), and the
window inner product of two-site tensors equals the overlap of the
embedded states; the effective Hamiltonian assembled from these
environments is the true projected Hamiltonian in the flat vdot metric.

Disentangling: before each split, the twelve candidate gates are applied
to the window and the blocked singular-value entropy across the bond is
measured; the best gate is adopted when it improves on the identity by
more than ``gate_threshold`` (ties break to the lowest gate id).  An
adopted gate rewrites each string's label pair on the window through
the gate's conjugation table (coefficient times a unit phase), which
touches only the two window columns -- every cached environment stays
valid, exactly like a plain tensor update.
"""

from __future__ import annotations

import dataclasses
import math
from functools import lru_cache

import numpy as np
import scipy.linalg

from . import clifford
from . import grassmann as ga
from . import mps as mpsmod
from . import pauli
from .grassmann import GrassmannTensor, Leg
from .mps import GMPS, entanglement_entropy

LABELS = "IXYZ"
_LABEL_INDEX = {c: i for i, c in enumerate(LABELS)}


# ----------------------------------------------------------------------
# configuration and result records


@dataclasses.dataclass
class SweepConfig:
    """Knobs for a sweep run.

    chi_max          -- cap on kept singular values per split
    n_sweeps         -- number of full (left-right plus right-left) sweeps
    use_clifford     -- search the twelve disentangling gates at each bond
    cutoff           -- relative singular-value floor inside each split
    eig_tol          -- Lanczos residual tolerance (times max(1, |E|))
    max_matvecs      -- Lanczos iteration cap per bond
    gate_threshold   -- entropy gain a gate must beat to be adopted
    dense_cutoff     -- even-sector size at or below which the window
                        eigenproblem is solved densely
    clifford_warmup  -- plain sweeps before the gate search activates.
                        Gates adopted while the state is still far from
                        the variational optimum rotate the Hamiltonian
                        into a frame fitted to that transient and the
                        greedy one-gate search cannot always recover, so
                        a short warm-up keeps the augmented runs at or
                        below the plain-run energies.
    """

    chi_max: int
    n_sweeps: int
    use_clifford: bool = False
    cutoff: float = 1e-14
    eig_tol: float = 1e-10
    max_matvecs: int = 200
    gate_threshold: float = 1e-12
    dense_cutoff: int = 64
    clifford_warmup: int = 2


@dataclasses.dataclass
class GateLogEntry:
    """One disentangling decision (gate id 0 means identity kept)."""

    sweep: int
    bond: int
    gate_id: int
    entropy_before: float
    entropy_after: float


@dataclasses.dataclass
class HalfSweepRecord:
    sweep: int
    direction: str  # "LR" or "RL"
    energy: float
    max_discarded: float
    n_matvecs: int


@dataclasses.dataclass
class DMRGResult:
    state: GMPS
    hamiltonian: pauli.Hamiltonian  # in the final (rotated) frame
    energies: np.ndarray  # one entry per half sweep
    records: list[HalfSweepRecord]
    gate_log: list[GateLogEntry]

    @property
    def energy(self) -> float:
        return float(self.energies[-1])


def default_half_filling(n_sites: int) -> list[int]:
    """Alternating occupation starting filled; forced to even count.

    When ceil(n/2) is odd the last occupied site is emptied, keeping the
    state inside the physical even-parity sector.
    """
    occ = [(a + 1) % 2 for a in range(n_sites)]
    if sum(occ) % 2 == 1:
        occ[2 * (sum(occ) - 1)] = 0
    return occ


# ----------------------------------------------------------------------
# small tensor helpers


@lru_cache(maxsize=64)
def _pair_tensor(lab_a: str, lab_b: str) -> GrassmannTensor:
    return pauli.nested_pair(lab_a, lab_b)


def _eye_left(g: int) -> GrassmannTensor:
    return GrassmannTensor((Leg(g, False), Leg(g, True)), np.eye(1 << g, dtype=np.complex128), 0)


def _eye_right(g: int) -> GrassmannTensor:
    return GrassmannTensor((Leg(g, True), Leg(g, False)), np.eye(1 << g, dtype=np.complex128), 0)


def _apply_site_kernel_at(t: GrassmannTensor, axis: int, label: str) -> GrassmannTensor:
    """Apply a single-site kernel on one leg, restoring the leg order."""
    if label == "I":
        return t
    out = ga.contract(t, (axis,), pauli.site_kernel(label), (0,))
    k = t.rank
    perm = tuple(range(axis)) + (k - 1,) + tuple(range(axis, k - 1))
    return ga.sign_permute(out, perm)


def _apply_pair_tensor(blob: GrassmannTensor, pair: GrassmannTensor, pj: int) -> GrassmannTensor:
    """Apply a nested two-site operator on axes (pj, pj+1), order restored."""
    k = blob.rank
    out = ga.contract(blob, (pj, pj + 1), pair, (0, 1))
    perm = tuple(range(pj)) + (k - 1, k - 2) + tuple(range(pj, k - 2))
    return ga.sign_permute(out, perm)


def _presign_left(env: GrassmannTensor) -> np.ndarray:
    """Left environment as a raw matrix usable via plain tensordot.

    The environment's open bra-side bond leg carries conjugated-frame
    generators; reading the effective-Hamiltonian output as a ket-frame
    window tensor re-orients that dual pairing, which costs a sign on
    every parity-odd bra-bond slot.  (The right environment's bra leg is
    already plain-oriented and needs no correction.)
    """
    mat = ga.sign_permute(env, (1, 0)).coeffs
    par = ga.total_parity((env.legs[1],)).reshape(-1)
    return mat * (1.0 - 2.0 * par)[:, None]


# ----------------------------------------------------------------------
# environment bookkeeping


@dataclasses.dataclass
class _CutEnvs:
    agg: GrassmannTensor | None
    envs: dict[int, GrassmannTensor]


@dataclasses.dataclass
class _BondPlan:
    """Precomputed effective-Hamiltonian application at one bond."""

    legs: tuple[Leg, ...]
    shape: tuple[int, ...]
    even_idx: np.ndarray
    pj: int
    window: GrassmannTensor | None
    agg_l: np.ndarray | None
    agg_r: np.ndarray | None
    groups_l: list[tuple[str, str, np.ndarray]]
    groups_r: list[tuple[str, str, np.ndarray]]
    groups_d: list[tuple[str, str, np.ndarray, np.ndarray]]

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


class _Engine:
    def __init__(self, ham: pauli.Hamiltonian, state: GMPS, config: SweepConfig):
        if ham.n_sites != state.n_sites:
            raise ValueError("operator and state have different lengths")
        self.n = state.n_sites
        self.state = state
        self.config = config
        self.coeffs = np.array([t.coeff for t in ham.terms], dtype=np.complex128)
        self.labels = np.array(
            [[_LABEL_INDEX[c] for c in t.labels] for t in ham.terms], dtype=np.uint8
        )
        self._recompute_support()
        self.gates = clifford.gate_set().gates if config.use_clifford else None
        self.gate_log: list[GateLogEntry] = []
        self.lcuts: list[_CutEnvs | None] = [None] * self.n
        self.rcuts: list[_CutEnvs | None] = [None] * (self.n + 1)

    # -- Hamiltonian bookkeeping ---------------------------------------

    def _recompute_support(self) -> None:
        nz = self.labels != 0
        if not nz.any(axis=1).all():
            raise ValueError("encountered an identity string")
        self.mins = np.argmax(nz, axis=1)
        self.maxs = self.labels.shape[1] - 1 - np.argmax(nz[:, ::-1], axis=1)

    def _conjugate_window(self, gate: clifford.CliffordGate, j: int) -> None:
        idx = 4 * self.labels[:, j].astype(np.int64) + self.labels[:, j + 1]
        tgt = gate.tableau.target[idx]
        self.coeffs = self.coeffs * gate.tableau.phase[idx]
        self.labels[:, j] = (tgt // 4).astype(np.uint8)
        self.labels[:, j + 1] = (tgt % 4).astype(np.uint8)
        self._recompute_support()

    def current_hamiltonian(self) -> pauli.Hamiltonian:
        terms = [
            pauli.PauliString(complex(c), "".join(LABELS[l] for l in row))
            for c, row in zip(self.coeffs, self.labels)
        ]
        return pauli.Hamiltonian(self.n, terms)

    # -- environment maintenance ---------------------------------------

    def _advance_left(self, cut: _CutEnvs, j: int) -> _CutEnvs:
        """Absorb site j (left-canonical) into a cut-j structure."""
        A = self.state.sites[j]
        new_agg = None if cut.agg is None else mpsmod.transfer_absorb_left(cut.agg, A, A, "I")
        new_envs: dict[int, GrassmannTensor] = {}
        members = set(cut.envs) | set(np.nonzero(self.mins == j)[0].tolist())
        for s in sorted(members):
            if s in cut.envs:
                env_in = cut.envs[s]
            elif j == 0:
                env_in = None
            else:
                env_in = _eye_left(A.legs[0].generators)
            out = mpsmod.transfer_absorb_left(env_in, A, A, LABELS[self.labels[s, j]])
            if self.maxs[s] <= j:
                contrib = complex(self.coeffs[s]) * out
                new_agg = contrib if new_agg is None else new_agg + contrib
            else:
                new_envs[s] = out
        return _CutEnvs(new_agg, new_envs)

    def _advance_right(self, cut: _CutEnvs, k: int) -> _CutEnvs:
        """Absorb site k (right-canonical) into a cut-(k+1) structure."""
        A = self.state.sites[k]
        new_agg = None if cut.agg is None else mpsmod.transfer_absorb_right(cut.agg, A, A, "I")
        new_envs: dict[int, GrassmannTensor] = {}
        members = set(cut.envs) | set(np.nonzero(self.maxs == k)[0].tolist())
        for s in sorted(members):
            if s in cut.envs:
                env_in = cut.envs[s]
            elif k == self.n - 1:
                env_in = None
            else:
                env_in = _eye_right(A.legs[-1].generators)
            out = mpsmod.transfer_absorb_right(env_in, A, A, LABELS[self.labels[s, k]])
            if self.mins[s] >= k:
                contrib = complex(self.coeffs[s]) * out
                new_agg = contrib if new_agg is None else new_agg + contrib
            else:
                new_envs[s] = out
        return _CutEnvs(new_agg, new_envs)

    def _init_right_cuts(self) -> None:
        self.rcuts[self.n] = _CutEnvs(None, {})
        for k in range(self.n - 1, 1, -1):
            self.rcuts[k] = self._advance_right(self.rcuts[k + 1], k)

    # -- effective Hamiltonian -----------------------------------------

    def _build_plan(self, j: int, blob_legs: tuple[Leg, ...]) -> _BondPlan:
        lcut = self.lcuts[j]
        rcut = self.rcuts[j + 2]
        pj = 1 if j > 0 else 0
        shape = tuple(l.dimension for l in blob_legs)
        # Bond legs hold 2^g slots, but only slots carrying Schmidt weight
        # embed into nonzero chain states.  The local solve must exclude the
        # dead slots: the effective operator is block diagonal between live
        # and dead slots, and the dead block is a spurious copy that sees
        # only part of the Hamiltonian (an unlucky update could otherwise
        # adopt a dead-slot eigenvector and silently shrink the state).
        mask = ga.even_mask(blob_legs).reshape(shape)
        if j > 0:
            a = self.state.sites[j - 1].coeffs
            live = np.any(a.reshape(-1, a.shape[-1]) != 0, axis=0)
            mask = mask & live.reshape((-1,) + (1,) * (len(blob_legs) - 1))
        if j + 2 < self.n:
            b = self.state.sites[j + 2].coeffs
            live = np.any(b.reshape(b.shape[0], -1) != 0, axis=1)
            mask = mask & live.reshape((1,) * (len(blob_legs) - 1) + (-1,))
        even_idx = np.nonzero(mask.reshape(-1))[0]

        window: GrassmannTensor | None = None
        agg_l = None if lcut.agg is None else _presign_left(lcut.agg)
        agg_r = None if rcut.agg is None else rcut.agg.coeffs
        grp_l: dict[tuple[str, str], GrassmannTensor] = {}
        grp_r: dict[tuple[str, str], GrassmannTensor] = {}
        grp_d: dict[tuple[str, str], tuple[list, list]] = {}

        for s in range(len(self.coeffs)):
            lo, hi = self.mins[s], self.maxs[s]
            if hi < j or lo > j + 1:
                continue  # lives entirely inside agg_l / agg_r
            pair = (LABELS[self.labels[s, j]], LABELS[self.labels[s, j + 1]])
            left = lo < j
            right = hi > j + 1
            if not left and not right:
                term = complex(self.coeffs[s]) * _pair_tensor(*pair)
                window = term if window is None else window + term
            elif left and not right:
                contrib = complex(self.coeffs[s]) * lcut.envs[s]
                if pair in grp_l:
                    grp_l[pair] = grp_l[pair] + contrib
                else:
                    grp_l[pair] = contrib
            elif right and not left:
                contrib = complex(self.coeffs[s]) * rcut.envs[s]
                if pair in grp_r:
                    grp_r[pair] = grp_r[pair] + contrib
                else:
                    grp_r[pair] = contrib
            else:
                ls, rs = grp_d.setdefault(pair, ([], []))
                ls.append(complex(self.coeffs[s]) * _presign_left(lcut.envs[s]))
                rs.append(rcut.envs[s].coeffs)

        return _BondPlan(
            legs=blob_legs,
            shape=shape,
            even_idx=even_idx,
            pj=pj,
            window=window,
            agg_l=agg_l,
            agg_r=agg_r,
            groups_l=[(a, b, _presign_left(t)) for (a, b), t in grp_l.items()],
            groups_r=[(a, b, t.coeffs) for (a, b), t in grp_r.items()],
            groups_d=[
                (a, b, np.stack(ls), np.stack(rs)) for (a, b), (ls, rs) in grp_d.items()
            ],
        )

    def _apply_plan(self, plan: _BondPlan, x: np.ndarray) -> np.ndarray:
        full = np.zeros(plan.size, dtype=np.complex128)
        full[plan.even_idx] = x
        B = full.reshape(plan.shape)
        Y = np.zeros(plan.shape, dtype=np.complex128)
        last = len(plan.shape) - 1

        def wrap(arr):
            return GrassmannTensor(plan.legs, arr, 0)

        if plan.window is not None:
            Y += _apply_pair_tensor(wrap(B), plan.window, plan.pj).coeffs
        if plan.agg_l is not None:
            Y += np.tensordot(plan.agg_l, B, axes=([1], [0]))
        if plan.agg_r is not None:
            Y += np.tensordot(B, plan.agg_r, axes=([last], [0]))
        for la, lb, mat in plan.groups_l:
            Z = wrap(np.tensordot(mat, B, axes=([1], [0])))
            Z = _apply_site_kernel_at(Z, plan.pj, la)
            Z = _apply_site_kernel_at(Z, plan.pj + 1, lb)
            Y += Z.coeffs
        for la, lb, mat in plan.groups_r:
            Z = _apply_site_kernel_at(wrap(B), plan.pj, la)
            Z = _apply_site_kernel_at(Z, plan.pj + 1, lb)
            Y += np.tensordot(Z.coeffs, mat, axes=([last], [0]))
        for la, lb, LL, RR in plan.groups_d:
            T = _apply_site_kernel_at(wrap(B), plan.pj, la)
            T = _apply_site_kernel_at(T, plan.pj + 1, lb)
            dl, dr = plan.shape[0], plan.shape[-1]
            tmp = LL @ T.coeffs.reshape(dl, -1)
            tmp = tmp.reshape(LL.shape[0], -1, dr) @ RR
            Y += tmp.sum(axis=0).reshape(plan.shape)
        return Y.reshape(-1)[plan.even_idx]

    # -- window eigenproblem ---------------------------------------------

    def _ground(self, plan: _BondPlan, x0: np.ndarray) -> tuple[float, np.ndarray, int]:
        dim = x0.size
        if dim <= self.config.dense_cutoff:
            H = np.empty((dim, dim), dtype=np.complex128)
            eye = np.eye(dim, dtype=np.complex128)
            for i in range(dim):
                H[:, i] = self._apply_plan(plan, eye[:, i])
            w, v = np.linalg.eigh(0.5 * (H + H.conj().T))
            return float(w[0]), np.ascontiguousarray(v[:, 0]), dim

        tol = self.config.eig_tol
        v = x0 / np.linalg.norm(x0)
        basis = [v]
        alphas: list[float] = []
        betas: list[float] = []
        nmv = 0
        theta, ritz = 0.0, None
        for k in range(self.config.max_matvecs):
            w = self._apply_plan(plan, basis[k])
            nmv += 1
            a = float(np.real(np.vdot(basis[k], w)))
            alphas.append(a)
            w = w - a * basis[k]
            if k > 0:
                w = w - betas[k - 1] * basis[k - 1]
            vb = np.array(basis)
            for _ in range(2):
                w = w - vb.T @ (vb.conj() @ w)
            if k == 0:
                evals = np.array([alphas[0]])
                evecs = np.array([[1.0]])
            else:
                evals, evecs = scipy.linalg.eigh_tridiagonal(alphas, betas)
            theta = float(evals[0])
            ritz = evecs[:, 0]
            b = float(np.linalg.norm(w))
            resid = b * abs(ritz[-1])
            if resid <= tol * max(1.0, abs(theta)) or b < 1e-14:
                break
            betas.append(b)
            basis.append(w / b)
        y = np.array(basis).T @ ritz
        y = y / np.linalg.norm(y)
        return theta, y, nmv

    # -- disentangling ----------------------------------------------------

    def _disentangle(
        self, blob: GrassmannTensor, row_axes: tuple[int, ...], pj: int
    ) -> tuple[int, float, float, GrassmannTensor]:
        se, so = ga.gsvd_spectrum(blob, row_axes)
        base = entanglement_entropy(np.concatenate([se, so]))
        best_id, best_s, best_blob = 0, base, blob
        for gate in self.gates[1:]:
            cand = _apply_pair_tensor(blob, gate.tensor, pj)
            ce, co = ga.gsvd_spectrum(cand, row_axes)
            s = entanglement_entropy(np.concatenate([ce, co]))
            if s < best_s:
                best_id, best_s, best_blob = gate.gate_id, s, cand
        if base - best_s <= self.config.gate_threshold:
            return 0, base, base, blob
        return best_id, base, best_s, best_blob

    # -- bond update and sweeps -------------------------------------------

    def _update_bond(self, j: int, sweep: int, direction: str) -> tuple[float, int, float]:
        st = self.state
        left = st.sites[j]
        blob = ga.contract(left, (left.rank - 1,), st.sites[j + 1], (0,))
        row_axes = (0, 1) if j > 0 else (0,)
        pj = 1 if j > 0 else 0

        plan = self._build_plan(j, blob.legs)
        x0 = blob.coeffs.reshape(-1)[plan.even_idx]
        theta, y, nmv = self._ground(plan, x0)
        full = np.zeros(plan.size, dtype=np.complex128)
        full[plan.even_idx] = y
        blob = GrassmannTensor(blob.legs, full.reshape(plan.shape), 0)

        if self.gates is not None and sweep >= self.config.clifford_warmup:
            gate_id, s_before, s_after, blob = self._disentangle(blob, row_axes, pj)
            self.gate_log.append(GateLogEntry(sweep, j, gate_id, s_before, s_after))
            if gate_id != 0:
                self._conjugate_window(self.gates[gate_id], j)

        res = ga.gsvd(blob, row_axes, chi_max=self.config.chi_max, cutoff=self.config.cutoff)
        nrm = float(np.linalg.norm(res.S))
        res.S = res.S / nrm
        res.slot_values = res.slot_values / nrm
        if direction == "LR":
            st.sites[j] = res.U
            st.sites[j + 1] = res.sv()
            st.center = j + 1
        else:
            st.sites[j] = res.us()
            st.sites[j + 1] = res.V
            st.center = j
        return theta, nmv, res.discarded_weight

    def run(self) -> DMRGResult:
        n = self.n
        self.state.move_center(0)
        self.lcuts[0] = _CutEnvs(None, {})
        self._init_right_cuts()

        energies: list[float] = []
        records: list[HalfSweepRecord] = []
        for sweep in range(self.config.n_sweeps):
            for direction, bonds in (("LR", range(n - 1)), ("RL", range(n - 2, -1, -1))):
                theta = math.nan
                max_disc = 0.0
                nmv_total = 0
                for j in bonds:
                    theta, nmv, disc = self._update_bond(j, sweep, direction)
                    nmv_total += nmv
                    max_disc = max(max_disc, disc)
                    if direction == "LR":
                        self.lcuts[j + 1] = self._advance_left(self.lcuts[j], j)
                    elif j > 0:
                        self.rcuts[j + 1] = self._advance_right(self.rcuts[j + 2], j + 1)
                energies.append(theta)
                records.append(
                    HalfSweepRecord(sweep, direction, theta, max_disc, nmv_total)
                )
        return DMRGResult(
            state=self.state,
            hamiltonian=self.current_hamiltonian(),
            energies=np.array(energies),
            records=records,
            gate_log=self.gate_log,
        )


def run_dmrg(
    ham: pauli.Hamiltonian,
    config: SweepConfig,
    initial: GMPS | None = None,
    occupations=None,
) -> DMRGResult:
    """Optimize a ground state for a kernel-string Hamiltonian.

    The starting point is, in order of precedence: `initial` (copied),
    a product state with the given occupations, or the default
    even-parity half filling.
    """
    if initial is not None:
        state = initial.copy()
    else:
        occ = list(occupations) if occupations is not None else default_half_filling(ham.n_sites)
        state = GMPS.product_state(occ)
    return _Engine(ham, state, config).run()
