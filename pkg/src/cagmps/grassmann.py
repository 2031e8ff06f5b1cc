"""Dense Grassmann tensors over composite indices.

A Grassmann tensor carries one composite index per leg.  A leg with g
generators has dimension 2**g and its composite index I encodes the
exponent of generator theta_k in bit k.  The tensor represents

    T = sum_{I1..Im} T[I1, .., Im] * mono_1(I1) * ... * mono_m(Im)

where the monomial of a non-conjugated leg is the ascending product
theta_1^{i_1} ... theta_g^{i_g} and the monomial of a conjugated leg is
the descending product theta_g^{+ i_g} ... theta_1^{+ i_1}.  With these
orderings the Gaussian-weighted Berezin pairing of a dual pair of legs
is the plain Kronecker delta, so contraction signs reduce to monomial
reordering signs.

Conventions fixed here and relied on everywhere else:

* Reordering two adjacent monomials of parities p and q costs (-1)**(p*q).
* ``contract(a, axes_a, b, axes_b)`` arranges the contracted legs into a
  nested form: a's contracted legs are moved to the end in pair order,
  b's to the front in reversed pair order.  Innermost pairs integrate
  first; a pair whose a-side leg is conjugated picks up (-1)**parity(I)
  per contracted index I.
* ``join_legs`` merges adjacent same-type legs; the first group member
  occupies the lowest bits of the joined index.  Non-conjugated groups
  join without signs; conjugated groups pick up (-1)**C(s,2) where s is
  the number of odd member indices (block-reversal of the descending
  monomials).
* ``conj`` reverses the signature, flips conjugation flags and complex
  conjugates; no signs appear because the formal dagger of an ascending
  monomial is exactly the canonical descending conjugated monomial.
* ``to_dense_matrix`` maps monomials to occupation basis states with the
  first leg's generators as the most significant bits, so a chain state
  |i_0 i_1 ... > has i_0 as the leading bit.
"""

from __future__ import annotations

import dataclasses
import math
from functools import lru_cache

import numpy as np

__all__ = [
    "Leg",
    "GrassmannTensor",
    "SplitPlan",
    "GSVDResult",
    "LegMismatchError",
    "ParityError",
    "parity_vector",
    "total_parity",
    "even_mask",
    "tensor",
    "zeros_like_even",
    "sign_permute",
    "contract",
    "outer",
    "join_legs",
    "split_legs",
    "conj",
    "inner",
    "norm",
    "gsvd",
    "to_dense_matrix",
]


class LegMismatchError(ValueError):
    """Raised when legs disagree in generator count or conjugation."""


class ParityError(ValueError):
    """Raised when an operation requires parity structure the tensor lacks."""


@dataclasses.dataclass(frozen=True)
class Leg:
    """One tensor leg: a generator count and a conjugation flag."""

    generators: int
    conjugated: bool

    def __post_init__(self):
        if self.generators < 1:
            raise ValueError(f"leg needs at least one generator, got {self.generators}")

    @property
    def dimension(self) -> int:
        return 1 << self.generators

    def dual(self) -> "Leg":
        return Leg(self.generators, not self.conjugated)


@lru_cache(maxsize=None)
def parity_vector(generators: int) -> np.ndarray:
    """Parity (popcount mod 2) of every composite index of a g-generator leg."""
    idx = np.arange(1 << generators, dtype=np.uint32)
    return (np.bitwise_count(idx) & 1).astype(np.uint8)


@lru_cache(maxsize=4096)
def _total_parity_cached(gens: tuple[int, ...]) -> np.ndarray:
    total = np.zeros(tuple(1 << g for g in gens), dtype=np.uint8)
    n = len(gens)
    for ax, g in enumerate(gens):
        shape = [1] * n
        shape[ax] = -1
        total = total ^ parity_vector(g).reshape(shape)
    total.setflags(write=False)
    return total


def total_parity(legs: tuple[Leg, ...]) -> np.ndarray:
    """Elementwise total parity (0/1) over all legs, shaped like the tensor."""
    return _total_parity_cached(tuple(l.generators for l in legs))


def even_mask(legs: tuple[Leg, ...]) -> np.ndarray:
    return total_parity(legs) == 0


@dataclasses.dataclass
class GrassmannTensor:
    """Coefficient array plus leg metadata.

    parity is 0 (all monomials even), 1 (all odd) or None (mixed or not
    tracked).  Operations propagate it when both operands are
    homogeneous.
    """

    legs: tuple[Leg, ...]
    coeffs: np.ndarray
    parity: int | None = None

    def __post_init__(self):
        self.legs = tuple(self.legs)
        expected = tuple(l.dimension for l in self.legs)
        if self.coeffs.shape != expected:
            raise LegMismatchError(
                f"coefficient shape {self.coeffs.shape} does not match legs {expected}"
            )

    @property
    def rank(self) -> int:
        return len(self.legs)

    @property
    def even(self) -> bool:
        return self.parity == 0

    def detect_parity(self, tol: float = 0.0) -> int | None:
        """Inspect coefficients and return 0, 1 or None (mixed)."""
        par = total_parity(self.legs)
        odd_w = np.abs(self.coeffs[par == 1]).max(initial=0.0)
        even_w = np.abs(self.coeffs[par == 0]).max(initial=0.0)
        if odd_w <= tol:
            return 0
        if even_w <= tol:
            return 1
        return None

    def check_parity(self, tol: float = 1e-12):
        """Verify the declared parity against the coefficients."""
        if self.parity is None:
            return
        scale = max(1.0, np.abs(self.coeffs).max(initial=0.0))
        par = total_parity(self.legs)
        bad = np.abs(self.coeffs[par == (1 - self.parity)]).max(initial=0.0)
        if bad > tol * scale:
            raise ParityError(
                f"tensor declared parity {self.parity} but carries weight {bad:g} "
                "on the opposite sector"
            )

    def copy(self) -> "GrassmannTensor":
        return GrassmannTensor(self.legs, self.coeffs.copy(), self.parity)

    def __mul__(self, scalar: complex) -> "GrassmannTensor":
        return GrassmannTensor(self.legs, self.coeffs * scalar, self.parity)

    __rmul__ = __mul__

    def __add__(self, other: "GrassmannTensor") -> "GrassmannTensor":
        if self.legs != other.legs:
            raise LegMismatchError("cannot add tensors with different signatures")
        par = self.parity if self.parity == other.parity else None
        return GrassmannTensor(self.legs, self.coeffs + other.coeffs, par)

    def __sub__(self, other: "GrassmannTensor") -> "GrassmannTensor":
        return self + (other * (-1.0))


def tensor(legs, coeffs, parity="detect") -> GrassmannTensor:
    """Build a tensor; parity='detect' inspects the coefficients."""
    legs = tuple(legs)
    arr = np.asarray(coeffs, dtype=np.complex128)
    t = GrassmannTensor(legs, arr, None)
    if parity == "detect":
        t.parity = t.detect_parity()
    else:
        t.parity = parity
        t.check_parity()
    return t


def zeros_like_even(legs) -> GrassmannTensor:
    legs = tuple(legs)
    shape = tuple(l.dimension for l in legs)
    return GrassmannTensor(legs, np.zeros(shape, dtype=np.complex128), 0)


@lru_cache(maxsize=1024)
def _permutation_sign_array(gens: tuple[int, ...], perm: tuple[int, ...]):
    """Sign array (in the permuted layout) for reordering legs by perm.

    Crossing pairs of odd monomials each contribute a factor -1; the
    array multiplies the transposed coefficients.  Returns None when no
    crossing can produce a sign.
    """
    n = len(perm)
    crossings = [
        (k, l) for k in range(n) for l in range(k + 1, n) if perm[k] > perm[l]
    ]
    if not crossings:
        return None
    shape = tuple(1 << gens[p] for p in perm)
    acc = np.zeros(shape, dtype=np.uint8)
    for k, l in crossings:
        sk = [1] * n
        sk[k] = -1
        sl = [1] * n
        sl[l] = -1
        pk = parity_vector(gens[perm[k]]).reshape(sk)
        pl = parity_vector(gens[perm[l]]).reshape(sl)
        acc = acc ^ (pk & pl)
    signs = np.where(acc, -1.0, 1.0)
    signs.setflags(write=False)
    return signs


def sign_permute(t: GrassmannTensor, perm) -> GrassmannTensor:
    """Reorder legs by perm (new position k holds old leg perm[k])."""
    perm = tuple(perm)
    if sorted(perm) != list(range(t.rank)):
        raise ValueError(f"invalid permutation {perm} for rank {t.rank}")
    if perm == tuple(range(t.rank)):
        return t
    gens = tuple(l.generators for l in t.legs)
    signs = _permutation_sign_array(gens, perm)
    arr = t.coeffs.transpose(perm)
    if signs is not None:
        arr = arr * signs
    else:
        arr = arr.copy()
    return GrassmannTensor(tuple(t.legs[p] for p in perm), arr, t.parity)


def _as_axis_tuple(axes) -> tuple[int, ...]:
    if isinstance(axes, (int, np.integer)):
        return (int(axes),)
    return tuple(int(a) for a in axes)


def contract(a: GrassmannTensor, axes_a, b: GrassmannTensor, axes_b) -> GrassmannTensor:
    """Berezin-contract dual leg pairs of two tensors.

    Each pair must consist of one conjugated and one non-conjugated leg
    with equal generator counts.  Result legs are a's remaining legs
    followed by b's remaining legs, in their original orders.
    """
    axes_a = _as_axis_tuple(axes_a)
    axes_b = _as_axis_tuple(axes_b)
    if len(axes_a) != len(axes_b):
        raise ValueError("axes_a and axes_b must pair up")
    if len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise ValueError("repeated contraction axis")
    for ia, ib in zip(axes_a, axes_b):
        la, lb = a.legs[ia], b.legs[ib]
        if la.generators != lb.generators:
            raise LegMismatchError(
                f"contracted legs disagree: {la.generators} vs {lb.generators} generators"
            )
        if la.conjugated == lb.conjugated:
            raise LegMismatchError("contracted legs must be a dual pair")

    k = len(axes_a)
    rest_a = [i for i in range(a.rank) if i not in axes_a]
    rest_b = [i for i in range(b.rank) if i not in axes_b]

    ap = sign_permute(a, tuple(rest_a) + axes_a)
    bp = sign_permute(b, tuple(reversed(axes_b)) + tuple(rest_b))

    arr_a = ap.coeffs
    # A conjugated a-side leg meets its partner in swapped orientation and
    # pays (-1)**parity per contracted index.
    for t_idx, ia in enumerate(axes_a):
        if a.legs[ia].conjugated:
            g = a.legs[ia].generators
            sgn = 1.0 - 2.0 * parity_vector(g).astype(np.float64)
            shape = [1] * a.rank
            shape[len(rest_a) + t_idx] = -1
            arr_a = arr_a * sgn.reshape(shape)

    axes_left = list(range(len(rest_a), len(rest_a) + k))
    axes_right = [k - 1 - t for t in range(k)]
    out = np.tensordot(arr_a, bp.coeffs, axes=(axes_left, axes_right))

    legs = tuple(a.legs[i] for i in rest_a) + tuple(b.legs[i] for i in rest_b)
    par = None
    if a.parity is not None and b.parity is not None:
        par = (a.parity + b.parity) % 2
    if not legs:
        return GrassmannTensor((), out.reshape(()), par) if out.shape == () else GrassmannTensor((), out, par)
    return GrassmannTensor(legs, np.ascontiguousarray(out), par)


def outer(a: GrassmannTensor, b: GrassmannTensor) -> GrassmannTensor:
    """Grassmann product: concatenated signatures, outer coefficients."""
    arr = np.multiply.outer(a.coeffs, b.coeffs)
    par = None
    if a.parity is not None and b.parity is not None:
        par = (a.parity + b.parity) % 2
    return GrassmannTensor(a.legs + b.legs, arr, par)


@dataclasses.dataclass(frozen=True)
class SplitPlan:
    """Inverse data for join_legs: member generator counts per joined leg."""

    groups: tuple[tuple[int, ...], ...]
    conjugations: tuple[bool, ...]


@lru_cache(maxsize=1024)
def _conj_join_signs(member_gens: tuple[int, ...]) -> np.ndarray:
    """Block-reversal signs for joining conjugated legs, per joined index."""
    total_g = sum(member_gens)
    idx = np.arange(1 << total_g, dtype=np.uint64)
    odd_members = np.zeros(idx.shape, dtype=np.int64)
    offset = 0
    for g in member_gens:
        field = (idx >> np.uint64(offset)) & np.uint64((1 << g) - 1)
        odd_members += (np.bitwise_count(field) & 1).astype(np.int64)
        offset += g
    pairs = odd_members * (odd_members - 1) // 2
    signs = np.where(pairs & 1, -1.0, 1.0)
    signs.setflags(write=False)
    return signs


def join_legs(t: GrassmannTensor, groups) -> tuple[GrassmannTensor, SplitPlan]:
    """Merge contiguous groups of same-type legs into composite legs.

    groups must partition positions 0..rank-1 in ascending order.  The
    first member of each group lands in the lowest bits of the joined
    index.
    """
    groups = [tuple(g) for g in groups]
    flat = [p for g in groups for p in g]
    if flat != list(range(t.rank)):
        raise ValueError(f"groups {groups} do not partition legs in order")
    for g in groups:
        kinds = {t.legs[p].conjugated for p in g}
        if len(kinds) != 1:
            raise LegMismatchError("cannot join conjugated with non-conjugated legs")

    # Mechanical index relabeling: reverse axes inside each group so a
    # C-order reshape leaves member 0 in the low bits.
    order = [p for g in groups for p in reversed(g)]
    arr = t.coeffs.transpose(order)
    new_legs = []
    new_shape = []
    for g in groups:
        gsum = sum(t.legs[p].generators for p in g)
        new_legs.append(Leg(gsum, t.legs[g[0]].conjugated))
        new_shape.append(1 << gsum)
    arr = arr.reshape(new_shape).copy()

    for ax, g in enumerate(groups):
        if len(g) > 1 and t.legs[g[0]].conjugated:
            member_gens = tuple(t.legs[p].generators for p in g)
            sgn = _conj_join_signs(member_gens)
            shape = [1] * len(groups)
            shape[ax] = -1
            arr *= sgn.reshape(shape)

    plan = SplitPlan(
        tuple(tuple(t.legs[p].generators for p in g) for g in groups),
        tuple(t.legs[g[0]].conjugated for g in groups),
    )
    return GrassmannTensor(tuple(new_legs), arr, t.parity), plan


def split_legs(t: GrassmannTensor, plan: SplitPlan) -> GrassmannTensor:
    """Exact inverse of join_legs under the same plan."""
    if t.rank != len(plan.groups):
        raise LegMismatchError("plan does not match tensor rank")
    for ax, (gens, conj) in enumerate(zip(plan.groups, plan.conjugations)):
        if t.legs[ax].generators != sum(gens) or t.legs[ax].conjugated != conj:
            raise LegMismatchError(f"plan group {ax} does not match leg {t.legs[ax]}")

    arr = t.coeffs
    for ax, (gens, conj) in enumerate(zip(plan.groups, plan.conjugations)):
        if len(gens) > 1 and conj:
            sgn = _conj_join_signs(tuple(gens))
            shape = [1] * t.rank
            shape[ax] = -1
            arr = arr * sgn.reshape(shape)

    split_shape = []
    order = []
    pos = 0
    for gens in plan.groups:
        split_shape.extend(1 << g for g in reversed(gens))
        order.extend(range(pos + len(gens) - 1, pos - 1, -1))
        pos += len(gens)
    arr = arr.reshape(split_shape).transpose(order)

    legs = []
    for gens, conj in zip(plan.groups, plan.conjugations):
        legs.extend(Leg(g, conj) for g in gens)
    return GrassmannTensor(tuple(legs), np.ascontiguousarray(arr), t.parity)


def conj(t: GrassmannTensor) -> GrassmannTensor:
    """Formal dagger: reversed signature, flipped flags, conjugated values."""
    legs = tuple(l.dual() for l in reversed(t.legs))
    arr = np.ascontiguousarray(np.conj(t.coeffs).transpose(tuple(reversed(range(t.rank)))))
    return GrassmannTensor(legs, arr, t.parity)


def inner(a: GrassmannTensor, b: GrassmannTensor) -> complex:
    """Coefficient inner product <a|b> of same-signature tensors.

    For all-non-conjugated signatures this equals the Berezin overlap,
    i.e. the full contraction of b against conj(a) taken with b as the
    left factor, where the pairing nests and no signs survive.  The same
    positive-definite form is used as the algorithmic inner product for
    mixed signatures (eigensolvers, orthonormality checks); there it
    matches the state overlap whenever the surrounding environment
    tensors are isometric.
    """
    if a.legs != b.legs:
        raise LegMismatchError("inner product needs identical signatures")
    return complex(np.vdot(a.coeffs, b.coeffs))


def norm(t: GrassmannTensor) -> float:
    return float(np.linalg.norm(t.coeffs))


@lru_cache(maxsize=None)
def _parity_slots(generators: int) -> tuple[np.ndarray, np.ndarray]:
    """Ascending even and odd composite indices of a g-generator leg."""
    par = parity_vector(generators)
    ev = np.nonzero(par == 0)[0]
    od = np.nonzero(par == 1)[0]
    return ev, od


@dataclasses.dataclass
class GSVDResult:
    """Parity-blocked SVD factors.

    U carries the row legs plus a new non-conjugated bond leg; V carries
    the dual bond leg plus the column legs.  slot_values holds the
    singular value assigned to each bond slot (zero on unused slots); S
    is the kept spectrum in descending order.
    """

    U: GrassmannTensor
    S: np.ndarray
    V: GrassmannTensor
    slot_values: np.ndarray
    k_even: int
    k_odd: int
    discarded_weight: float

    @property
    def bond_leg(self) -> Leg:
        return self.U.legs[-1]

    def sv(self) -> GrassmannTensor:
        """diag(S) absorbed into V along the bond leg."""
        shape = [1] * self.V.rank
        shape[0] = -1
        return GrassmannTensor(
            self.V.legs, self.V.coeffs * self.slot_values.reshape(shape), self.V.parity
        )

    def us(self) -> GrassmannTensor:
        """diag(S) absorbed into U along the bond leg."""
        shape = [1] * self.U.rank
        shape[-1] = -1
        return GrassmannTensor(
            self.U.legs, self.U.coeffs * self.slot_values.reshape(shape), self.U.parity
        )


def _blocked_svd(mat: np.ndarray):
    try:
        return np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError:
        import scipy.linalg

        return scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesvd")


def gsvd(
    t: GrassmannTensor,
    row_axes,
    chi_max: int | None = None,
    cutoff: float = 1e-14,
) -> GSVDResult:
    """Singular value decomposition of an even tensor across a leg bipartition.

    The tensor is matricized with row_axes (in the given order) against
    the remaining legs and decomposed inside the even and odd parity
    blocks.  Kept values are the merged descending spectrum cut at
    chi_max and at cutoff * max(S).  The bond leg is the smallest one
    whose per-parity capacity 2^(g-1) holds the larger kept class, so a
    skewed spectrum pads the other parity with zero slots rather than
    forcing a truncation.  Unused bond slots stay zero.
    """
    row_axes = _as_axis_tuple(row_axes)
    col_axes = tuple(i for i in range(t.rank) if i not in row_axes)
    if not row_axes or not col_axes:
        raise ValueError("both sides of the bipartition must be non-empty")
    if t.parity != 0:
        raise ParityError("gsvd requires an even tensor")

    tp = sign_permute(t, row_axes + col_axes)
    nr = len(row_axes)
    row_legs = tp.legs[:nr]
    col_legs = tp.legs[nr:]
    rdim = int(np.prod([l.dimension for l in row_legs]))
    cdim = int(np.prod([l.dimension for l in col_legs]))
    mat = tp.coeffs.reshape(rdim, cdim)

    pr = total_parity(row_legs).reshape(-1)
    pc = total_parity(col_legs).reshape(-1)
    rows_e = np.nonzero(pr == 0)[0]
    rows_o = np.nonzero(pr == 1)[0]
    cols_e = np.nonzero(pc == 0)[0]
    cols_o = np.nonzero(pc == 1)[0]

    scale = np.abs(mat).max(initial=0.0)
    if scale == 0.0:
        raise ValueError("cannot decompose a zero tensor")
    off = 0.0
    if rows_e.size and cols_o.size:
        off = max(off, np.abs(mat[np.ix_(rows_e, cols_o)]).max(initial=0.0))
    if rows_o.size and cols_e.size:
        off = max(off, np.abs(mat[np.ix_(rows_o, cols_e)]).max(initial=0.0))
    if off > 1e-10 * scale:
        raise ParityError(f"even tensor carries odd-block weight {off:g}")

    ue, se, ve = _blocked_svd(mat[np.ix_(rows_e, cols_e)]) if rows_e.size and cols_e.size else (
        np.zeros((rows_e.size, 0)), np.zeros(0), np.zeros((0, cols_e.size)))
    uo, so, vo = _blocked_svd(mat[np.ix_(rows_o, cols_o)]) if rows_o.size and cols_o.size else (
        np.zeros((rows_o.size, 0)), np.zeros(0), np.zeros((0, cols_o.size)))

    smax = max(se.max(initial=0.0), so.max(initial=0.0))
    thresh = cutoff * smax
    avail_e = int(np.sum(se > thresh))
    avail_o = int(np.sum(so > thresh))
    if avail_e + avail_o == 0:
        avail_e = 1 if se.size and (not so.size or se[0] >= so[0]) else 0
        avail_o = 1 - avail_e

    budget = avail_e + avail_o if chi_max is None else min(chi_max, avail_e + avail_o)
    budget = max(budget, 1)
    merged = np.concatenate([se[:avail_e], so[:avail_o]])
    order = np.argsort(-merged, kind="stable")
    kept = order[:budget]
    k_e = int(np.sum(kept < avail_e))
    k_o = budget - k_e

    # the bond leg splits its 2^g slots evenly between parities, so it must
    # be sized by the larger class, not the total; a skewed spectrum (the
    # normal outcome of a good disentangling gate) then simply leaves the
    # other parity's slots empty
    g = 1 + max(0, math.ceil(math.log2(max(k_e, k_o, 1))))

    bond = Leg(g, False)
    ev_slots, od_slots = _parity_slots(g)
    slot_values = np.zeros(bond.dimension)
    slot_values[ev_slots[:k_e]] = se[:k_e]
    slot_values[od_slots[:k_o]] = so[:k_o]

    Ufull = np.zeros((rdim, bond.dimension), dtype=np.complex128)
    Vfull = np.zeros((bond.dimension, cdim), dtype=np.complex128)
    if k_e:
        Ufull[np.ix_(rows_e, ev_slots[:k_e])] = ue[:, :k_e]
        Vfull[np.ix_(ev_slots[:k_e], cols_e)] = ve[:k_e, :]
    if k_o:
        Ufull[np.ix_(rows_o, od_slots[:k_o])] = uo[:, :k_o]
        Vfull[np.ix_(od_slots[:k_o], cols_o)] = vo[:k_o, :]

    U = GrassmannTensor(
        row_legs + (bond,), Ufull.reshape([l.dimension for l in row_legs] + [bond.dimension]), 0
    )
    V = GrassmannTensor(
        (bond.dual(),) + col_legs, Vfull.reshape([bond.dimension] + [l.dimension for l in col_legs]), 0
    )

    disc = float(np.sum(se[k_e:] ** 2) + np.sum(so[k_o:] ** 2))
    S = np.sort(np.concatenate([se[:k_e], so[:k_o]]))[::-1]
    return GSVDResult(U, S, V, slot_values, k_e, k_o, disc)


def gsvd_spectrum(t: GrassmannTensor, row_axes) -> tuple[np.ndarray, np.ndarray]:
    """Per-parity-block singular values of the gsvd matricization.

    Cheaper than gsvd when only the spectrum is needed (entropy scans,
    gate searches); returns (even_values, odd_values), each descending.
    """
    row_axes = _as_axis_tuple(row_axes)
    col_axes = tuple(i for i in range(t.rank) if i not in row_axes)
    if not row_axes or not col_axes:
        raise ValueError("both sides of the bipartition must be non-empty")
    if t.parity != 0:
        raise ParityError("gsvd_spectrum requires an even tensor")
    tp = sign_permute(t, row_axes + col_axes)
    nr = len(row_axes)
    rdim = int(np.prod([l.dimension for l in tp.legs[:nr]]))
    mat = tp.coeffs.reshape(rdim, -1)
    pr = total_parity(tp.legs[:nr]).reshape(-1)
    pc = total_parity(tp.legs[nr:]).reshape(-1)
    out = []
    for par in (0, 1):
        block = mat[np.ix_(np.nonzero(pr == par)[0], np.nonzero(pc == par)[0])]
        if block.size == 0:
            out.append(np.zeros(0))
            continue
        out.append(np.linalg.svd(block, compute_uv=False))
    return out[0], out[1]


def _bit_reverse_perm(total_bits: int, field_bits) -> np.ndarray:
    """Index permutation from low-bit-first fields to first-field-most-significant."""
    field_bits = list(field_bits)
    out = np.zeros(1 << total_bits, dtype=np.int64)
    for idx in range(1 << total_bits):
        val = 0
        pos = 0
        shift = total_bits
        for g in field_bits:
            field = (idx >> pos) & ((1 << g) - 1)
            shift -= g
            val |= field << shift
            pos += g
        out[idx] = val
    return out


def to_dense_matrix(t: GrassmannTensor, row_axes) -> np.ndarray:
    """Operator-form dense matrix under the documented basis isomorphism.

    row_axes must list all conjugated legs and the remaining legs must
    all be non-conjugated.  Both sides are joined (first leg in the low
    bits) and re-indexed so that the first leg of each side supplies the
    most significant bit of the basis index.
    """
    row_axes = _as_axis_tuple(row_axes)
    col_axes = tuple(i for i in range(t.rank) if i not in row_axes)
    for i in row_axes:
        if not t.legs[i].conjugated:
            raise LegMismatchError("row legs must be conjugated")
    for i in col_axes:
        if t.legs[i].conjugated:
            raise LegMismatchError("column legs must be non-conjugated")
    total = sum(l.generators for l in t.legs)
    if total > 8:
        raise ValueError(f"dense conversion limited to 8 generators, got {total}")

    tp = sign_permute(t, row_axes + col_axes)
    nr = len(row_axes)
    joined, _ = join_legs(tp, [list(range(nr)), list(range(nr, t.rank))])
    mat = joined.coeffs

    rperm = _bit_reverse_perm(joined.legs[0].generators,
                              [t.legs[i].generators for i in row_axes])
    cperm = _bit_reverse_perm(joined.legs[1].generators,
                              [t.legs[i].generators for i in col_axes])
    out = np.empty_like(mat)
    out[rperm[:, None], cperm[None, :]] = mat
    return out
