"""Tests for the graded matrix product state layer.

Everything is cross-checked against dense amplitudes: site-0-MSB
occupation vectors, kernel-string action matrices, and exact SVDs of
the dense state across each cut.
"""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cagmps import grassmann as ga
from cagmps import models, pauli
from cagmps.grassmann import Leg, ParityError
from cagmps.mps import (
    GMPS,
    entanglement_entropy,
    string_overlap,
    transfer_absorb_left,
    transfer_absorb_right,
    transfer_close_right,
)


def random_state(n, chi, rng):
    return GMPS.random_even(n, chi, rng)


# ----------------------------------------------------------------------
# product states


@pytest.mark.parametrize(
    "occ",
    [(1, 1), (0, 0), (1, 0, 1, 0), (1, 1, 0, 0, 1, 1), (0, 1, 1, 0, 0, 0)],
)
def test_product_state_places_single_amplitude(occ):
    s = GMPS.product_state(occ)
    v = s.dense_state()
    idx = int("".join(str(b) for b in occ), 2)
    expected = np.zeros(2 ** len(occ))
    expected[idx] = 1.0
    assert np.allclose(v, expected)
    assert abs(s.norm() - 1.0) < 1e-12


def test_product_state_rejects_odd_occupation():
    with pytest.raises(ParityError):
        GMPS.product_state([1, 0, 0, 0])


def test_product_state_occupation_expectations():
    occ = (1, 0, 0, 1, 1, 1)
    s = GMPS.product_state(occ)
    for a, o in enumerate(occ):
        lab = "".join("Z" if i == a else "I" for i in range(len(occ)))
        z = s.expectation_string(lab)
        assert abs((1 - z.real) / 2 - o) < 1e-12
        assert abs(z.imag) < 1e-12


# ----------------------------------------------------------------------
# random even states


def test_random_even_is_normalized_and_even():
    rng = np.random.default_rng(5)
    s = random_state(6, 8, rng)
    v = s.dense_state()
    assert abs(np.linalg.norm(v) - 1.0) < 1e-10
    par = np.array([bin(i).count("1") & 1 for i in range(v.size)])
    assert np.abs(v[par == 1]).max() == 0.0
    assert s.max_bond_dimension() <= 8


def test_random_even_respects_bond_cap():
    rng = np.random.default_rng(6)
    s = random_state(10, 4, rng)
    assert s.max_bond_dimension() <= 4


# ----------------------------------------------------------------------
# transfer contractions vs dense oracles


def test_string_overlap_matches_dense_action():
    rng = np.random.default_rng(42)
    worst = 0.0
    for n in (2, 3, 4, 5):
        bra = random_state(n, 8, rng)
        ket = random_state(n, 8, rng)
        vb, vk = bra.dense_state(), ket.dense_state()
        strings = set()
        for labs in itertools.product("IXYZ", repeat=min(n, 2)):
            for pos in itertools.combinations(range(n), len(labs)):
                s = ["I"] * n
                for p, l in zip(pos, labs):
                    s[p] = l
                strings.add("".join(s))
        for _ in range(30):
            strings.add("".join(rng.choice(list("IXYZ"), size=n)))
        for lab in sorted(strings):
            got = string_overlap(bra, ket, lab)
            want = np.vdot(vb, pauli.string_matrix(lab) @ vk)
            worst = max(worst, abs(got - want))
    assert worst < 1e-12


def test_right_transfer_agrees_with_left():
    rng = np.random.default_rng(11)
    for n in (2, 3, 5):
        bra = random_state(n, 8, rng)
        ket = random_state(n, 8, rng)
        for _ in range(15):
            lab = "".join(rng.choice(list("IXYZ"), size=n))
            lval = string_overlap(bra, ket, lab)
            env = None
            for a in range(n - 1, 0, -1):
                env = transfer_absorb_right(env, ket.sites[a], bra.sites[a], lab[a])
            rval = transfer_close_right(env, ket.sites[0], bra.sites[0], lab[0])
            assert abs(lval - rval) < 1e-12


def test_expectation_matches_dense_operator():
    rng = np.random.default_rng(9)
    for n in (3, 4, 6):
        s = random_state(n, 8, rng)
        h = models.build_tv(n, 1.0, 1.7)
        got = s.expectation(h)
        v = s.dense_state()
        want = np.vdot(v, pauli.dense_operator(h) @ v) / np.vdot(v, v)
        assert abs(got - want) < 1e-10
        assert abs(got.imag) < 1e-10


def test_canonical_half_chain_transfers_are_identity():
    rng = np.random.default_rng(3)
    s = random_state(6, 8, rng)
    s.move_center(3)
    env = None
    for a in range(3):
        env = transfer_absorb_left(env, s.sites[a], s.sites[a])
    assert np.abs(env.coeffs - np.eye(env.legs[0].dimension)).max() < 1e-12
    env = None
    for a in range(5, 3, -1):
        env = transfer_absorb_right(env, s.sites[a], s.sites[a])
    assert np.abs(env.coeffs - np.eye(env.legs[0].dimension)).max() < 1e-12


def test_window_vdot_equals_embedded_overlap():
    rng = np.random.default_rng(17)

    def embed_dense(state, j, blob):
        acc = None
        for a in range(state.n_sites):
            if a == j:
                t = blob
            elif a == j + 1:
                continue
            else:
                t = state.sites[a]
            acc = t if acc is None else ga.contract(acc, (acc.rank - 1,), t, (0,))
        return acc.coeffs.reshape(-1)

    for j in (0, 2, 4):
        st = random_state(6, 8, rng)
        st.move_center(j)
        base = ga.contract(st.sites[j], (st.sites[j].rank - 1,), st.sites[j + 1], (0,))

        def rand_window():
            arr = rng.standard_normal(base.coeffs.shape) + 1j * rng.standard_normal(
                base.coeffs.shape
            )
            return ga.tensor(base.legs, np.where(ga.even_mask(base.legs), arr, 0))

        x, y = rand_window(), rand_window()
        want = np.vdot(embed_dense(st, j, x), embed_dense(st, j, y))
        got = np.vdot(x.coeffs, y.coeffs)
        assert abs(want - got) < 1e-12


# ----------------------------------------------------------------------
# canonical moves, spectra, entropies


def test_move_center_preserves_state_and_normalizes_center():
    rng = np.random.default_rng(3)
    s = random_state(6, 8, rng)
    v0 = s.dense_state()
    for to in (5, 2, 0, 4, 1):
        s.move_center(to)
        assert s.center == to
        assert np.abs(s.dense_state() - v0).max() < 1e-12
        assert abs(np.linalg.norm(s.sites[to].coeffs) - 1.0) < 1e-12


def test_canonical_sites_are_isometries_on_populated_slots():
    rng = np.random.default_rng(8)
    s = random_state(7, 8, rng)
    s.move_center(4)
    for a in range(4):
        t = s.sites[a]
        m = t.coeffs.reshape(-1, t.legs[-1].dimension)
        g = m.conj().T @ m
        assert np.abs(g - np.diag(np.diag(g))).max() < 1e-12
        assert np.abs(g @ g - g).max() < 1e-12
    for a in range(5, 7):
        t = s.sites[a]
        m = t.coeffs.reshape(t.legs[0].dimension, -1)
        g = m @ m.conj().T
        assert np.abs(g - np.diag(np.diag(g))).max() < 1e-12
        assert np.abs(g @ g - g).max() < 1e-12


def test_schmidt_spectra_match_dense_svd():
    rng = np.random.default_rng(3)
    s = random_state(6, 8, rng)
    v = s.dense_state()
    spectra = s.schmidt_spectra()
    for b in range(5):
        sv = np.linalg.svd(v.reshape(2 ** (b + 1), -1), compute_uv=False)
        sv = sv[sv > 1e-12]
        got = np.sort(spectra[b][spectra[b] > 1e-12])[::-1]
        assert got.size == sv.size
        assert np.abs(got - sv).max() < 1e-10
    # schmidt_spectra works on a copy and must not disturb the state
    assert np.abs(s.dense_state() - v).max() < 1e-12


def test_entropy_helper_known_values():
    assert entanglement_entropy(np.array([1.0])) == 0.0
    assert abs(entanglement_entropy(np.array([1.0, 1.0])) - np.log(2)) < 1e-14
    # scale invariance
    assert abs(
        entanglement_entropy(np.array([0.3, 0.1]))
        - entanglement_entropy(np.array([3.0, 1.0]))
    ) < 1e-14


def test_bond_entropies_of_product_state_vanish():
    s = GMPS.product_state((1, 0, 1, 0, 1, 1))
    assert np.abs(s.bond_entropies()).max() < 1e-12


# ----------------------------------------------------------------------
# guards


def test_dense_state_site_limit():
    s = GMPS.product_state([0] * 18)
    with pytest.raises(ValueError):
        s.dense_state()


def test_constructor_validation():
    s = GMPS.product_state((1, 1, 0, 0))
    with pytest.raises(ValueError):
        GMPS(s.sites, center=7)
    bad = [t.copy() for t in s.sites]
    arr = np.zeros_like(bad[1].coeffs)
    arr[0, 1, 0] = 1.0  # parity-odd element
    bad[1] = ga.tensor(bad[1].legs, arr)
    with pytest.raises(ParityError):
        GMPS(bad, center=0)


@settings(max_examples=40, deadline=None)
@given(
    bits=st.lists(st.integers(0, 1), min_size=2, max_size=7),
)
def test_product_state_dense_index_property(bits):
    if sum(bits) % 2 == 1:
        bits = list(bits)
        bits[bits.index(1)] = 0
    s = GMPS.product_state(bits)
    v = s.dense_state()
    idx = int("".join(str(b) for b in bits), 2)
    assert abs(v[idx] - 1.0) < 1e-12
    assert np.abs(np.delete(v, idx)).max() < 1e-12
