"""Kernel strings: dense conversion, Hermiticity rules, algebra."""

import numpy as np
import pytest

from cagmps import ed
from cagmps import grassmann as ga
from cagmps import pauli
from cagmps.models import build_tight_binding, build_tv


def _tensor_route_matrix(labels: str) -> np.ndarray:
    """Independent dense conversion through the tensor machinery.

    Site kernels are outer-multiplied in ascending order, the signature
    is sorted to (all conjugated, all plain ascending), and the result is
    exported with to_dense_matrix.  Limited to 4 sites by the dense
    export; used to validate the closed-form in pauli.string_matrix.
    """
    n = len(labels)
    t = pauli.site_kernel(labels[0])
    for ch in labels[1:]:
        t = ga.outer(t, pauli.site_kernel(ch))
    perm = tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2))
    tp = ga.sign_permute(t, perm)
    kernel = ga.to_dense_matrix(tp, tuple(range(n)))
    return kernel.T


def test_string_matrix_matches_tensor_route_two_sites():
    labels2 = [a + b for a in "IXYZ" for b in "IXYZ"]
    for labels in labels2:
        got = pauli.string_matrix(labels)
        want = _tensor_route_matrix(labels)
        assert np.abs(got - want).max() <= 1e-12, labels


def test_string_matrix_matches_tensor_route_longer():
    rng = np.random.default_rng(3)
    for n in (3, 4):
        for _ in range(25):
            labels = "".join(rng.choice(list("IXYZ"), size=n))
            got = pauli.string_matrix(labels)
            want = _tensor_route_matrix(labels)
            assert np.abs(got - want).max() <= 1e-12, labels


def test_single_site_action_is_kernel_transpose():
    for name, mat in pauli.PAULI_MATRICES.items():
        assert np.allclose(pauli.string_matrix(name), mat.T)


def test_diagonal_strings():
    assert np.allclose(pauli.string_matrix("ZZ"), np.diag([1, -1, -1, 1]))
    assert np.allclose(pauli.string_matrix("ZI"), np.diag([1, 1, -1, -1]))
    assert np.allclose(pauli.string_matrix("IZ"), np.diag([1, -1, 1, -1]))


def test_kernel_composition_product_rule():
    x = pauli.site_kernel("X")
    y = pauli.site_kernel("Y")
    prod = ga.contract(x, (1,), y, (0,))
    assert np.allclose(prod.coeffs, 1j * pauli.PAULI_MATRICES["Z"], atol=1e-12)


def test_hopping_pair_matches_quadratic_form():
    """(-it/2) XY + (it/2) YX is the bond term -t (c^+_1 c_2 + c^+_2 c_1)."""
    t = 1.7
    got = -0.5j * t * pauli.string_matrix("XY") + 0.5j * t * pauli.string_matrix("YX")
    c1, c2 = ed.annihilators(2)
    want = -t * (c1.conj().T @ c2 + c2.conj().T @ c1).toarray()
    assert np.abs(got - want).max() <= 1e-12


def test_number_operator_from_z():
    # n - 1/2 = -Z/2 per site
    c = ed.annihilators(1)[0]
    n_op = (c.conj().T @ c).toarray()
    assert np.allclose(-0.5 * pauli.string_matrix("Z"), n_op - 0.5 * np.eye(2))


@pytest.mark.parametrize("L", [2, 3, 4, 6, 8])
def test_dense_operator_matches_ed(L):
    h = build_tv(L, 1.0, 1.5)
    got = pauli.dense_operator(h)
    want = ed.dense_hamiltonian(L, 1.0, 1.5)
    assert np.abs(got - want).max() <= 1e-12


def test_dense_operator_hermitian():
    for L in (2, 4, 6):
        H = pauli.dense_operator(build_tv(L, 0.7, -0.9))
        assert np.abs(H - H.conj().T).max() <= 1e-12


def test_hamiltonian_rejects_non_hermitian_coefficients():
    with pytest.raises(ValueError):
        pauli.Hamiltonian(2, [pauli.PauliString(1.0, "XY")])  # needs imaginary coeff
    with pytest.raises(ValueError):
        pauli.Hamiltonian(2, [pauli.PauliString(0.5j, "ZZ")])  # needs real coeff


def test_hamiltonian_rejects_parity_odd_terms():
    with pytest.raises(ValueError):
        pauli.Hamiltonian(2, [pauli.PauliString(1.0, "XI")])


def test_hamiltonian_rejects_wrong_length():
    with pytest.raises(ValueError):
        pauli.Hamiltonian(3, [pauli.PauliString(1.0, "ZZ")])


def test_string_parity():
    assert pauli.string_parity("IZIZ") == 0
    assert pauli.string_parity("XYII") == 0
    assert pauli.string_parity("XIII") == 1
    assert pauli.string_parity("XYX I".replace(" ", "")) == 1


def test_model_term_counts():
    assert len(build_tv(8, 1.0, 2.0).terms) == 3 * 7
    assert len(build_tight_binding(8).terms) == 2 * 7
    assert len(build_tv(8, 1.0, 0.0).terms) == 2 * 7


def test_model_spec_build():
    from cagmps.models import ModelSpec

    spec = ModelSpec("tv", 4, t=1.0, V=2.0)
    H = pauli.dense_operator(spec.build())
    assert np.abs(H - ed.dense_hamiltonian(4, 1.0, 2.0)).max() <= 1e-12
    tb = ModelSpec("tight-binding", 4, t=1.0, V=5.0)  # V ignored for this model
    H2 = pauli.dense_operator(tb.build())
    assert np.abs(H2 - ed.dense_hamiltonian(4, 1.0, 0.0)).max() <= 1e-12
