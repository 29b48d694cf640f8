import numpy as np
import pytest

from retrocap import linalg as la


def test_kron_examples(rng):
    assert np.array_equal(la.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(la.kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]).astype(complex))
    a, b = la.random_hermitian(3, rng), la.random_hermitian(3, rng)
    assert np.trace(la.kron(a, b)) == pytest.approx(np.trace(a) * np.trace(b))


def test_kron_entry_layout(rng):
    a = rng.normal(size=(2, 3))
    b = rng.normal(size=(4, 5))
    k = la.kron(a, b)
    assert k[1 * 4 + 2, 2 * 5 + 3] == a[1, 2] * b[2, 3]


def test_kron_associative(rng):
    a, b, c = (la.random_hermitian(2, rng) for _ in range(3))
    assert np.max(np.abs(la.kron(la.kron(a, b), c) - la.kron(a, la.kron(b, c)))) <= 1e-14


def test_partial_trace_examples(rng):
    phi = la.max_entangled(2)
    assert np.allclose(la.partial_trace(phi, (2, 2), [1]), np.eye(2) / 2)
    a, b = la.random_hermitian(2, rng), la.random_hermitian(3, rng)
    assert np.allclose(la.partial_trace(la.kron(a, b), (2, 3), [0]), a * np.trace(b))
    m = la.random_hermitian(8, rng)
    for keep in ([0], [1, 2], [0, 2], []):
        assert np.trace(la.partial_trace(m, (2, 2, 2), keep)) == pytest.approx(np.trace(m))


def test_partial_trace_middle_system(rng):
    a, b, c = la.random_density(2, rng), la.random_density(3, rng), la.random_density(2, rng)
    assert np.allclose(la.partial_trace(la.kron(a, b, c), (2, 3, 2), [0, 2]), la.kron(a, c))


def test_partial_trace_dimension_mismatch():
    with pytest.raises(la.DimensionError):
        la.partial_trace(np.eye(4), (2, 3), [0])


def test_permute_systems_exact(rng):
    a, b, c = la.random_hermitian(2, rng), la.random_hermitian(3, rng), la.random_hermitian(4, rng)
    m = la.kron(a, b, c)
    # products of three factors are formed in a different order, hence rounding only
    assert np.max(np.abs(la.permute_systems(m, (2, 3, 4), (2, 0, 1)) - la.kron(c, a, b))) <= 1e-14


def test_regrouped_max_entangled():
    # Phi_{ABA'B'} equals Phi_{AA'} (x) Phi_{BB'} after regrouping
    joint = la.max_entangled(6)
    split = la.permute_systems(la.kron(la.max_entangled(2), la.max_entangled(3)), (2, 2, 3, 3), (0, 2, 1, 3))
    assert np.array_equal(joint, split)


def test_hermitian_eig_examples():
    w, _ = la.hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [3, 2, 1])
    w, _ = la.hermitian_eig(la.max_entangled(2))
    assert np.allclose(w, [1, 0, 0, 0], atol=1e-12)
    w, _ = la.hermitian_eig(np.array([[0, 1j], [-1j, 0]]))
    assert np.allclose(w, [1, -1])


@pytest.mark.parametrize("n", [1, 2, 5, 16, 64])
def test_hermitian_eig_reconstruction(rng, n):
    m = la.random_hermitian(n, rng)
    w, v = la.hermitian_eig(m)
    assert np.all(np.diff(w) <= 0)
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - m)) <= 1e-9
    assert np.max(np.abs(v.conj().T @ v - np.eye(n))) <= 1e-9
    assert w.sum() == pytest.approx(np.trace(m).real, abs=1e-9)
    assert np.allclose(w, np.linalg.eigvalsh(m)[::-1], atol=1e-9)


@pytest.mark.slow
def test_hermitian_eig_128(rng):
    m = la.random_hermitian(128, rng)
    w, v = la.hermitian_eig(m)
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - m)) <= 1e-9


def test_hermitian_eig_degenerate():
    w, v = la.hermitian_eig(np.eye(4) * 2.5)
    assert np.allclose(w, 2.5)
    w, v = la.hermitian_eig(np.zeros((3, 3)))
    assert np.allclose(w, 0)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        la.hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_canonical_operators():
    phi = la.canonical_operator("max_entangled", 2)
    expected = np.zeros((4, 4))
    expected[np.ix_([0, 3], [0, 3])] = 0.5
    assert np.array_equal(phi, expected)
    omega = la.canonical_operator("comparator", 3)
    assert np.trace(omega) == 3
    assert np.array_equal(omega @ omega, omega)
    assert np.allclose(la.canonical_operator("uniform", 3), np.eye(3) / 3)
    assert np.allclose(la.canonical_operator("classical_corr", 3), omega / 3)


def test_comparator_contraction(rng):
    d = 3
    eta = la.random_hermitian(d, rng)
    eta = eta / np.trace(eta)
    val = np.trace(la.comparator(d) @ la.kron(la.uniform(d), eta))
    assert val == pytest.approx(1 / d)


def test_canonical_operator_errors():
    with pytest.raises(ValueError):
        la.canonical_operator("max_entangled", 0)
    with pytest.raises(ValueError):
        la.canonical_operator("bell", 2)


def test_hermitian_basis_orthonormal():
    basis = la.hermitian_basis(3)
    assert len(basis) == 9
    gram = np.array([[np.vdot(a, b) for b in basis] for a in basis])
    assert np.allclose(gram, np.eye(9))
    assert all(la.is_hermitian(e) for e in basis)
