import json

import numpy as np
import pytest

from retrocap import channels as ch
from retrocap import linalg as la


def direct_apply(kraus, x):
    return sum(k @ x @ k.conj().T for k in kraus)


def test_from_kraus_identity():
    n = ch.from_kraus([np.eye(2)])
    assert np.allclose(n.choi, la.max_entangled(2))
    assert n.is_channel


def test_from_kraus_reset_is_full_damping():
    reset = ch.from_kraus([np.array([[1, 0], [0, 0]]), np.array([[0, 1], [0, 0]])])
    assert np.allclose(reset.choi, ch.amplitude_damping(1.0).choi)


def test_from_kraus_isometry(rng):
    v = la.random_unitary(6, rng)[:, :2]
    kraus = [v[:3], v[3:]]
    n = ch.from_kraus(kraus)
    assert n.is_tp and n.is_cp


def test_from_kraus_shape_mismatch():
    with pytest.raises(la.DimensionError):
        ch.from_kraus([np.eye(2), np.eye(3)])
    with pytest.raises(ValueError):
        ch.from_kraus([])


def test_depolarizing_examples():
    assert np.allclose(ch.depolarizing(2, 1.0).choi, la.kron(la.uniform(2), la.uniform(2)))
    n = ch.depolarizing(2, 0.5)
    assert np.allclose(n.choi, 0.5 * la.max_entangled(2) + 0.5 * np.eye(4) / 4)
    assert np.allclose(la.eigvalsh(n.choi), [0.625, 0.125, 0.125, 0.125])


def test_erasure_zero_is_embedding():
    n = ch.erasure(2, 0.0)
    assert n.d_out == 3
    t = n.choi_tensor()
    assert np.allclose(t[:, 2, :, :], 0) and np.allclose(t[:, :, :, 2], 0)
    assert np.allclose(t[:, :2, :, :2].reshape(4, 4), la.max_entangled(2))


@pytest.mark.parametrize("p", [0.0, 0.13, 0.5, 0.87, 1.0])
def test_families_are_channels(p):
    for n in (ch.depolarizing(2, p), ch.depolarizing(3, p), ch.erasure(2, p), ch.erasure(3, p),
              ch.amplitude_damping(p)):
        assert n.is_cp and n.is_tp
        assert np.trace(n.choi).real == pytest.approx(1.0)


def test_parameter_out_of_range():
    with pytest.raises(ValueError):
        ch.builtin_channel("depolarizing", d=2, p=1.5)
    with pytest.raises(ValueError):
        ch.builtin_channel("amplitude_damping", gamma=-0.1)
    with pytest.raises(ValueError):
        ch.builtin_channel("unknown", p=0.1)


def test_replacement_builtin(rng):
    sigma = la.random_density(3, rng)
    n = ch.builtin_channel("replacement", d=2, sigma=sigma)
    rho = la.random_density(2, rng)
    assert np.allclose(n(rho), sigma)


def test_apply_matches_kraus(rng):
    kraus = [rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2)) for _ in range(2)]
    n = ch.from_kraus(kraus)
    x = la.random_hermitian(2, rng)
    assert np.allclose(n(x), direct_apply(kraus, x))
    # on the second factor of a bipartite operator
    y = la.random_hermitian(4, rng)
    big = [np.kron(np.eye(2), k) for k in kraus]
    assert np.allclose(ch.apply(n, y, (2, 2), 1), direct_apply(big, y))


def test_apply_identity_and_trace(rng):
    rho = la.random_density(2, rng)
    assert np.allclose(ch.identity(2)(rho), rho)
    n = ch.random_channel(2, 3, rng)
    assert np.trace(n(rho)).real == pytest.approx(1.0)


def test_apply_extended_gives_choi():
    n = ch.depolarizing(2, 0.5)
    assert np.allclose(ch.apply(n, la.max_entangled(2), (2, 2), 1), n.choi)


def test_apply_dimension_mismatch():
    with pytest.raises(la.DimensionError):
        ch.depolarizing(2, 0.5)(np.eye(3))


def test_compose_examples(rng):
    n = ch.random_channel(2, 3, rng)
    assert np.allclose(ch.compose(ch.identity(3), n).choi, n.choi)
    sigma = la.random_density(2, rng)
    assert np.allclose(ch.compose(ch.replacement(sigma, 3), n).choi, ch.replacement(sigma, 2).choi)


def test_compose_tensor_match_apply(rng):
    for _ in range(3):
        a = ch.random_cp_map(2, 4, rng)
        b = ch.random_cp_map(4, 3, rng)
        x = la.random_hermitian(2, rng)
        assert np.max(np.abs(ch.compose(b, a)(x) - b(a(x)))) <= 1e-9
        y = la.random_hermitian(8, rng)
        ab = ch.tensor(a, ch.random_cp_map(4, 2, rng))
        first = ab.in_dims
        assert first == (2, 4)
    a, b = ch.random_cp_map(2, 4, rng), ch.random_cp_map(3, 2, rng)
    y = la.random_hermitian(6, rng)
    step = ch.apply(b, ch.apply(a, y, (2, 3), 0), (4, 3), 1)
    assert np.max(np.abs(ch.tensor(a, b)(y) - step)) <= 1e-9


def test_tensor_depolarizing_on_phi():
    p = 0.3
    n = ch.depolarizing(2, p)
    nn = ch.tensor(n, n)
    phi4 = la.max_entangled(4)
    via_tensor = ch.apply(nn, phi4, (4, 2, 2), 1)
    once = ch.apply(n, phi4, (4, 2, 2), 1)
    twice = ch.apply(n, once, (4, 2, 2), 2)
    assert np.max(np.abs(via_tensor - twice)) <= 1e-12


def test_adjoint_identity(rng):
    n = ch.random_cp_map(3, 2, rng)
    x, y = la.random_hermitian(3, rng), la.random_hermitian(2, rng)
    assert np.trace(y @ n(x)) == pytest.approx(np.trace(ch.adjoint(n)(y) @ x))


def test_compose_dimension_mismatch(rng):
    with pytest.raises(la.DimensionError):
        ch.compose(ch.identity(2), ch.identity(3))


def test_permutation_helpers(rng):
    n = ch.random_cp_map(2, 6, rng).regroup((2,), (2, 3))
    direct = ch.compose(ch.permutation((2, 3), (1, 0)), n)
    assert np.max(np.abs(ch.permute_outputs(n, (1, 0)).choi - direct.choi)) <= 1e-15
    m = ch.random_cp_map(6, 2, rng).regroup((3, 2), (2,))
    direct = ch.compose(m, ch.permutation((2, 3), (1, 0)))
    assert np.max(np.abs(ch.permute_inputs(m, (1, 0)).choi - direct.choi)) <= 1e-15


def test_boundary_product_conditions():
    d = 2
    bc = ch.BoundaryCondition(la.kron(la.uniform(d), la.uniform(d)), la.kron(la.uniform(d), la.uniform(d)),
                              d, d, d)
    n = ch.boundary_to_map(bc)
    target = ch.replacement(la.uniform(d), d).choi / (d * d)
    assert np.allclose(n.choi, target)


def test_boundary_teleportation():
    d = 2
    phi = la.max_entangled(d)
    n = ch.boundary_to_map(ch.BoundaryCondition(phi, phi, d, d, d))
    assert np.allclose(n.choi, ch.identity(d).choi / d ** 2)


def test_boundary_round_trip(rng):
    for n in (ch.depolarizing(2, 0.5), ch.random_cp_map(2, 3, rng), ch.amplitude_damping(0.4)):
        bc, scale = ch.map_to_boundary(n)
        back = ch.boundary_to_map(bc)
        assert back.is_cp
        ratio = back.choi / n.choi.max()
        # positive multiple of n: n / (d_A^2 * scale)
        assert np.allclose(back.choi, n.choi / (n.d_in ** 2 * scale))


def test_map_to_boundary_examples():
    bc, scale = ch.map_to_boundary(ch.identity(2))
    assert np.allclose(bc.rho_init, la.max_entangled(2)) and np.allclose(bc.rho_final, la.max_entangled(2))
    n = ch.depolarizing(2, 0.5)
    bc, scale = ch.map_to_boundary(n)
    assert scale == pytest.approx(1.0)
    assert np.allclose(bc.rho_init, la.permute_systems(n.choi, (2, 2), (1, 0)))
    bc, _ = ch.map_to_boundary(ch.replacement(la.uniform(2), 2))
    assert np.allclose(bc.rho_init, np.eye(4) / 4)
    with pytest.raises(ValueError):
        ch.map_to_boundary(ch.from_choi(np.zeros((4, 4)), 2, 2))


def test_boundary_validation():
    with pytest.raises(ValueError):
        ch.BoundaryCondition(np.eye(4), np.eye(4) / 4, 2, 2, 2)
    with pytest.raises(la.DimensionError):
        ch.BoundaryCondition(np.eye(4) / 4, np.eye(6) / 6, 2, 2, 2)


def test_json_round_trip(tmp_path, rng):
    n = ch.random_cp_map(2, 3, rng)
    path = tmp_path / "n.json"
    ch.save_channel(n, path)
    data = json.loads(path.read_text())
    assert data["d_in"] == 2 and data["d_out"] == 3
    m = ch.load_channel(path)
    assert np.array_equal(m.choi, n.choi)


def test_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ch.ChannelFormatError):
        ch.load_channel(bad)
    bad.write_text(json.dumps({"d_in": 2, "d_out": 2, "choi": [[[1, 0]]]}))
    with pytest.raises(ch.ChannelFormatError):
        ch.load_channel(bad)
    nonherm = np.zeros((4, 4), dtype=complex)
    nonherm[0, 1] = 1
    bad.write_text(json.dumps({"d_in": 2, "d_out": 2,
                               "choi": [[[z.real, z.imag] for z in row] for row in nonherm]}))
    with pytest.raises(ch.ChannelFormatError):
        ch.load_channel(bad)


def test_validation_flags():
    m = np.array(ch.depolarizing(2, 0.5).choi)
    m[0, 0] -= 0.5
    bad = ch.from_choi(m, 2, 2)
    report = ch.validation_report(bad)
    assert not report["is_cp"] and not report["is_tp"]
    assert report["min_choi_eigenvalue"] < -1e-3
    scaled = ch.depolarizing(2, 0.5) * 2.0
    assert scaled.is_cp and not scaled.is_tp
