import math
import warnings

import numpy as np
import pytest

from retrocap import channels as ch
from retrocap import linalg as la
from retrocap import measures as ms

from oracles import cvx_dmax, cvx_idoe, cvx_imax, cvx_ipm, idoe_closed, imax_closed


def test_dmax_examples(rng):
    rho = la.random_density(3, rng)
    assert ms.dmax(rho, rho) == pytest.approx(0.0, abs=1e-9)
    assert ms.dmax(np.diag([1.0, 0.0]), np.diag([0.5, 0.5])) == pytest.approx(1.0)
    assert ms.dmax(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) == math.inf
    phi = la.max_entangled(2)
    assert ms.dmax(phi, la.kron(la.uniform(2), la.uniform(2))) == pytest.approx(2.0)


def test_dmax_against_cvxpy(rng):
    for _ in range(3):
        rho, sigma = la.random_density(3, rng), la.random_density(3, rng)
        assert ms.dmax(rho, sigma) == pytest.approx(cvx_dmax(rho, sigma), abs=1e-5)


def test_dmax_hermitian_non_psd():
    # 2 * sigma - rho >= 0 is tight for the sign-indefinite rho below
    rho = np.diag([1.0, -0.5])
    sigma = np.diag([0.5, 0.5])
    assert ms.dmax(rho, sigma) == pytest.approx(1.0, abs=1e-7)


def test_dmax_shape_mismatch():
    with pytest.raises(la.DimensionError):
        ms.dmax(np.eye(2), np.eye(3))


@pytest.mark.parametrize("family,x", [("depolarizing", 0.2), ("erasure", 0.6), ("amplitude_damping", 0.4)])
def test_closed_forms(family, x):
    n = ch.builtin_channel(family, d=2, p=x, gamma=x)
    assert ms.max_information(n).value == pytest.approx(imax_closed(family, x), abs=1e-6)
    assert ms.doeblin_information(n).value == pytest.approx(idoe_closed(family, x), abs=1e-6)


def test_measure_examples():
    ident = ch.identity(2)
    assert ms.max_information(ident).value == pytest.approx(2.0, abs=1e-7)
    assert ms.doeblin_information(ident).value == math.inf
    assert ms.pm_information(ident).value == math.inf
    full = ch.depolarizing(2, 1.0)
    assert ms.max_information(full).value == pytest.approx(0.0, abs=1e-7)
    assert ms.doeblin_information(full).value == pytest.approx(0.0, abs=1e-7)
    assert ms.pm_information(ch.erasure(2, 0.5)).value == pytest.approx(1.0, abs=1e-6)


def test_random_maps_against_cvxpy(rng):
    for _ in range(4):
        n = ch.random_cp_map(2, 2, rng)
        j = np.array(n.choi)
        assert ms.max_information(n).value == pytest.approx(cvx_imax(j, 2, 2), abs=1e-5)
        assert ms.doeblin_information(n).value == pytest.approx(cvx_idoe(j, 2, 2), abs=1e-5)
        assert ms.pm_information(n).value == pytest.approx(cvx_ipm(j, 2, 2), abs=1e-5)


def test_rectangular_map_against_cvxpy(rng):
    n = ch.random_channel(2, 3, rng)
    j = np.array(n.choi)
    assert ms.max_information(n).value == pytest.approx(cvx_imax(j, 2, 3), abs=1e-5)
    assert ms.doeblin_information(n).value == pytest.approx(cvx_idoe(j, 2, 3), abs=1e-5)


def test_optimizers_feasible(rng):
    n = ch.random_channel(2, 2, rng)
    r = ms.max_information(n)
    lam = 2.0 ** r.value
    slack = lam * la.kron(la.uniform(2), r.optimizer) - n.choi
    assert la.eigvalsh(la.hermitize(slack))[-1] >= -1e-7
    assert np.trace(r.optimizer).real == pytest.approx(1.0)
    d = ms.doeblin_information(n)
    if math.isfinite(d.value):
        slack = n.choi - 2.0 ** (-d.value) * la.kron(la.uniform(2), d.optimizer)
        assert la.eigvalsh(la.hermitize(slack))[-1] >= -1e-7


def test_infinite_doeblin_certificate():
    r = ms.doeblin_information(ch.identity(2))
    assert r.value == math.inf
    assert r.solver_diag["certificate_value"] <= 1e-7
    w = r.certificate
    assert la.eigvalsh(la.hermitize(w))[-1] >= -1e-7
    assert np.allclose(la.partial_trace(w, (2, 2), [1]), 2 * np.eye(2), atol=1e-6)


def test_sandwich(rng):
    for _ in range(2):
        n = ch.random_channel(2, 2, rng)
        one = ms.doeblin_information(n).value
        two = ms.n_copy_doeblin(n, 2)
        upper = ms.pm_information(n).value
        assert one <= two + 1e-6
        assert two <= upper + 1e-6
        assert ms.max_information(n).value >= 0.0


def test_singlet_extremes_identity():
    ext = ms.singlet_fraction_extremes(ch.identity(2))
    assert ext.f_max == pytest.approx(1.0, abs=1e-7)
    assert ext.f_min == pytest.approx(0.0, abs=1e-7)


def test_singlet_extremes_depolarizing():
    ext = ms.singlet_fraction_extremes(ch.depolarizing(2, 0.5))
    assert ext.f_max == pytest.approx(0.625, abs=1e-7)
    assert ext.f_min == pytest.approx(0.125, abs=1e-7)
    for k in (ext.k0_choi, ext.k1_choi):
        m = ch.from_choi(k, 2, 2)
        assert m.is_cp and m.is_tp


def test_singlet_duality(rng):
    n = ch.random_cp_map(2, 3, rng)
    ext = ms.singlet_fraction_extremes(n)
    assert 0 <= ext.f_min <= ext.f_max <= 1
    assert ext.f_max == pytest.approx(2.0 ** ms.max_information(n).value / 4, abs=1e-6)
    assert ext.f_min == pytest.approx(2.0 ** -ms.doeblin_information(n).value / 4, abs=1e-6)


def test_not_cp_rejected():
    m = np.array(ch.depolarizing(2, 0.5).choi)
    m[0, 0] -= 0.6
    bad = ch.from_choi(m, 2, 2)
    for f in (ms.max_information, ms.doeblin_information, ms.pm_information, ms.singlet_fraction_extremes):
        with pytest.raises(ms.NotCPError):
            f(bad)


def test_copy_limits():
    n = ch.depolarizing(2, 0.5)
    assert ms.max_feasible_copies(n) == 3
    # two qutrit copies embed at side 162, three would need 1458
    assert ms.max_feasible_copies(ch.depolarizing(3, 0.5)) == 2
    with pytest.raises(ValueError):
        ms.n_copy_doeblin(n, 4)
    with pytest.raises(ValueError):
        ms.n_copy_doeblin(ch.depolarizing(3, 0.5), 3)


def test_depolarizing_doeblin_additive():
    n = ch.depolarizing(2, 0.5)
    assert ms.n_copy_doeblin(n, 2) == pytest.approx(1.0, abs=1e-6)
    lo, hi = ms.regularized_doeblin_bounds(n)
    assert lo == pytest.approx(1.0, abs=1e-6) and hi == pytest.approx(1.0, abs=1e-6)


@pytest.mark.slow
def test_depolarizing_three_copies():
    assert ms.n_copy_doeblin(ch.depolarizing(2, 0.5), 3) == pytest.approx(1.0, abs=1e-6)


def test_amplitude_damping_two_copies_unbounded():
    # the two-copy optimum vanishes although one copy is finite
    n = ch.amplitude_damping(0.5)
    assert math.isfinite(ms.doeblin_information(n).value)
    assert ms.n_copy_doeblin(n, 2) == math.inf
    assert cvx_idoe(np.array(ch.tensor(n, n).choi), 4, 4) == math.inf


def test_low_confidence_flag():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        value, low = ms._doeblin_value(5e-7, "I_doe")
    assert low and math.isfinite(value)
    assert any(issubclass(w.category, ms.LowConfidenceWarning) for w in caught)
    assert ms._doeblin_value(1e-10, "I_doe") == (math.inf, False)
