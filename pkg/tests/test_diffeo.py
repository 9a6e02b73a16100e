import numpy as np
import pytest

from weldlab.constants import alpha, beta, c_const, index_factor, sgn
from weldlab.diffeo import (
    REFERENCE_SPEC,
    TangentVector,
    compose,
    deform,
    flow_spec,
    invert,
    make_diffeo,
    mobius_map,
    schwarzian_on_circle,
    wp_norm,
)
from weldlab.errors import BadMobiusParameter, NotMonotone


def test_constants_closed_forms():
    assert alpha(1) == pytest.approx(1 / np.pi, rel=1e-15)
    assert beta(2) == pytest.approx(6 * alpha(2), rel=1e-15)
    for k in (1, 2, 5, 40):
        assert c_const(1, k) == pytest.approx(np.sqrt(k / np.pi), rel=1e-14)
        assert c_const(0, k) == pytest.approx(1 / np.sqrt(np.pi * k), rel=1e-14)
    for k in (2, 3, 10):
        assert c_const(2, k) == pytest.approx(np.sqrt(2 * (k ** 3 - k) / np.pi), rel=1e-14)
    assert c_const(3, -7) == c_const(3, 7)
    assert [index_factor(n) for n in (1, 2, 3)] == [1, 13, 37]
    assert sgn(2, 2) == 1 and sgn(2, 1) == -1


def test_dual_constant_product():
    for n in (1, 2, 3):
        for k in (n, n + 3, 50):
            assert c_const(n, k) * c_const(1 - n, k) == pytest.approx(alpha(n), rel=1e-13)


def test_flow_is_monotone_and_periodic(gamma_star):
    d = gamma_star.lift_derivative
    assert d.min() > 0
    assert np.allclose(gamma_star.periodic, 0.1 * np.sin(2 * gamma_star.theta) - 0.06 * np.sin(3 * gamma_star.theta), atol=1e-15)


def test_flow_rejects_fold():
    with pytest.raises(NotMonotone):
        make_diffeo(flow_spec({2: 0.3}), 64)


def test_invert_round_trip(gamma_star, gamma_star_inv):
    ident = compose(gamma_star, gamma_star_inv)
    assert np.abs(ident.lift - ident.theta).max() < 1e-12
    ident = compose(gamma_star_inv, gamma_star)
    assert np.abs(ident.lift - ident.theta).max() < 1e-12


def test_compose_rotation():
    r = make_diffeo({"kind": "rotation", "alpha": 0.3}, 64)
    assert np.allclose(compose(r, r).lift, r.theta + 0.6, atol=1e-14)


def test_mobius_map_is_circle_automorphism():
    sigma, dsigma = mobius_map(1.5 + 0.5j)
    z = np.exp(1j * np.linspace(0, 6, 17))
    assert np.allclose(np.abs(sigma(z)), 1, atol=1e-14)
    assert sigma(1.0) == pytest.approx(1.0)
    h = 1e-6
    assert abs((sigma(0.3 + h) - sigma(0.3 - h)) / (2 * h) - dsigma(0.3)) < 1e-8
    with pytest.raises(BadMobiusParameter):
        mobius_map(0.5)


def test_schwarzian_vanishes_for_mobius():
    g = make_diffeo({"kind": "mobius", "w": [1.5, 0.0]}, 512)
    S, _, modes = schwarzian_on_circle(g, kmax=20)
    assert np.abs(S).max() < 1e-8


def test_schwarzian_of_flow_is_band_limited(gamma_star):
    _, ks, modes = schwarzian_on_circle(gamma_star, kmax=40)
    # decays geometrically; very high modes are below roundoff
    assert np.abs(modes[np.abs(ks) > 35]).max() < 1e-10 * np.abs(modes).max()


def test_deform_first_order(gamma_star):
    v = TangentVector.single(2, 0.2 + 0.1j)
    t = 1e-3
    gt = deform(gamma_star, v, t)
    expect = gamma_star.lift + t * v.field(gamma_star.lift)
    assert np.abs(gt.lift - expect).max() < 1e-15
    assert deform(gamma_star, v, 0) is gamma_star


def test_tangent_field_derivative():
    v = TangentVector(np.array([0.1, -0.2j, 0.05]))
    th = np.linspace(0, 6, 11)
    h = 1e-6
    fd = (v.field(th + h) - v.field(th - h)) / (2 * h)
    assert np.abs(fd - v.field_derivative(th)).max() < 1e-8


def test_wp_norm():
    v = TangentVector.single(3, 1.0)
    assert wp_norm(v) == pytest.approx(2 * np.pi * 24)


def test_resample_preserves_band_limited(gamma_star):
    g = gamma_star.resample(2048)
    assert np.abs(g.lift[::2] - gamma_star.lift).max() < 1e-13
    assert make_diffeo(REFERENCE_SPEC, 2048).lift == pytest.approx(g.lift, abs=1e-13)
