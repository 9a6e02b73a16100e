import numpy as np
import pytest

from weldlab.constants import c_vector
from weldlab.diffeo import REFERENCE_SPEC, flow_spec, make_diffeo
from weldlab.errors import AliasRisk, WindowTooSmall
from weldlab.pi import (
    inner_extent,
    pi_blocks,
    pi_matrix,
    pi_window,
    s_matrix_n2,
    verify_mobius,
    verify_multiplicativity,
    verify_pi_identities,
)


def test_identity_gives_identity_matrix():
    g = make_diffeo({"kind": "identity"}, 256)
    for n in (-1, 0, 1, 2, 3):
        P = pi_matrix(g, n, 20)
        assert np.abs(P.data - np.eye(41)).max() < 1e-12


def test_rotation_is_diagonal():
    a = 0.4
    g = make_diffeo({"kind": "rotation", "alpha": a}, 256)
    P = pi_matrix(g, 2, 10)
    ks = np.arange(-10, 11)
    assert np.abs(P.data - np.diag(np.exp(1j * a * ks))).max() < 1e-12


def test_entry_against_direct_quadrature(gamma_star):
    n, l, k = 2, 5, 3
    P = pi_window(gamma_star, n, (l, l), (k, k), resample=True)
    th = gamma_star.theta
    z = np.exp(1j * th)
    integrand = gamma_star.values ** (k - n) * gamma_star.dz ** n * z ** (-(l - n))
    direct = integrand.mean() * c_vector(n, [k])[0] / c_vector(n, [l])[0]
    assert abs(P[l, k] - direct) < 1e-14


def test_alias_guard(gamma_star):
    g = gamma_star.resample(64)
    with pytest.raises(AliasRisk):
        pi_window(g, 2, (-40, 40), (-40, 40))
    P = pi_window(g, 2, (-40, 40), (-40, 40), resample=True)
    assert P.shape == (81, 81)


def test_blocks_need_window(gamma_star):
    P = pi_matrix(gamma_star, 2, 10)
    with pytest.raises(WindowTooSmall):
        pi_blocks(P, 12)
    B = pi_blocks(P, 10)
    assert B["Pi1"].row_start == 2 and B["Pi4"].row_start == -1
    assert B["Pi1"].shape == (9, 9) and B["Pi2hat"].shape == (12, 9)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_identities_reference(gamma_star, gamma_star_inv, n):
    rep = verify_pi_identities(gamma_star, n, 48, gamma_inv=gamma_star_inv)
    assert rep.passed, rep.failures
    for key, c in rep.checks.items():
        assert c["residual"] < 1e-10, key


def test_s_blocks_symmetry(gamma_star):
    S = s_matrix_n2(gamma_star, 16)
    assert S["S1"].hermitian_defect() < 1e-12
    assert np.abs(S["S4"].data - S["S1"].data.conj()).max() < 1e-12


def test_s_blocks_vanish_for_mobius():
    g = make_diffeo({"kind": "mobius", "w": [0.0, 1.4]}, 1024)
    S = s_matrix_n2(g, 12)
    assert max(np.abs(b.data).max() for b in S.values()) < 1e-7


@pytest.mark.parametrize("n", [1, 2])
def test_multiplicativity(gamma_star, n):
    g2 = make_diffeo(flow_spec({2: -0.02j, 4: 0.01}), 1024)
    rep = verify_multiplicativity(gamma_star, g2, n, 32)
    assert rep.residual("multiplicativity") < 1e-10


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mobius_unitary(n):
    g = make_diffeo({"kind": "mobius", "w": [1.5, 0.3]}, 1024)
    rep = verify_mobius(g, n, 24)
    assert rep.passed, rep.failures


def test_inner_extent_grows_with_distortion(gamma_star):
    ident = make_diffeo({"kind": "identity"}, 64)
    assert inner_extent(gamma_star, 32) > inner_extent(ident, 32)


@pytest.mark.xfail(strict=True, reason="residuals sit at the roundoff floor for every K, so they cannot shrink tenfold")
def test_identity_residual_ladder(gamma_star, gamma_star_inv):
    r = [verify_pi_identities(gamma_star, 2, K, gamma_inv=gamma_star_inv).residual("inverse_product") for K in (32, 64)]
    assert r[1] <= r[0] / 10
