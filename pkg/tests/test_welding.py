import numpy as np
import pytest

from weldlab.diffeo import make_diffeo
from weldlab.errors import ResidualTooLarge
from weldlab.welding import WeldingPair, gamma_from_pair, invert_pair, weld


def test_identity_welds_to_identity():
    p = weld(make_diffeo({"kind": "identity"}, 256), 16)
    assert np.abs(p.a - np.r_[0, 1, np.zeros(15)]).max() < 1e-14
    assert abs(p.r - 1) < 1e-14 and np.abs(p.b[1:]).max() < 1e-14


def test_rotation_scales_g():
    a = 0.3
    p = weld(make_diffeo({"kind": "rotation", "alpha": a}, 256), 8)
    # f = z and g(e^{i(theta + a)}) = e^{i theta}
    assert abs(p.r - np.exp(-1j * a)) < 1e-14
    assert np.abs(p.a[2:]).max() < 1e-14


def test_reference_pair_closes(pair_star, gamma_star):
    assert pair_star.boundary_residual(gamma_star) < 1e-10
    assert pair_star.info["univalence_winding"] == 0
    # coefficients decay fast for the band-limited input
    assert np.abs(pair_star.a[-20:]).max() < 1e-12


def test_pair_converges_with_K(gamma_star, pair_star):
    p = weld(gamma_star, 64)
    assert np.abs(p.a[:40] - pair_star.a[:40]).max() < 1e-11
    assert abs(p.r - pair_star.r) < 1e-12


def test_inverse_pair_matches_welding_of_inverse(gamma_star_inv, pair_star_inv):
    direct = weld(gamma_star_inv, 256)
    assert np.abs(direct.a[:60] - pair_star_inv.a[:60]).max() < 1e-10
    assert np.abs(direct.b[:60] - pair_star_inv.b[:60]).max() < 1e-10


def test_invert_pair_is_involution(pair_star):
    back = invert_pair(invert_pair(pair_star))
    assert np.abs(back.a[:100] - pair_star.a[:100]).max() < 1e-12
    assert np.abs(back.b[:100] - pair_star.b[:100]).max() < 1e-12


def test_gamma_from_pair(pair_star, gamma_star):
    g = gamma_from_pair(pair_star, M=1024)
    assert np.abs(g.lift - gamma_star.lift).max() < 1e-11


def test_json_round_trip(pair_star):
    q = WeldingPair.from_json(pair_star.to_json())
    assert np.array_equal(q.a, pair_star.a) and np.array_equal(q.b, pair_star.b)


def test_residual_guard(gamma_star):
    with pytest.raises(ResidualTooLarge):
        weld(gamma_star, 4, residual_tol=1e-12)


def test_normalization_enforced():
    with pytest.raises(ValueError):
        WeldingPair.from_coefficients([0, 2], [1, 0])
