"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Reference input gamma* = flow(0.1 sin 2 theta - 0.06 sin 3 theta) on
M = 1024.  Expected values come from exact identities or from the frozen
oracle results in ``oracles.py``; tolerances are the contract values and
are not to be relaxed.
"""

import time

import numpy as np
import pytest

from weldlab.diffeo import TangentVector, compose, make_diffeo
from weldlab.faber import (
    coefficient_matrices,
    frak_p2_closed_form,
    grunsky_n1,
    joukowski_pair,
    transition_matrices,
)
from weldlab.pi import inner_extent, pi_window, verify_mobius, verify_pi_identities
from weldlab.series import LaurentSeries, add, compose as compose_series, derivative, mul, revert, schwarzian
from weldlab.spectra import (
    appendix_checks,
    derivative_check,
    f_n,
    g_n,
    index_check,
    wp_potential,
    wp_potential_quadrature,
)
from weldlab.welding import gamma_from_pair, weld

from oracles import catalan_by_fixed_point

CATALAN = [1, 1, 2, 5, 14, 42]
INDEX = {1: 1, 2: 13, 3: 37}


def mobius(w, M=1024):
    return make_diffeo({"kind": "mobius", "w": w}, M)


@pytest.fixture(scope="module")
def index_report(gamma_star, pair_star):
    t = time.perf_counter()
    rep = index_check(gamma_star, [1, 2, 3], 128, pair=pair_star)
    return rep, time.perf_counter() - t


def test_criterion_01_grunsky(gamma_star, acceptance_log):
    t = time.perf_counter()
    res = {K: grunsky_n1(weld(gamma_star, 2 * K), K, interior=32)["equality_residual"] for K in (64, 128)}
    elapsed = time.perf_counter() - t
    ok = res[64] < 1e-8 and res[128] <= res[64] / 10 and elapsed < 5
    acceptance_log(1, ok, f"Grunsky residual K=64 {res[64]:.2e} (< 1e-8), K=128 {res[128]:.2e} "
                          f"(shrink {res[64] / res[128]:.1e}x), {elapsed:.1f}s")
    assert res[64] < 1e-8
    assert res[128] <= res[64] / 10
    assert elapsed < 5


def test_criterion_02_pi_identities(gamma_star, gamma_star_inv, acceptance_log):
    t = time.perf_counter()
    cases = {
        "gamma*": (gamma_star, gamma_star_inv),
        "rotation": (make_diffeo({"kind": "rotation", "alpha": 0.7}, 1024), None),
        "mobius": (mobius([1.2, 0.9]), None),
    }
    worst = {}
    for name, (g, gi) in cases.items():
        for n in (0, 1, 2, 3):
            rep = verify_pi_identities(g, n, 64, gamma_inv=gi)
            for key, c in rep.checks.items():
                worst[f"{name}:{n}:{key}"] = c["residual"]
    for n in (1, 2, 3):
        for key, c in verify_mobius(mobius([1.2, 0.9]), n, 64).checks.items():
            worst[f"mobius:{n}:{key}"] = c["residual"]
    elapsed = time.perf_counter() - t
    key = max(worst, key=worst.get)
    ok = worst[key] < 1e-8 and elapsed < 20
    acceptance_log(2, ok, f"{len(worst)} Pi residuals, worst {worst[key]:.2e} ({key}), {elapsed:.1f}s")
    assert worst[key] < 1e-8
    assert {"block_identity_n2", "block_identity_n1", "adjoint_dual"} <= {k.split(":")[2] for k in worst}
    assert elapsed < 20


def test_criterion_03_bridge(gamma_star, gamma_star_inv, acceptance_log):
    t = time.perf_counter()
    Kin = 48
    L = max(2 * Kin, inner_extent(gamma_star_inv, Kin), inner_extent(gamma_star, Kin))
    p = weld(gamma_star, 2 * L)
    res = {}
    for n in (1, 2, 3):
        A = coefficient_matrices(p, n, L, rows=Kin)["A[n]"].data
        P1 = pi_window(gamma_star_inv, n, (n, L), (n, Kin), resample=True).data
        res[n] = float(np.abs(A @ P1 - np.eye(Kin - n + 1)).max())
    elapsed = time.perf_counter() - t
    ok = max(res.values()) < 1e-7 and elapsed < 30
    acceptance_log(3, ok, "A[n] Pi_1[inverse;n] - Id: " + ", ".join(f"n={n} {r:.2e}" for n, r in res.items())
                   + f" (< 1e-7), {elapsed:.1f}s")
    assert max(res.values()) < 1e-7
    assert elapsed < 30


def test_criterion_04_index_theorem(index_report, acceptance_log):
    rep, elapsed = index_report
    parts, ok = [], elapsed < 60
    for n in (2, 3):
        e64, e128 = rep.values[f"index_errors_ladder[n={n}]"]
        ok = ok and e128 < 1e-5 and e64 >= 10 * e128
        parts.append(f"n={n} (exponent {INDEX[n]}) {e128:.2e} at K=128, {e64 / e128:.0f}x from K=64")
    acceptance_log(4, ok, "; ".join(parts) + f", {elapsed:.1f}s")
    for n in (2, 3):
        e64, e128 = rep.values[f"index_errors_ladder[n={n}]"]
        assert e128 < 1e-5
        assert e64 >= 10 * e128
    assert elapsed < 60


def test_criterion_05_potential(index_report, pair_star, acceptance_log):
    rep, _ = index_report
    S = wp_potential(pair_star).total
    Sq = wp_potential_quadrature(pair_star).total
    errs = {n: rep.values[f"potential_errors_ladder[n={n}]"][-1] for n in (1, 2, 3)}
    ok = max(errs.values()) < 1e-5 and abs(S - Sq) < 1e-6
    acceptance_log(5, ok, f"S = {S:.12f} (quadrature diff {abs(S - Sq):.1e}); relative F_n errors "
                   + ", ".join(f"n={n} {e:.1e}" for n, e in errs.items()))
    assert abs(S - Sq) < 1e-6
    assert max(errs.values()) < 1e-5


def test_criterion_06_derivative(gamma_star, pair_star, acceptance_log):
    v = TangentVector.single(2, 0.02)
    rel = {}
    for n in (1, 2, 3):
        rep = derivative_check(gamma_star, v, n, steps=(1e-2, 5e-3, 2.5e-3), K=128, pair=pair_star)
        rel[n] = rep.residual("relative_error")
    ok = max(rel.values()) < 1e-4
    acceptance_log(6, ok, "Richardson derivative vs residue formula: "
                   + ", ".join(f"n={n} {r:.1e}" for n, r in rel.items()) + " (< 1e-4)")
    assert max(rel.values()) < 1e-4


def test_criterion_07_symmetries(gamma_star, gamma_star_inv, pair_star, pair_star_inv, acceptance_log):
    lad = (128,)
    worst = {}
    sigmas = [compose(mobius(w), gamma_star) for w in (1.2, [0.0, 2.0])]
    for n in (1, 2, 3):
        F = f_n(gamma_star, n, lad).extrapolated
        G = g_n(pair_star, n, lad).extrapolated
        worst[f"C n={n}"] = abs(F - G)
        worst[f"A n={n}"] = abs(F - f_n(gamma_star_inv, 1 - n, lad).extrapolated)
        worst[f"B n={n}"] = abs(G - g_n(pair_star_inv, n, lad).extrapolated)
        for i, s in enumerate(sigmas):
            worst[f"E{i} n={n}"] = abs(F - f_n(s, n, lad).extrapolated)
    key = max(worst, key=worst.get)
    ok = worst[key] < 1e-7
    acceptance_log(7, ok, f"{len(worst)} symmetry differences at K=128, worst {worst[key]:.1e} ({key})")
    assert worst[key] < 1e-7


def test_criterion_08_closed_forms(acceptance_log):
    vals = {}
    for name, g in (("rotation", make_diffeo({"kind": "rotation", "alpha": 0.7}, 1024)),
                    ("mobius 1.5", mobius(1.5)), ("mobius -2.5i", mobius([0.0, -2.5]))):
        for n in (1, 2, 3):
            vals[f"{name} n={n}"] = abs(f_n(g, n, (128,)).extrapolated)
    gr = grunsky_n1(joukowski_pair(0.3, 20), 20)
    jouk = float(np.abs(np.diag(gr["B[0]"].data) - 0.3 ** np.arange(1, 21)).max())
    key = max(vals, key=vals.get)
    ok = vals[key] < 1e-9 and jouk < 1e-10
    acceptance_log(8, ok, f"max |F_n| on Mobius/rotation {vals[key]:.1e} ({key}); Joukowski B[0] diagonal {jouk:.1e}")
    assert vals[key] < 1e-9
    assert jouk < 1e-10


def test_criterion_09_transitions(pair_star, acceptance_log):
    K = 64
    m1 = coefficient_matrices(pair_star, 1, K)
    id1 = max(float(np.abs(m1[k].data - np.eye(K)).max()) for k in ("frakP[n]", "frakM[n]"))
    closed = float(np.abs(frak_p2_closed_form(pair_star, K).data - coefficient_matrices(pair_star, 2, K)["frakP[n]"].data).max())
    tri = 0.0
    for n in (2, 3):
        rep = transition_matrices(pair_star, n, K)
        tri = max(tri, max(c["residual"] for c in rep["report"].checks.values()))
    ok = id1 < 1e-14 and closed < 1e-8 and tri < 1e-10
    acceptance_log(9, ok, f"P[1], M[1] vs Id {id1:.1e}; P[2] closed form {closed:.1e}; triangular/unit diagonal {tri:.1e}")
    assert id1 < 1e-14
    assert closed < 1e-8
    assert tri < 1e-10


def test_criterion_10_appendix(pair_star, acceptance_log):
    reps = {n: appendix_checks(pair_star, n, trials=100, seed=0, K=128) for n in (2, 3)}
    ok = all(r.passed for r in reps.values()) and all(r.values["sample_points"] == 25 for r in reps.values())
    parts = [f"n={n} diagonal excess {r.values['diagonal_worst_relative_excess']:.1e}, "
             f"product-norm excess {r.values['product_norm_worst_relative_excess']:.1e}" for n, r in reps.items()]
    acceptance_log(10, ok, "; ".join(parts) + " (<= 1e-12 slack)")
    for r in reps.values():
        assert r.passed
        assert r.values["sample_points"] == 25 and r.values["trials"] == 100


def test_criterion_11_substrate(gamma_star, pair_star, acceptance_log):
    rng = np.random.default_rng(11)
    a = LaurentSeries.polynomial(rng.standard_normal(15) / (1 + np.arange(15)), order=40)
    b = LaurentSeries.polynomial(rng.standard_normal(15) / (1 + np.arange(15)), order=40)
    z = 0.6 * np.exp(2j * np.pi * np.arange(16) / 16)
    pointwise = float(np.abs(mul(a, b)(z) - a(z) * b(z)).max())
    cat = revert(LaurentSeries.polynomial([0, 1, -1], order=6)).coeff_range(np.arange(1, 7))
    catalan = float(np.abs(cat - CATALAN).max())
    assert np.array_equal(catalan_by_fixed_point(6), CATALAN)
    f = LaurentSeries.polynomial([0, 1, 0.15, -0.05, 0.02], order=24)
    g = LaurentSeries.polynomial([0, 1, -0.1, 0.07], order=24)
    dg = derivative(g)
    cocycle_l = schwarzian(compose_series(f, g))
    cocycle_r = add(mul(compose_series(schwarzian(f), g), mul(dg, dg)), schwarzian(g))
    ks = np.arange(0, 18)
    cocycle = float(np.abs(cocycle_l.coeff_range(ks) - cocycle_r.coeff_range(ks)).max())
    back = gamma_from_pair(pair_star, M=1024)
    round_trip = float(np.abs(back.lift - gamma_star.lift).max())
    ok = pointwise < 1e-11 and catalan < 1e-12 and cocycle < 1e-10 and round_trip < 1e-8
    acceptance_log(11, ok, f"series pointwise {pointwise:.1e}, Catalan {catalan:.1e}, cocycle {cocycle:.1e}, "
                           f"welding round trip {round_trip:.1e}")
    assert pointwise < 1e-11
    assert catalan < 1e-12
    assert cocycle < 1e-10
    assert round_trip < 1e-8
