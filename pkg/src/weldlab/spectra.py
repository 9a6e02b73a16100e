"""Period matrices, truncated log-determinants and the functionals built on them.

Every log-determinant here is read off one Cholesky factorization: the
leading principal minors of a Hermitian Gram matrix are the running
products of the squared pivots, so a whole ladder ``K_1 < K_2 < ..`` costs
a single factorization at the largest K.

Truncation tails.  For weights other than 0 and 1 the pivot contributions
``d_l`` decay like ``1/l^2`` (the kernel is only finitely smooth on the
diagonal), so the raw truncated sums converge like ``1/K``.  The tail
``sum_{l>K} d_l`` is estimated by fitting ``l^2 d_l`` on ``[K/2, K]`` with
a short expansion in ``1/l`` and summing the fitted law with Hurwitz zeta
values.  Weights 0 and 1 converge geometrically and are left alone.

Roundoff.  An FFT entry of ``gamma^{k-n} gamma'^n`` carries an absolute
error of a few ulps of ``max|gamma'^n|``; the weight rescaling multiplies it
by ``c[n]_k / c[n]_l``, which is large for far columns of low rows.  Entries
below that floor are pure noise and are dropped before forming Gram
matrices, otherwise they accumulate in the low pivots.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.linalg
from scipy.special import zeta

from .constants import beta, c_const, c_vector, index_factor
from .diffeo import deform
from .errors import NonPositiveDefinite
from .faber import coefficient_matrices, schwarzian_modes
from .matrix import IndexedMatrix
from .pi import _base, inner_extent, pi_window
from .report import Report
from .series import derivative, mul, reciprocal

TAIL_TERMS = 4
# entries below this multiple of their FFT roundoff floor are treated as zero
NOISE_FACTOR = 16.0


@dataclass
class DeterminantLadder:
    K_values: list
    logdets: list
    raw: list
    extrapolated: float
    converged: bool
    tol: float = 1e-7
    info: dict = field(default_factory=dict)

    def at(self, K):
        return self.logdets[self.K_values.index(K)]

    def to_json(self):
        return {
            "K_values": [int(k) for k in self.K_values],
            "logdets": [float(x) for x in self.logdets],
            "raw": [float(x) for x in self.raw],
            "extrapolated": float(self.extrapolated),
            "converged": bool(self.converged),
            "tol": float(self.tol),
            "info": self.info,
        }


@dataclass(frozen=True)
class PotentialValue:
    interior_energy: float
    exterior_energy: float
    log_term: float

    @property
    def total(self):
        return self.interior_energy + self.exterior_energy + self.log_term

    def to_json(self):
        return {
            "interior_energy": self.interior_energy,
            "exterior_energy": self.exterior_energy,
            "log_term": self.log_term,
            "total": self.total,
        }


# ---------------------------------------------------------------------------
# pivots and tails


def pivot_contributions(H):
    """log of the squared Cholesky pivots of a Hermitian positive matrix."""
    H = 0.5 * (H + H.conj().T)
    try:
        L = scipy.linalg.cholesky(H, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NonPositiveDefinite("Gram matrix is not positive definite; raise K or M") from exc
    d = np.real(np.diag(L))
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise NonPositiveDefinite("Gram matrix is not positive definite")
    return 2.0 * np.log(d)


def drop_roundoff(W, gamma, factor=NOISE_FACTOR):
    """Data of a Pi window with entries below their roundoff floor set to zero."""
    n = W.weight
    lo, hi = gamma.derivative_range()
    peak = hi ** n if n >= 0 else lo ** n
    ls = np.arange(W.row_start, W.row_end + 1)
    ks = np.arange(W.col_start, W.col_end + 1)
    floor = factor * np.finfo(float).eps * peak * c_vector(n, ks)[None, :] / c_vector(n, ls)[:, None]
    P = W.data.copy()
    P[np.abs(P) < floor] = 0.0
    return P


def tail_estimate(d, start, K, terms=TAIL_TERMS):
    """Estimate of sum_{l>K} d_l from d_start..d_K (d[0] is index ``start``)."""
    ls = np.arange(max(start, K // 2), K + 1)
    y = d[ls - start] * ls.astype(float) ** 2
    V = np.vander(1.0 / ls, terms + 1, increasing=True)
    co = np.linalg.lstsq(V, y, rcond=None)[0]
    return float(sum(co[j] * zeta(2 + j, K + 1) for j in range(terms + 1)))


def _ladder(d, start, ladder, sign, tail, tol, info):
    raw, corrected = [], []
    for K in ladder:
        s = float(d[:K - start + 1].sum())
        raw.append(sign * s)
        corrected.append(sign * (s + tail_estimate(d, start, K)) if tail else sign * s)
    diffs = np.abs(np.diff(corrected))
    converged = bool(len(diffs) == 0 or diffs[-1] < tol)
    info = dict(info, tail_corrected=bool(tail))
    return DeterminantLadder(list(map(int, ladder)), corrected, raw, corrected[-1], converged, tol, info)


def _needs_tail(weight):
    return weight not in (0, 1)


# ---------------------------------------------------------------------------
# functionals


def f_n(gamma, n, ladder=(32, 64, 128), tail=None, tol=1e-7, inner=None):
    """F_n(gamma) = -log det Pi_1[gamma;n] Pi_1[gamma;n]^* along a ladder.

    Rows run over l = b..K (b = n for n >= 1, 1 - n otherwise); columns
    extend to ``inner`` so that each row is complete.
    """
    ladder = sorted(int(k) for k in ladder)
    Kmax = ladder[-1]
    b = _base(n)
    L = inner if inner is not None else max(Kmax, inner_extent(gamma, Kmax))
    P = drop_roundoff(pi_window(gamma, n, (b, Kmax), (b, L), resample=True), gamma)
    d = pivot_contributions(P @ P.conj().T)
    tail = _needs_tail(n) if tail is None else tail
    return _ladder(d, b, ladder, -1.0, tail, tol, {"route": "pi", "weight": n, "inner": L})


def g_n(p, n, ladder=(32, 64, 128), tail=None, tol=1e-7, rows=None):
    """G_n = log det frakA[n] frakA[n]^* along a ladder, from the welding pair.

    The column Gram ``frakA^T conj(frakA)`` over rows n..rows is factored;
    its leading minors are those of the K-column truncations.
    """
    ladder = sorted(int(k) for k in ladder)
    Kmax = ladder[-1]
    R = rows if rows is not None else int(np.ceil(2.2 * Kmax)) + 40
    FA = coefficient_matrices(p, n, Kmax, rows=R)["frakA[n]"].data
    d = pivot_contributions(FA.T @ FA.conj())
    tail = _needs_tail(n) if tail is None else tail
    return _ladder(d, n, ladder, 1.0, tail, tol, {"route": "pair", "weight": n, "rows": R})


def period_matrices(p, n, K, rows=None):
    """The four Gram matrices, plus the consistency residual of the two routes to N_n(Omega*)."""
    mats = coefficient_matrices(p, n, K, rows=rows)

    def gram(X):
        return IndexedMatrix(n, n, X.data.T @ X.data.conj(), n, "Gram")

    out = {
        "N(Omega)": gram(mats["frakA[n]"]),
        "N(Omega*)": gram(mats["frakD[n]"]),
        "calN(Omega)": gram(mats["A[n]"]),
        "calN(Omega*)": gram(mats["D[n]"]),
    }
    A1n = mats["A[1-n]"].truncate(K).data
    alt = A1n @ A1n.conj().T
    D = mats["D[n]"].truncate(K).data
    rep = Report(f"period_matrices(n={n}, K={K})")
    rep.check("calN_Omega_star_routes", np.abs(D.T @ D.conj() - alt).max(), 1e-9)
    for key, G in out.items():
        rep.check(f"{key}_hermitian", G.hermitian_defect(), 1e-11)
        rep.check(f"{key}_min_eigenvalue", float(np.linalg.eigvalsh(G.data).min()), 0.0, mode="above")
    out["report"] = rep
    return out


# ---------------------------------------------------------------------------
# the potential


def _log_derivative_modes(p, N):
    """f''/f' = sum u_k z^k (k < N) and g''/g' = sum v_k z^{-k} (2 <= k < N + 2)."""
    f = p.f.padded(N + 2)
    d1 = derivative(f)
    u = mul(derivative(d1), reciprocal(d1))
    g = p.g.padded(N + 2)
    e1 = derivative(g)
    v = mul(derivative(e1), reciprocal(e1))
    return u.coeff_range(np.arange(0, N)), v.coeff_range(-np.arange(2, N + 2))


def wp_potential(p, N=None):
    """S from the coefficient formula."""
    N = 2 * p.K if N is None else N
    u, v = _log_derivative_modes(p, N)
    ku = np.arange(0, N)
    kv = np.arange(2, N + 2)
    inner = float(np.pi * np.sum(np.abs(u) ** 2 / (ku + 1)))
    outer = float(np.pi * np.sum(np.abs(v) ** 2 / (kv - 1)))
    return PotentialValue(inner, outer, float(-4.0 * np.pi * np.log(abs(p.r))))


def wp_potential_quadrature(p, nodes=256, epsabs=1e-14, epsrel=1e-12):
    """S by polar quadrature of the two area integrals.

    The exterior integral is mapped to the disc by z = 1/zeta, which turns
    ``|g''/g'|^2 d^2 z`` into ``|g''/g'(1/zeta)|^2 |zeta|^{-4} d^2 zeta``.
    Angular sums use the trapezoid rule (spectrally accurate for smooth
    periodic integrands); radii use adaptive Gauss-Kronrod.
    """
    th = 2 * np.pi * np.arange(nodes) / nodes
    e = np.exp(1j * th)
    a = p.a
    ka = np.arange(len(a))
    fp = np.polynomial.polynomial.Polynomial(ka[1:] * a[1:])
    fpp = fp.deriv()
    b = p.b
    r, bneg = b[0], b[2:]
    j = np.arange(1, len(bneg) + 1)

    def interior(rho):
        z = rho * e
        h = fpp(z) / fp(z)
        return rho * np.mean(np.abs(h) ** 2) * 2 * np.pi

    def exterior(rho):
        if rho == 0:
            return 0.0
        w = 1.0 / (rho * e)
        gp = r - (j * bneg) @ (w[None, :] ** (-(j[:, None] + 1)))
        gpp = (j * (j + 1) * bneg) @ (w[None, :] ** (-(j[:, None] + 2)))
        h = gpp / gp
        return rho ** -3 * np.mean(np.abs(h) ** 2) * 2 * np.pi

    I = scipy.integrate.quad(interior, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=200)[0]
    E = scipy.integrate.quad(exterior, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=200)[0]
    return PotentialValue(float(I), float(E), float(-4.0 * np.pi * np.log(abs(p.r))))


# ---------------------------------------------------------------------------
# derivative formula and index theorem


def predicted_derivative(p, v, n):
    """2 Re[((6n^2-6n+1)/6) sum_k g_k c[2]_k c_k], the residue form of the contour integral."""
    ks = v.ks
    gk = schwarzian_modes(p, int(ks.max()))
    s = np.sum(gk[ks] * c_vector(2, ks) * v.modes)
    return float(2.0 * np.real(index_factor(n) / 6.0 * s))


def richardson(values, steps):
    """Richardson table for central differences (error series in t^2); returns the last entry."""
    steps = np.asarray(steps, float)
    T = [list(values)]
    for j in range(1, len(values)):
        prev = T[-1]
        row = []
        for i in range(len(prev) - 1):
            ratio = (steps[i] / steps[i + j]) ** 2
            row.append((ratio * prev[i + 1] - prev[i]) / (ratio - 1))
        T.append(row)
    return float(T[-1][0])


def derivative_check(gamma, v, n, steps=(1e-2, 5e-3, 2.5e-3), K=128, pair=None, rel_tol=1e-4, inner=None):
    """Central differences of t -> F_n(deform(gamma, v, t)) against the residue formula."""
    from .welding import weld

    steps = sorted((float(s) for s in steps), reverse=True)
    if inner is None:
        inner = max(K, inner_extent(gamma, K)) + 16
    diffs = []
    for t in steps:
        fp = f_n(deform(gamma, v, t), n, ladder=(K,), inner=inner).extrapolated
        fm = f_n(deform(gamma, v, -t), n, ladder=(K,), inner=inner).extrapolated
        diffs.append((fp - fm) / (2 * t))
    measured = richardson(diffs, steps)
    if pair is None:
        pair = weld(gamma, max(64, K))
    predicted = predicted_derivative(pair, v, n)
    rep = Report(f"derivative_check(n={n}, K={K})")
    rep.values.update({"steps": steps, "central_differences": diffs, "measured": measured, "predicted": predicted})
    scale = max(abs(predicted), 1e-300)
    rel = abs(measured - predicted) / scale if predicted != 0 else abs(measured)
    rep.check("relative_error", rel, rel_tol)
    return rep


def index_check(gamma, n_list, K, pair=None, tol=1e-5, ladder=None):
    """Index theorem and potential identity at truncation K.

    For each n the report holds
    ``|log det N_n - (6n^2-6n+1) log det N_1| / |log det N_1|`` with N from
    the pair route, and ``|F_n + (6n^2-6n+1) S / 12 pi| / |F_n|`` with F_n
    from the Pi route.
    """
    from .welding import weld

    if pair is None:
        pair = weld(gamma, max(64, 2 * K))
    ladder = sorted(set(ladder or (K // 2, K)))
    S = wp_potential(pair)
    rep = Report(f"index_check(K={K})")
    rep.values["S"] = S.to_json()
    G = {}
    for n in sorted(set([1] + list(n_list))):
        G[n] = g_n(pair, n, ladder=ladder)
    ln1 = G[1].at(K)
    trivial = abs(ln1) < 1e-14 and abs(S.total) < 1e-14
    for n in n_list:
        F = f_n(gamma, n, ladder=ladder)
        rep.values[f"n={n}"] = {"logdet_N": G[n].to_json(), "F_n": F.to_json()}
        a = index_factor(n)
        errs, perr = [], []
        for k in ladder:
            if trivial:
                errs.append(abs(G[n].at(k)))
                perr.append(abs(F.at(k)))
            else:
                errs.append(abs(G[n].at(k) - a * G[1].at(k)) / abs(G[1].at(k)))
                perr.append(abs(F.at(k) + a * S.total / (12 * np.pi)) / abs(F.at(k)))
        rep.values[f"index_errors_ladder[n={n}]"] = errs
        rep.values[f"potential_errors_ladder[n={n}]"] = perr
        rep.check(f"index_error[n={n}]", errs[-1], tol)
        rep.check(f"potential_error[n={n}]", perr[-1], tol)
        rep.values[f"bers_form[n={n}]"] = {"log_det_KK*": G[n].at(K), "log_det_frakA_frakA*": G[n].at(K)}
    return rep


# ---------------------------------------------------------------------------
# appendix inequalities


def weighted_norm_sq(coeffs, n):
    """||psi||^2_{n,2} for psi = sum coeffs[m] z^m, from the orthonormal basis c[n]_k z^{k-n}."""
    coeffs = np.asarray(coeffs, complex)
    m = np.arange(len(coeffs))
    return float(np.sum(np.abs(coeffs) ** 2 / c_vector(n, m + n) ** 2))


def product_norm_sides(phi, n):
    """(||phi^n||^2_n, (beta_1 beta_{n-1} / beta_n) ||phi||^2_1 ||phi^{n-1}||^2_{n-1})."""
    phi = np.asarray(phi, complex)
    pw = [np.array([1.0 + 0j]), phi]
    for _ in range(2, n + 1):
        pw.append(np.convolve(pw[-1], phi))
    lhs = weighted_norm_sq(pw[n], n)
    rhs = beta(1) * beta(n - 1) / beta(n) * weighted_norm_sq(phi, 1) * weighted_norm_sq(pw[n - 1], n - 1)
    return lhs, rhs


def diagonal_kernel(frakA, n, z):
    """(K[n] K[n]^*)(z, z) = sum_k |sum_l frakA_{lk} c[n]_l z^{l-n}|^2."""
    ls = np.arange(frakA.row_start, frakA.row_end + 1)
    vec = c_vector(n, ls) * z ** (ls - n)
    return float(np.sum(np.abs(vec @ frakA.data) ** 2))


def rng(seed):
    """Counter-based generator keyed by seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def appendix_checks(p, n, sample_points=None, trials=100, seed=0, K=None, degree=10, slack=1e-12):
    """Diagonal Bers-kernel bound at sample points and the product-norm inequality."""
    K = p.K if K is None else K
    gen = rng(seed)
    if sample_points is None:
        rad = 0.6 * np.sqrt(gen.random(25))
        sample_points = rad * np.exp(2j * np.pi * gen.random(25))
    FA = coefficient_matrices(p, n, K, rows=K)["frakA[n]"]
    rep = Report(f"appendix_checks(n={n})")
    worst = -np.inf
    for z in sample_points:
        val = diagonal_kernel(FA, n, z)
        bound = beta(n) / (1 - abs(z) ** 2) ** (2 * n)
        worst = max(worst, (val - bound) / bound)
    rep.values["diagonal_worst_relative_excess"] = worst
    rep.values["sample_points"] = len(sample_points)
    rep.check("diagonal_bound_violation", max(worst, 0.0), slack)
    worst_l = -np.inf
    for _ in range(trials):
        phi = gen.standard_normal(degree + 1) + 1j * gen.standard_normal(degree + 1)
        lhs, rhs = product_norm_sides(phi, n)
        worst_l = max(worst_l, (lhs - rhs) / rhs)
    rep.values["product_norm_worst_relative_excess"] = worst_l
    rep.values["trials"] = trials
    rep.check("product_norm_violation", max(worst_l, 0.0), slack)
    return rep
