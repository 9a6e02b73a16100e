"""Faber-type polynomial families and their coefficient matrices.

Two routes are provided.

* :func:`faber_bases` builds the polynomials themselves from ``g^{-1}`` and
  ``f^{-1}`` (powers, reciprocals, derivatives and exponent projection).
* :func:`coefficient_matrices` never forms the polynomials.  The generating
  functions ``g'(t)^q / (g(t) - w)`` and ``-f'(t)^q / (f(t) - w)`` satisfy
  short linear recurrences in the expansion index whose coefficients are
  those of ``g`` and ``f``; the recurrences are run directly on the series
  ``w = f(z)`` and ``w = g(z)``.  Monomial coefficients of the polynomials
  grow geometrically with the degree, so substituting them would lose
  accuracy, while the recurrences stay well conditioned.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .constants import beta, c_const, c_vector, index_factor
from .errors import SingularMatrix
from .matrix import IndexedMatrix
from .report import Report
from .series import (
    INF,
    ZERO,
    LaurentSeries,
    _series_pow,
    _series_recip,
    add,
    derivative,
    mul,
    pow_int,
    revert,
    scale,
    schwarzian,
)
from .welding import WeldingPair

# ---------------------------------------------------------------------------
# polynomial families by the series route


@dataclass(frozen=True)
class PolynomialFamily:
    """Members ``k = start..K`` as exact Laurent polynomials in ``w``."""

    name: str
    weight: int
    variable: str
    start: int
    members: tuple

    def __getitem__(self, k):
        return self.members[k - self.start]

    @property
    def ks(self):
        return np.arange(self.start, self.start + len(self.members))


def _project(s, lo, hi, center):
    """Exact polynomial made of the exponents lo..hi of s."""
    return LaurentSeries.polynomial(s.coeff_range(np.arange(lo, hi + 1)), lo=lo, center=center)


def _dpow(s, m):
    for _ in range(m):
        s = derivative(s)
    return s


def faber_bases(p, n, K):
    """u[1-n], v[1-n], U[n], V[n], p[n], q[n] for k = n..K."""
    N = K + 2 * n + 4
    g = p.g.padded(N)
    f = p.f.padded(N)
    ginv = revert(g, order=N)
    finv = revert(f, order=N)
    dg = derivative(ginv)
    df = derivative(finv)
    dg_1n, dg_n = pow_int(dg, 1 - n), pow_int(dg, n)
    df_1n, df_n = pow_int(df, 1 - n), pow_int(df, n)
    fam = {k: [] for k in ("u", "v", "U", "V", "p", "q")}
    for k in range(n, K + 1):
        cm, cp = c_const(1 - n, k), c_const(n, k)
        u = scale(_project(mul(pow_int(ginv, k + n - 1), dg_1n), 2 * n - 1, k + n - 1, ZERO), cm)
        v = scale(_project(mul(pow_int(finv, -k + n - 1), df_1n), -(k - n + 1), -1, INF), cm)
        U = scale(_project(mul(pow_int(ginv, k - n), dg_n), 0, k - n, ZERO), cp)
        V = scale(_project(mul(pow_int(finv, -k - n), df_n), -(k + n), -2 * n, INF), cp)
        pk = _project(_dpow(u.padded(k + n), 2 * n - 1), 0, k - n, ZERO)
        vd = _dpow(v, 2 * n - 1)
        qk = scale(_project(vd, -(k + n), -2 * n, INF), -1)
        for key, val in zip(("u", "v", "U", "V", "p", "q"), (u, v, U, V, pk, qk)):
            fam[key].append(val)
    return {
        "u": PolynomialFamily("u", 1 - n, "w", n, tuple(fam["u"])),
        "v": PolynomialFamily("v", 1 - n, "w_inverse", n, tuple(fam["v"])),
        "U": PolynomialFamily("U", n, "w", n, tuple(fam["U"])),
        "V": PolynomialFamily("V", n, "w_inverse", n, tuple(fam["V"])),
        "p": PolynomialFamily("p", n, "w", n, tuple(fam["p"])),
        "q": PolynomialFamily("q", n, "w_inverse", n, tuple(fam["q"])),
    }


# ---------------------------------------------------------------------------
# dense series windows and the recurrences


class _Window:
    """Local exponents ``start .. start + size - 1`` of series on one side."""

    def __init__(self, start, size):
        self.start = int(start)
        self.size = int(size)

    def one(self):
        e = np.zeros(self.size, complex)
        e[-self.start] = 1.0
        return e

    def mul(self, y, s1, c1):
        """y times the local series (s1, c1), kept on this window.

        The top entry loses exactness when ``s1 < 0``; windows are sized
        with a margin for that.
        """
        N = self.size
        full = np.convolve(y, c1[:N])
        out = np.zeros(N, complex)
        if s1 >= 0:
            out[s1:] = full[:N - s1]
        else:
            m = min(N, len(full) + s1)
            out[:m] = full[-s1:-s1 + m]
        return out

    def coeffs(self, y, local_exps):
        return y[np.asarray(local_exps) - self.start]


def _run_p(r, bneg, gam, m_max, levels, one, mul_w):
    """P^{[i]}_m(W) for i < levels, m <= m_max (derivatives in w).

    r P_m = gam_m + (W - b_0) P_{m-1} - sum_j b_{-j} P_{m-1-j}; the i-th
    derivative adds i P^{[i-1]}_{m-1}.
    """
    N = len(one)
    Y = np.zeros((levels, m_max + 1, N), complex)
    for m in range(m_max + 1):
        jmax = min(m - 1, len(bneg))
        idx = np.arange(m - 2, m - 2 - jmax, -1) if jmax > 0 else None
        for i in range(levels):
            acc = gam[m] * one if i == 0 else np.zeros(N, complex)
            if m >= 1:
                acc = acc + mul_w(Y[i, m - 1])
                if i >= 1:
                    acc += i * Y[i - 1, m - 1]
                if jmax > 0:
                    acc -= bneg[:jmax] @ Y[i, idx]
            Y[i, m] = acc / r
    return Y


def _run_q(a, phi, m_max, levels, one, mul_inv):
    """Q^{[i]}_m(W) for m = 1..m_max (index m), i < levels.

    Q_m = (phi_{m-1} + sum_j a_j Q_{m-j}) / W and
    Q^{[i]}_m = (sum_j a_j Q^{[i]}_{m-j} - i Q^{[i-1]}_m) / W.
    """
    N = len(one)
    K = len(a) - 1
    Y = np.zeros((levels, m_max + 1, N), complex)
    for m in range(1, m_max + 1):
        jmax = min(m - 1, K)
        idx = np.arange(m - 1, m - 1 - jmax, -1) if jmax > 0 else None
        for i in range(levels):
            acc = phi[m - 1] * one if i == 0 else np.zeros(N, complex)
            if jmax > 0:
                acc = acc + a[1:jmax + 1] @ Y[i, idx]
            if i >= 1:
                acc = acc - i * Y[i - 1, m]
            Y[i, m] = mul_inv(acc)
    return Y


class _PairData:
    """Local coefficient arrays of a welding pair."""

    def __init__(self, p):
        self.K = p.K
        self.a = np.asarray(p.a, complex)  # a_0 .. a_K
        self.b = np.asarray(p.b, complex)  # r, b_0, b_{-1}, ..
        self.r = self.b[0]
        self.b0 = self.b[1]
        self.bneg = self.b[2:]
        j = np.arange(1, len(self.bneg) + 1)
        self.gprime = np.concatenate([[self.r, 0.0], -j * self.bneg])  # local at infinity, start 0
        self.fprime = np.arange(1, self.K + 1) * self.a[1:]  # local at zero, start 0
        self.f_local = self.a[1:]  # start 1
        self.g_local = self.b  # start -1


def _gprime_pow(pd, q, n):
    return _series_pow(pd.gprime, q, n)


def _fprime_pow(pd, q, n):
    return _series_pow(pd.fprime, q, n)


def _low_p(pd, q, m_max, width):
    """[w^i] P_m for i < width (polynomial coefficients, truncated)."""
    one = np.zeros(width, complex)
    one[0] = 1.0

    def mul_w(y):
        out = -pd.b0 * y
        out[1:] += y[:-1]
        return out

    gam = _gprime_pow(pd, q, m_max + 1)
    return _run_p(pd.r, pd.bneg, gam, m_max, 1, one, mul_w)[0]


def _low_q(pd, q, m_max, width):
    """[w^{-i}] Q_m for i < width."""
    one = np.zeros(width, complex)
    one[0] = 1.0

    def mul_inv(y):
        out = np.zeros_like(y)
        out[1:] = y[:-1]
        return out

    phi = _fprime_pow(pd, q, m_max)
    return _run_q(pd.a, phi, m_max, 1, one, mul_inv)[0]


def _powers(win, y, s1, c1, count):
    """Powers W^0..W^{count-1} on the window, W given as local (s1, c1)."""
    out = [win.one()]
    for _ in range(1, count):
        out.append(win.mul(out[-1], s1, c1))
    return out


@dataclass
class _Expansions:
    """Series of every family member composed with f and g, times f'^q, g'^q."""

    n: int
    K: int
    R: int
    zero_p: _Window
    inf_p: _Window
    zero_q: _Window
    inf_q: _Window
    data: dict


def _expansions(p, n, K, R):
    pd = _PairData(p)
    mu = max(K + n, R + n)
    L2 = 2 * n
    # m ranges: u/p use P^{(n)}_{k+n-1}, U uses P^{(1-n)}_{k-n}, v/q use Q^{(n)}_{k-n+1}, V uses Q^{(1-n)}_{k+n}
    mp_n, mp_1n = K + n - 1, K - n
    mq_n, mq_1n = K - n + 1, K + n
    mmax = max(mp_n, mq_1n) + L2
    zero_p = _Window(0, R + n + 4)
    inf_p = _Window(-(mmax + 2), (mmax + 2) + R + n + 4 + mmax + 4)
    zero_q = _Window(-(mmax + 2), (mmax + 2) + R + n + 4 + mmax + 4)
    inf_q = _Window(0, R + n + 4)

    # W and 1/W on each side
    f_s, f_c = 1, pd.f_local
    g_s, g_c = -1, pd.g_local
    gm = pd.g_local.copy()
    gm[1] -= pd.b0  # g - b_0
    fm = np.concatenate([[-pd.b0], pd.f_local])  # f - b_0, start 0
    invf = _series_recip(pd.f_local, zero_q.size + 2)  # 1/f = z^{-1} invf
    invg = _series_recip(pd.g_local, inf_q.size + 2)  # 1/g = t invg

    mulw_zero = lambda y: zero_p.mul(y, 0, fm)  # noqa: E731
    mulw_inf = lambda y: inf_p.mul(y, -1, gm)  # noqa: E731
    mulinv_zero = lambda y: zero_q.mul(y, -1, invf)  # noqa: E731
    mulinv_inf = lambda y: inf_q.mul(y, 1, invg)  # noqa: E731

    gam_n = _gprime_pow(pd, n, mp_n + 1)
    gam_1n = _gprime_pow(pd, 1 - n, mp_1n + 1)
    phi_n = _fprime_pow(pd, n, mq_n)
    phi_1n = _fprime_pow(pd, 1 - n, mq_1n)

    d = {}
    d["Pn_f"] = _run_p(pd.r, pd.bneg, gam_n, mp_n, L2, zero_p.one(), mulw_zero)
    d["Pn_g"] = _run_p(pd.r, pd.bneg, gam_n, mp_n, L2, inf_p.one(), mulw_inf)
    d["P1n_f"] = _run_p(pd.r, pd.bneg, gam_1n, mp_1n, 1, zero_p.one(), mulw_zero)[0]
    d["P1n_g"] = _run_p(pd.r, pd.bneg, gam_1n, mp_1n, 1, inf_p.one(), mulw_inf)[0]
    d["Qn_f"] = _run_q(pd.a, phi_n, mq_n, L2, zero_q.one(), mulinv_zero)
    d["Qn_g"] = _run_q(pd.a, phi_n, mq_n, L2, inf_q.one(), mulinv_inf)
    d["Q1n_f"] = _run_q(pd.a, phi_1n, mq_1n, 1, zero_q.one(), mulinv_zero)[0]
    d["Q1n_g"] = _run_q(pd.a, phi_1n, mq_1n, 1, inf_q.one(), mulinv_inf)[0]

    # low parts removed from u (w^0..w^{2n-2}) and V (w^{-1}..w^{-(2n-1)})
    lowP = _low_p(pd, n, mp_n, 2 * n - 1)
    lowQ = _low_q(pd, 1 - n, mq_1n, 2 * n)
    d["lowP"], d["lowQ"] = lowP, lowQ
    d["fpow"] = _powers(zero_p, None, f_s, f_c, 2 * n - 1)
    d["gpow"] = _powers(inf_p, None, g_s, g_c, 2 * n - 1)
    d["finvpow"] = _powers(zero_q, None, -1, invf, 2 * n)
    d["ginvpow"] = _powers(inf_q, None, 1, invg, 2 * n)

    # multipliers f'^q and g'^q (local start 0)
    d["fp_n"] = _fprime_pow(pd, n, zero_q.size + 2)
    d["fp_1n"] = _fprime_pow(pd, 1 - n, zero_q.size + 2)
    d["gp_n"] = _gprime_pow(pd, n, inf_p.size + 2)
    d["gp_1n"] = _gprime_pow(pd, 1 - n, inf_p.size + 2)
    return _Expansions(n, K, R, zero_p, inf_p, zero_q, inf_q, d)


def _u_minus_low(ex, k, side):
    """P^{(n)}_m(W) minus its w^0..w^{2n-2} part, m = k + n - 1."""
    n = ex.n
    m = k + n - 1
    d = ex.data
    y = (d["Pn_f"] if side == "f" else d["Pn_g"])[0, m].copy()
    pw = d["fpow"] if side == "f" else d["gpow"]
    for i in range(2 * n - 1):
        y -= d["lowP"][m, i] * pw[i]
    return y


def _V_minus_low(ex, k, side):
    n = ex.n
    m = k + n
    d = ex.data
    y = (d["Q1n_f"] if side == "f" else d["Q1n_g"])[m].copy()
    pw = d["finvpow"] if side == "f" else d["ginvpow"]
    for i in range(1, 2 * n):
        y -= d["lowQ"][m, i] * pw[i]
    return y


def coefficient_matrices(p, n, K, rows=None):
    """Every coefficient matrix of weights 1-n and n, columns k = n..K.

    ``rows`` (default K) is the largest row index kept.  Keys carry the
    weight in brackets, hatted blocks (rows from 1-n) end in ``hat``, and the
    second-choice matrices use the prefixes ``frakA`` .. ``frakD``.
    ``frakP``/``frakM`` are read off directly from the expansions.
    """
    R = K if rows is None else int(rows)
    ex = _expansions(p, n, K, R)
    d = ex.data
    ks = np.arange(n, K + 1)
    pos = np.arange(n, R + 1)
    hat = np.arange(1 - n, R + 1)
    cm_rows_pos, cm_rows_hat = c_vector(1 - n, pos), c_vector(1 - n, hat)
    cp_rows_pos, cp_rows_hat = c_vector(n, pos), c_vector(n, hat)

    zp, ip, zq, iq = ex.zero_p, ex.inf_p, ex.zero_q, ex.inf_q
    mats = {key: np.zeros((len(hat if "hat" in key else pos), len(ks)), complex) for key in (
        "A1n", "Bhat1n", "Chat1n", "D1n", "An", "Bhatn", "Chatn", "Dn",
        "frakA", "frakP", "frakBhat", "frakM", "frakChat", "frakD")}

    for j, k in enumerate(ks):
        cm, cp = c_const(1 - n, k), c_const(n, k)
        # weight 1-n: u and v
        u_f = zp.mul(cm * _u_minus_low(ex, k, "f"), 0, d["fp_1n"])
        u_g = ip.mul(cm * _u_minus_low(ex, k, "g"), 0, d["gp_1n"])
        v_f = zq.mul(cm * d["Qn_f"][0, k - n + 1], 0, d["fp_1n"])
        v_g = iq.mul(cm * d["Qn_g"][0, k - n + 1], 0, d["gp_1n"])
        mats["A1n"][:, j] = zp.coeffs(u_f, pos + n - 1) / cm_rows_pos
        mats["Bhat1n"][:, j] = ip.coeffs(u_g, hat - n + 1) / cm_rows_hat
        mats["Chat1n"][:, j] = zq.coeffs(v_f, hat + n - 1) / cm_rows_hat
        mats["D1n"][:, j] = iq.coeffs(v_g, pos - n + 1) / cm_rows_pos
        # weight n, first choice: U and V
        U_f = zp.mul(cp * d["P1n_f"][k - n], 0, d["fp_n"])
        U_g = ip.mul(cp * d["P1n_g"][k - n], 0, d["gp_n"])
        V_f = zq.mul(cp * _V_minus_low(ex, k, "f"), 0, d["fp_n"])
        V_g = iq.mul(cp * _V_minus_low(ex, k, "g"), 0, d["gp_n"])
        mats["An"][:, j] = zp.coeffs(U_f, pos - n) / cp_rows_pos
        mats["Bhatn"][:, j] = ip.coeffs(U_g, hat + n) / cp_rows_hat
        mats["Chatn"][:, j] = zq.coeffs(V_f, hat - n) / cp_rows_hat
        mats["Dn"][:, j] = iq.coeffs(V_g, pos + n) / cp_rows_pos
        # weight n, second choice: p and q
        top = 2 * n - 1
        p_f = zp.mul(cm * d["Pn_f"][top, k + n - 1], 0, d["fp_n"])
        p_g = ip.mul(cm * d["Pn_g"][top, k + n - 1], 0, d["gp_n"])
        q_f = zq.mul(-cm * d["Qn_f"][top, k - n + 1], 0, d["fp_n"])
        q_g = iq.mul(-cm * d["Qn_g"][top, k - n + 1], 0, d["gp_n"])
        mats["frakA"][:, j] = zp.coeffs(p_f, pos - n) / cp_rows_pos
        mats["frakP"][:, j] = ip.coeffs(p_g, -(pos - n)) / cp_rows_pos
        mats["frakBhat"][:, j] = ip.coeffs(p_g, hat + n) / cp_rows_hat
        mats["frakM"][:, j] = zq.coeffs(q_f, -(pos + n)) / cp_rows_pos
        mats["frakChat"][:, j] = zq.coeffs(q_f, hat - n) / cp_rows_hat
        mats["frakD"][:, j] = iq.coeffs(q_g, pos + n) / cp_rows_pos

    w1, wn = 1 - n, n
    out = {}

    def put(name, key, row0, weight, kind="Coefficient"):
        out[name] = IndexedMatrix(row0, n, mats[key], weight, kind)

    put("A[1-n]", "A1n", n, w1)
    put("Bhat[1-n]", "Bhat1n", 1 - n, w1)
    put("Chat[1-n]", "Chat1n", 1 - n, w1)
    put("D[1-n]", "D1n", n, w1)
    put("A[n]", "An", n, wn)
    put("Bhat[n]", "Bhatn", 1 - n, wn)
    put("Chat[n]", "Chatn", 1 - n, wn)
    put("D[n]", "Dn", n, wn)
    put("frakA[n]", "frakA", n, wn)
    put("frakBhat[n]", "frakBhat", 1 - n, wn)
    put("frakChat[n]", "frakChat", 1 - n, wn)
    put("frakD[n]", "frakD", n, wn)
    put("frakP[n]", "frakP", n, wn, "Transition")
    put("frakM[n]", "frakM", n, wn, "Transition")
    # square restrictions l >= n of the hatted blocks
    for hatted, plain in (("Bhat[1-n]", "B[1-n]"), ("Chat[1-n]", "C[1-n]"), ("Bhat[n]", "B[n]"),
                          ("Chat[n]", "C[n]"), ("frakBhat[n]", "frakB[n]"), ("frakChat[n]", "frakC[n]")):
        h = out[hatted]
        out[plain] = h.block(n, h.row_end, n, h.col_end)
    return out


# ---------------------------------------------------------------------------
# transition matrices, Grunsky data, closed forms


def schwarzian_modes(p, kmax):
    """g_k = [z^{-k-2}] S(g) / c[2]_k for k = 0..kmax (g_0 = g_1 = 0)."""
    N = kmax + 8
    S = schwarzian(p.g.padded(N))
    return np.array([S.coeff(-k - 2) / c_const(2, k) for k in range(kmax + 1)])


def transition_matrices(p, n, K, mats=None):
    """frakP[n] = A[n]^{-1} frakA[n] and frakM[n] = D[n]^{-1} frakD[n]."""
    if mats is None:
        mats = coefficient_matrices(p, n, K)
    A, D = mats["A[n]"].truncate(K), mats["D[n]"].truncate(K)
    FA, FD = mats["frakA[n]"].truncate(K), mats["frakD[n]"].truncate(K)
    for name, X in (("A[n]", A), ("D[n]", D)):
        cond = np.linalg.cond(X.data)
        if not np.isfinite(cond) or cond > 1e13:
            raise SingularMatrix(f"{name} is numerically singular (condition {cond:.3g})")
    P = IndexedMatrix(n, n, np.linalg.solve(A.data, FA.data), n, "Transition")
    M = IndexedMatrix(n, n, np.linalg.solve(D.data, FD.data), n, "Transition")
    rep = Report(f"transition(n={n}, K={K})")
    for name, X in (("P", P), ("M", M)):
        lower = np.tril(X.data, -1)
        rep.check(f"{name}_strict_lower", float(np.abs(lower).max()) if lower.size else 0.0, 1e-10)
        rep.check(f"{name}_unit_diagonal", float(np.abs(np.diag(X.data) - 1).max()), 1e-10)
    rep.values["P_vs_direct"] = float(np.abs(P.data - mats["frakP[n]"].truncate(K).data).max())
    rep.values["M_vs_direct"] = float(np.abs(M.data - mats["frakM[n]"].truncate(K).data).max())
    return {"P": P, "M": M, "report": rep}


def frak_p2_closed_form(p, K):
    """frakP[2]_{lk} = delta_{lk} + c[-1]_l c[2]_{k-l} (k + l) g_{k-l} / c[2]_k."""
    gk = schwarzian_modes(p, K)
    idx = np.arange(2, K + 1)
    out = np.eye(len(idx), dtype=complex)
    for a, l in enumerate(idx):
        for b, k in enumerate(idx):
            if k > l:
                out[a, b] += c_const(-1, l) * c_const(2, k - l) * (k + l) * gk[k - l] / c_const(2, k)
    return IndexedMatrix(2, 2, out, 2, "Transition")


def grunsky_n1(p, K, interior=None):
    """Classical Grunsky blocks A[0], B[0], C[0], D[0] and the unitarity residual.

    The residual is the largest entry of
    ``[[B, D], [A, C]] [[B, D], [A, C]]^* - Id`` on the leading
    ``interior`` indices of each block (default K/2).
    """
    mats = coefficient_matrices(p, 1, K)
    A0, B0 = mats["A[1-n]"].truncate(K), mats["B[1-n]"].truncate(K)
    C0, D0 = mats["C[1-n]"].truncate(K), mats["D[1-n]"].truncate(K)
    G = np.block([[B0.data, D0.data], [A0.data, C0.data]])
    E = G @ G.conj().T - np.eye(2 * K)
    m = K // 2 if interior is None else int(interior)
    sel = np.concatenate([np.arange(m), K + np.arange(m)])
    res = float(np.abs(E[np.ix_(sel, sel)]).max())
    return {"A[0]": A0, "B[0]": B0, "C[0]": C0, "D[0]": D0, "equality_residual": res, "interior": m}


def joukowski_pair(c, K):
    """Synthetic pair with f = z and g = z + c/z (only g-side data is meaningful)."""
    b = np.zeros(K + 2, complex)
    b[0] = 1.0
    b[2] = c
    return WeldingPair.from_coefficients(np.array([0, 1], complex), b)


# ---------------------------------------------------------------------------
# the kernel route for frakA (optional cross-check)


def kernel_p_family(p, n, K):
    """p[n]_k from beta_n g'(z)^n / (g(z) - w)^{2n}.

    Expanding ``1/(g - w)^{2n} = sum_j binom(2n-1+j, j) w^j g^{-2n-j}``,
    the coefficient of ``w^j`` in ``p[n]_k`` is
    ``beta_n binom(2n-1+j, j) [z^{-k-n}](g'^n g^{-2n-j}) / c[n]_k``.
    """
    N = K + n + 4
    g = p.g.padded(N + 2 * n + K)
    gp_n = pow_int(derivative(g), n)
    ginv = pow_int(g, -1)
    polys = []
    base = pow_int(ginv, 2 * n)
    for k in range(n, K + 1):
        coeffs = []
        term = mul(gp_n, base)
        for j in range(0, k - n + 1):
            coeffs.append(beta(n) * comb(2 * n - 1 + j, j) * term.coeff(-k - n) / c_const(n, k))
            term = mul(term, ginv)
        polys.append(LaurentSeries.polynomial(coeffs, 0, ZERO))
    return polys


def frak_a_from_kernel(p, n, K, rows=None):
    """frakA[n] by composing the kernel-route polynomials with f (slow path)."""
    R = K if rows is None else rows
    polys = kernel_p_family(p, n, K)
    N = R + n + 2
    f = p.f.padded(N)
    fpn = pow_int(derivative(f), n)
    pos = np.arange(n, R + 1)
    out = np.zeros((len(pos), K - n + 1), complex)
    fpow = [LaurentSeries.polynomial([1.0], 0, ZERO, order=N)]
    for _ in range(K):
        fpow.append(mul(fpow[-1], f))
    for j, poly in enumerate(polys):
        acc = LaurentSeries.polynomial([0.0], 0, ZERO, order=N)
        for e, cf in enumerate(poly.coeffs):
            acc = add(acc, scale(fpow[e], cf))
        s = mul(acc, fpn)
        out[:, j] = s.coeff_range(pos - n) / c_vector(n, pos)
    return IndexedMatrix(n, n, out, n, "Coefficient")


# ---------------------------------------------------------------------------
# the Schwarzian limit


def _eps_mul(P, Q, order):
    """Product of two series in eps whose coefficients are LaurentSeries."""
    out = []
    for m in range(order + 1):
        acc = None
        for i in range(m + 1):
            if i < len(P) and m - i < len(Q):
                t = mul(P[i], Q[m - i])
                acc = t if acc is None else add(acc, t)
        out.append(acc)
    return out


def _eps_recip(D, order):
    """1/D for a series in eps with D[0] = 1."""
    out = [D[0] * 0 + 1]
    for m in range(1, order + 1):
        acc = None
        for i in range(1, m + 1):
            if i < len(D):
                t = mul(D[i], out[m - i])
                acc = t if acc is None else add(acc, t)
        out.append(scale(acc, -1))
    return out


def schwarzian_limit(h, n, order=None):
    """Diagonal limit of (n d_z + (n-1) d_w) of the weight-n kernel of h.

    With ``eps = w - z`` the bracket
    ``h'(z)^{1-n} h'(w)^n / (h(z) - h(w)) - 1/(z - w)`` equals
    ``(1 - X) / eps`` where
    ``X = (1 + 2A eps + 3B eps^2)^n / (1 + A eps + B eps^2) + O(eps^3)``,
    ``A = h''/(2h')`` and ``B = h'''/(6h')``.  The operator becomes
    ``n d_z - d_eps`` in the variables (z, eps), so the limit is
    ``n F_0' - F_1`` with ``F_j = -X_{j+1}``.
    """
    if order is not None:
        h = h.padded(order + 4)
    d1 = derivative(h)
    d2 = derivative(d1)
    d3 = derivative(d2)
    inv = pow_int(d1, -1)
    A = scale(mul(d2, inv), 0.5)
    B = scale(mul(d3, inv), 1.0 / 6.0)
    one = A * 0 + 1
    num = [one, scale(A, 2.0), scale(B, 3.0)]
    powr = [one]
    for _ in range(n):
        powr = _eps_mul(powr, num, 2)
    X = _eps_mul(powr, _eps_recip([one, A, B], 2), 2)
    F0 = scale(X[1], -1)
    F1 = scale(X[2], -1)
    lhs = add(scale(derivative(F0), n), scale(F1, -1))
    rhs = scale(schwarzian(h), -index_factor(n) / 6.0)
    lo, hi = max(lhs.lo, rhs.lo), min(lhs.hi, rhs.hi)
    if order is not None:
        hi = min(hi, order)
    ks = np.arange(lo, hi + 1)
    residual = float(np.abs(lhs.coeff_range(ks) - rhs.coeff_range(ks)).max()) if len(ks) else 0.0
    return {"lhs": lhs, "rhs": rhs, "residual": residual}
