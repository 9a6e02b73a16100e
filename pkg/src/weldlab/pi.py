"""Transfer matrices Pi[gamma;n] and the identities they satisfy.

``Pi[gamma;n]_{lk}`` is the ``(l-n)``-th Fourier coefficient of
``gamma^{k-n} gamma'^n`` rescaled by ``c[n]_k / c[n]_l``.  One FFT per
column builds a whole window.
"""

import numpy as np
import scipy.fft

from .constants import c_const, c_vector, sgn
from .diffeo import compose, invert, schwarzian_on_circle
from .errors import AliasRisk, WindowTooSmall
from .matrix import IndexedMatrix, max_residual
from .parallel import threads
from .report import Report

# modes of gamma^j gamma'^n beyond |j| max|gamma'| + GUARD are below roundoff
GUARD = 64


def _pow2(x):
    return 1 << max(3, int(np.ceil(np.log2(max(int(x), 8)))))


def required_grid(gamma, L, n=0):
    """Smallest power-of-two grid that resolves columns |k| <= L without aliasing."""
    hi = gamma.derivative_range()[1]
    return _pow2(max(4 * (L + abs(n)), 2 * ((L + abs(n)) * hi + GUARD)))


def ensure_grid(gamma, L, n=0):
    """gamma resampled (band-limited) so that weight-n columns up to L are safe."""
    need = required_grid(gamma, L, n)
    return gamma if gamma.grid_size >= need else gamma.resample(need)


def inner_extent(gamma, K):
    """Inner truncation for products whose outer indices stay within K.

    Column k of Pi couples to rows near k times |gamma'|, so a row l needs
    columns up to about l / min|gamma'|; the same ratio covers gamma^{-1}.
    """
    lo, hi = gamma.derivative_range()
    ratio = max(1.0 / lo, hi)
    return int(np.ceil(1.25 * K * ratio)) + 48


def pi_window(gamma, n, rows, cols, resample=False):
    """Dense window of Pi[gamma;n] for logical rows r0..r1 and columns c0..c1.

    ``rows`` and ``cols`` are inclusive (start, end) pairs.  Raises AliasRisk
    when the grid cannot resolve the window unless ``resample`` is set.
    """
    r0, r1 = map(int, rows)
    c0, c1 = map(int, cols)
    L = max(abs(r0), abs(r1), abs(c0), abs(c1))
    need = required_grid(gamma, L, n)
    if gamma.grid_size < need:
        if not resample:
            raise AliasRisk(f"grid M = {gamma.grid_size} too small for window {L} at weight {n}; need {need}")
        gamma = gamma.resample(need)
    M = gamma.grid_size
    lift = gamma.lift
    dzn = gamma.dz ** n
    ls = np.arange(r0, r1 + 1)
    ks = np.arange(c0, c1 + 1)
    rows_idx = (ls - n) % M
    out = np.empty((len(ls), len(ks)), complex)
    batch = max(1, (1 << 21) // M)
    for s in range(0, len(ks), batch):
        kk = ks[s:s + batch]
        G = np.exp(1j * np.outer(lift, kk - n)) * dzn[:, None]
        F = scipy.fft.fft(G, axis=0, workers=threads()) / M
        out[:, s:s + batch] = F[rows_idx, :]
    out *= c_vector(n, ks)[None, :] / c_vector(n, ls)[:, None]
    return IndexedMatrix(r0, c0, out, n, "Pi")


def pi_matrix(gamma, n, L, resample=False):
    """Pi[gamma;n] on the square window |l|, |k| <= L."""
    return pi_window(gamma, n, (-L, L), (-L, L), resample=resample)


def _base(weight):
    """Blocks of weight n >= 1 and of weight 1 - n both start at index n."""
    return weight if weight >= 1 else 1 - weight


def pi_blocks(P, K):
    """Pi_1, Pi_2, hat Pi_2, hat Pi_3, Pi_4 truncated at index K.

    Row (column) ``l`` of a block built from negative indices holds the
    Pi entry at ``-l``, matching the block definitions.
    """
    b = _base(P.weight)
    lo = 1 - b
    if P.row_start > -K or P.row_end < K or P.col_start > -K or P.col_end < K:
        raise WindowTooSmall(f"Pi window {P.row_start}..{P.row_end} does not cover |index| <= {K}")

    def take(rs, cs):
        ri = np.asarray(rs) - P.row_start
        ci = np.asarray(cs) - P.col_start
        return P.data[np.ix_(ri, ci)]

    pos = np.arange(b, K + 1)
    hat = np.arange(lo, K + 1)
    w = P.weight
    return {
        "Pi1": IndexedMatrix(b, b, take(pos, pos), w, "PiBlock"),
        "Pi2": IndexedMatrix(b, b, take(-pos, pos), w, "PiBlock"),
        "Pi2hat": IndexedMatrix(lo, b, take(-hat, pos), w, "PiBlock"),
        "Pi3hat": IndexedMatrix(b, lo, take(pos, -hat), w, "PiBlock"),
        "Pi4": IndexedMatrix(lo, lo, take(-hat, -hat), w, "PiBlock"),
    }


def pi_blocks_n(gamma, n, K, resample=True):
    """Blocks of Pi[gamma;n] computed only on the rows and columns they use."""
    P = pi_matrix(gamma, n, K, resample=resample)
    return pi_blocks(P, K)


def s_matrix_n2(gamma, K, modes=None):
    """The four blocks of S[gamma;2] (indices 2..K) from Schwarzian modes.

    ``S[gamma;2]_{lj} = sgn_2(j) c[2]_{l-j} c[-1]_j (j + l) gamma_{l-j} / c[2]_l``.
    """
    if modes is None:
        need = _pow2(8 * (2 * K + 4))
        g = gamma if gamma.grid_size >= need else gamma.resample(need)
        _, ks, m = schwarzian_on_circle(g, kmax=2 * K + 2)
        modes = dict(zip(ks.tolist(), m))
    idx = np.arange(2, K + 1)

    def entry_block(ls, js):
        out = np.empty((len(ls), len(js)), complex)
        for a, l in enumerate(ls):
            for b, j in enumerate(js):
                d = l - j
                out[a, b] = sgn(2, j) * c_const(2, d) * c_const(-1, j) * (j + l) * modes[d] / c_const(2, l)
        return out

    return {
        "S1": IndexedMatrix(2, 2, entry_block(idx, idx), 2, "SBlock"),
        "S2": IndexedMatrix(2, 2, entry_block(-idx, idx), 2, "SBlock"),
        "S3": IndexedMatrix(2, 2, entry_block(idx, -idx), 2, "SBlock"),
        "S4": IndexedMatrix(2, 2, entry_block(-idx, -idx), 2, "SBlock"),
    }


def _block_product(gamma, n, Kin, L):
    """Left and right sides of the block identity for weight n >= 0.

    Returns the product matrix; rows and columns are the concatenation of
    indices b..Kin (top) and the negated block (bottom); inner sums run to L.
    """
    b = max(n, 1)
    rows = np.arange(b, Kin + 1)
    Pw = pi_window(gamma, n, (-max(Kin, L), max(Kin, L)), (b, L), resample=True)

    def take(rs):
        return Pw.data[np.asarray(rs) - Pw.row_start, :]

    P1, P2 = take(rows), take(-rows)
    left = np.block([[P1, P2.conj()], [P2, P1.conj()]])
    right = np.block([[P1.conj().T, -P2.conj().T], [-P2.T, P1.T]])
    return left @ right


def verify_pi_identities(gamma, n, K, margin=None, inner=None, gamma_inv=None):
    """Residuals of the Pi identities on the interior window.

    (a) Pi[gamma^-1;n] Pi[gamma;n] = Id, (b) Pi[gamma^-1;n] = Pi[gamma;1-n]^*,
    (c) the block identity at n = 1, (d) the block identity with S-blocks at
    n = 2, (e) the weight-0 block identity, plus conjugate symmetry.
    Residuals are max-abs entry errors over |index| <= K - margin; inner
    sums run over ``inner`` (default: wide enough to converge).
    """
    if margin is None:
        margin = K // 4
    Kin = K - margin
    L = inner if inner is not None else max(K, inner_extent(gamma, Kin))
    if gamma_inv is None:
        gamma_inv = invert(gamma)
    rep = Report(f"pi_identities(n={n}, K={K})")
    rep.values.update({"n": n, "K": K, "interior": Kin, "inner": L})

    # (a)
    left = pi_window(gamma_inv, n, (-Kin, Kin), (-L, L), resample=True)
    right = pi_window(gamma, n, (-L, L), (-Kin, Kin), resample=True)
    prod = left.data @ right.data
    rep.check("inverse_product", np.abs(prod - np.eye(2 * Kin + 1)).max(), 1e-8)

    # (b)
    Pinv = pi_window(gamma_inv, n, (-Kin, Kin), (-Kin, Kin), resample=True)
    Pdual = pi_window(gamma, 1 - n, (-Kin, Kin), (-Kin, Kin), resample=True)
    rep.check("adjoint_dual", max_residual(Pinv, Pdual.H), 1e-8)

    # conjugate symmetry
    rep.check("conjugate_symmetry", np.abs(Pinv.data.conj() - Pinv.data[::-1, ::-1]).max(), 1e-10)

    if n in (0, 1):
        key = "block_identity_n1" if n == 1 else "block_identity_n0"
        prod = _block_product(gamma, n, Kin, L)
        rep.check(key, np.abs(prod - np.eye(len(prod))).max(), 1e-8)
    if n == 1:
        # Pi_1[1] = Pi_1[0] and Pi_2[1] = -Pi_2[0]
        P1 = pi_blocks(pi_matrix(gamma, 1, K, resample=True), K)
        P0 = pi_blocks(pi_matrix(gamma, 0, K, resample=True), K)
        d = max(max_residual(P1["Pi1"], P0["Pi1"]), float(np.abs(P1["Pi2"].data + P0["Pi2"].data).max()))
        rep.check("weight_one_zero_relation", d, 1e-8)
    if n == 2:
        prod = _block_product(gamma, 2, Kin, L)
        S = s_matrix_n2(gamma, Kin)
        lhs = np.eye(len(prod)) + np.block([[S["S1"].data, S["S3"].data], [S["S2"].data, S["S4"].data]])
        rep.check("block_identity_n2", np.abs(prod - lhs).max(), 1e-8)
        rep.check("S1_hermitian", S["S1"].hermitian_defect(), 1e-9)
        rep.check("S4_conj_S1", float(np.abs(S["S4"].data - S["S1"].data.conj()).max()), 1e-9)
        rep.check("S3_conj_S2", float(np.abs(S["S3"].data - S["S2"].data.conj()).max()), 1e-9)
    return rep


def verify_multiplicativity(gamma1, gamma2, n, K, margin=None):
    """Pi[gamma1;n] Pi[gamma2;n] against Pi[gamma2 o gamma1;n] on the interior."""
    if margin is None:
        margin = K // 4
    Kin = K - margin
    comp = compose(gamma2, gamma1)
    L = max(K, inner_extent(gamma1, Kin), inner_extent(gamma2, Kin), inner_extent(comp, Kin))
    A = pi_window(gamma1, n, (-Kin, Kin), (-L, L), resample=True)
    B = pi_window(gamma2, n, (-L, L), (-Kin, Kin), resample=True)
    C = pi_window(comp, n, (-Kin, Kin), (-Kin, Kin), resample=True)
    rep = Report(f"pi_multiplicativity(n={n}, K={K})")
    rep.check("multiplicativity", np.abs(A.data @ B.data - C.data).max(), 1e-9)
    return rep


def verify_mobius(sigma, n, K):
    """Pi_1[sigma;n] Pi_1[sigma;n]^* = Id and hat Pi_2[sigma;n] = 0 for Mobius sigma."""
    L = max(K, inner_extent(sigma, K))
    W = pi_window(sigma, n, (-K, K), (n, L), resample=True)
    P1 = W.data[n - W.row_start:, :]
    rep = Report(f"pi_mobius(n={n}, K={K})")
    rep.check("unitary_Pi1", np.abs(P1 @ P1.conj().T - np.eye(K - n + 1)).max(), 1e-9)
    hat = W.block(-K, n - 1, n, K).data
    rep.check("hat_Pi2_zero", float(np.abs(hat).max()), 1e-9)
    return rep
