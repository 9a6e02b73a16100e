"""Conformal welding gamma = g^{-1} o f as a dense linear solve.

On the circle, ``f o gamma^{-1}`` must equal ``g``, so its Fourier modes of
order >= 2 (in the variable ``w = gamma(z)``) vanish.  With
``m_{lk} = (1/2pi) int e^{i(k+1) theta} gamma^{-l-1} gamma' dtheta`` the
``l``-th mode of ``f o gamma^{-1}`` is ``sum_k m_{lk} a_k``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .diffeo import TWO_PI, CircleDiffeo, grid
from .errors import NewtonDivergence, ResidualTooLarge, SingularSystem, ZeroLeadingCoefficient
from .parallel import threads
from .pi import ensure_grid
from .series import INF, ZERO, LaurentSeries, _series_recip


@dataclass(frozen=True, eq=False)
class WeldingPair:
    """``f = z + sum a_k z^k`` on the disc, ``g = r z + b_0 + sum b_{-j} z^{-j}`` outside."""

    f: LaurentSeries
    g: LaurentSeries
    K: int
    residual: float = 0.0
    condition: float = 1.0
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.f.center != ZERO or self.g.center != INF:
            raise ValueError("f must be centered at zero and g at infinity")
        if abs(self.f.coeff(0)) > 1e-12 or abs(self.f.coeff(1) - 1) > 1e-12:
            raise ValueError("f must satisfy f(0) = 0 and f'(0) = 1")
        if self.g.hi != 1 or self.r == 0:
            raise ZeroLeadingCoefficient("g must grow like r z with r != 0")

    @property
    def r(self):
        return self.g.coeff(1)

    @property
    def a(self):
        """a_0 .. a_K."""
        return self.f.coeff_range(np.arange(0, self.K + 1))

    @property
    def b(self):
        """Local coefficients of g: r, b_0, b_{-1}, .., b_{-K}."""
        return self.g.coeff_range(np.arange(1, -self.K - 1, -1))

    @classmethod
    def from_coefficients(cls, a, b, **kw):
        """``a`` = a_0..a_K, ``b`` = [r, b_0, b_{-1}, ..]."""
        a = np.asarray(a, complex)
        b = np.asarray(b, complex)
        K = max(len(a) - 1, len(b) - 2)
        a = np.concatenate([a, np.zeros(K + 1 - len(a), complex)])
        b = np.concatenate([b, np.zeros(K + 2 - len(b), complex)])
        f = LaurentSeries.from_coeffs(a, 0, ZERO)
        g = LaurentSeries.from_coeffs(b[::-1], -K, INF)
        return cls(f, g, K, **kw)

    @classmethod
    def identity(cls, K):
        return cls.from_coefficients([0, 1], [1, 0], residual=0.0).with_order(K)

    def with_order(self, K):
        """The same pair carried as exact polynomials of order K."""
        a = np.zeros(K + 1, complex)
        b = np.zeros(K + 2, complex)
        aa, bb = self.a, self.b
        a[:min(K + 1, len(aa))] = aa[:K + 1]
        b[:min(K + 2, len(bb))] = bb[:K + 2]
        return WeldingPair.from_coefficients(a, b, residual=self.residual, condition=self.condition, info=self.info)

    def boundary_residual(self, gamma):
        """sup over the grid of |f(z) - g(gamma(z))|."""
        z = np.exp(1j * gamma.theta)
        return float(np.abs(self.f(z) - self.g(gamma.values)).max())

    def univalence_margin(self, rho=None):
        """Winding number of f' on |z| = rho (0 means no critical point inside)."""
        if rho is None:
            rho = 1.0 - 1.0 / (4 * self.K)
        th = grid(max(1024, 8 * self.K))
        fp = np.polynomial.polynomial.polyval(rho * np.exp(1j * th), np.arange(1, self.K + 1) * self.a[1:])
        ang = np.unwrap(np.angle(np.concatenate([fp, fp[:1]])))
        return int(np.round((ang[-1] - ang[0]) / TWO_PI)), float(np.abs(fp).min())

    def to_json(self):
        return {
            "K": self.K,
            "f": self.f.to_json(),
            "g": self.g.to_json(),
            "r": [float(self.r.real), float(self.r.imag)],
            "boundary_residual": float(self.residual),
            "condition": float(self.condition),
            "info": self.info,
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            LaurentSeries.from_json(d["f"]),
            LaurentSeries.from_json(d["g"]),
            int(d["K"]),
            float(d.get("boundary_residual", 0.0)),
            float(d.get("condition", 1.0)),
            dict(d.get("info", {})),
        )


def transport_matrix(gamma, lrange, K):
    """m_{lk} for l in lrange (inclusive pair) and k = 1..K."""
    l0, l1 = lrange
    ls = np.arange(l0, l1 + 1)
    M = gamma.grid_size
    lift, dz = gamma.lift, gamma.dz
    ks = np.arange(1, K + 1)
    idx = (-(ks + 1)) % M
    out = np.empty((len(ls), K), complex)
    batch = max(1, (1 << 21) // M)
    for s in range(0, len(ls), batch):
        ll = ls[s:s + batch]
        G = np.exp(-1j * np.outer(lift, ll + 1)) * dz[:, None]
        F = scipy.fft.fft(G, axis=0, workers=threads()) / M
        out[s:s + batch, :] = F[idx, :].T
    return ls, out


def weld(gamma, K, residual_tol=1e-6, max_condition=1e12):
    """Welding pair of gamma truncated at order K.

    The conditions "modes l >= 2 of f o gamma^{-1} vanish" are imposed for
    l = 2..2K and solved in the least-squares sense (a_1 = 1 fixed); g is
    read off from modes l <= 1.
    """
    K = int(K)
    gamma = ensure_grid(gamma, 2 * K + 2)
    gamma = gamma if gamma.grid_size >= 8 * K else gamma.resample(1 << int(np.ceil(np.log2(8 * K))))
    ls, m = transport_matrix(gamma, (-K, 2 * K), K)
    eq = ls >= 2
    A = m[eq][:, 1:]
    rhs = -m[eq][:, 0]
    a = np.zeros(K + 1, complex)
    a[1] = 1.0
    if K >= 2:
        sol, _, rank, sv = np.linalg.lstsq(A, rhs, rcond=None)
        cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
        if rank < A.shape[1] or not np.isfinite(cond) or cond > max_condition:
            raise SingularSystem(f"welding system is singular (condition {cond:.3g}); raise K or M")
        a[2:] = sol
    else:
        cond = 1.0
    modes = m @ a[1:]
    low = ls <= 1
    # g coefficients ordered r, b_0, b_{-1}, .. b_{-K}
    b = modes[low][::-1]
    pair = WeldingPair.from_coefficients(a, b, condition=cond)
    res = pair.boundary_residual(gamma)
    wind, fmin = pair.univalence_margin()
    info = {"equations": int(eq.sum()), "M": gamma.grid_size, "univalence_winding": wind, "min_abs_fprime": fmin}
    pair = WeldingPair(pair.f, pair.g, K, res, cond, info)
    if residual_tol is not None and res > residual_tol:
        raise ResidualTooLarge(f"boundary residual {res:.3g} exceeds {residual_tol:.3g}")
    return pair


def invert_pair(p):
    """Welding pair of gamma^{-1}.

    ``f_new(z) = conj(r) / conj(g(1/conj z))`` and
    ``g_new(z) = conj(r) / conj(f(1/conj z))``.  Both conjugated series are
    ``z^{-1}`` (resp. ``1/z``) times a series with nonzero constant term, so
    each side is one series reciprocal.
    """
    K = p.K
    if p.r == 0:
        raise ZeroLeadingCoefficient("r = 0")
    rb = np.conj(p.r)
    # conj(g(1/conj z)) = z^{-1} (conj r + conj b_0 z + conj b_{-1} z^2 + ..)
    q = rb * _series_recip(np.conj(p.b), K)
    a = np.concatenate([[0.0], q])
    # conj(f(1/conj z)) = (1/z) (1 + conj a_2 / z + ..)
    b = rb * _series_recip(np.conj(p.a[1:]), K + 2)
    out = WeldingPair.from_coefficients(a, b, residual=p.residual, condition=p.condition, info={"inverted": True})
    if abs(out.a[1] - 1) > 1e-12:
        raise ZeroLeadingCoefficient("normalization lost in inversion")
    return out


def gamma_from_pair(p, M=1024, tol=1e-14, maxiter=60):
    """The circle map g^{-1} o f, by Newton on the boundary parameterization.

    For each grid angle theta solve g(e^{i psi}) = f(e^{i theta}) for real psi.
    Points that fail from the direct seed are redone by continuation from
    their converged neighbour.
    """
    th = grid(M)
    F = p.f(np.exp(1j * th))
    gcoef = p.g.coeffs
    glo = p.g.lo
    dg = LaurentSeries.from_coeffs(gcoef * np.arange(glo, p.g.hi + 1), glo - 1, INF)

    def newton(psi, target):
        for _ in range(maxiter):
            w = np.exp(1j * psi)
            r = p.g(w) - target
            d = dg(w) * 1j * w
            step = np.real(np.conj(d) * r) / np.abs(d) ** 2
            psi = psi - step
            if np.all(np.abs(step) < tol):
                break
        w = np.exp(1j * psi)
        return psi, np.abs(p.g(w) - target)

    psi0 = np.angle(F / p.r)
    psi, err = newton(psi0, F)
    bad = np.flatnonzero(err > 1e3 * tol * max(1.0, np.abs(F).max()))
    for j in bad:
        seed = psi[j - 1] + TWO_PI / M if j > 0 else psi0[j]
        pj, ej = newton(np.array([seed]), F[j:j + 1])
        if ej[0] > 1e-10:
            raise NewtonDivergence(f"boundary Newton failed at theta = {th[j]:.6f}")
        psi[j] = pj[0]
    lift = np.unwrap(psi)
    # the lift of the identity-near branch starts in (-pi, pi]
    lift -= TWO_PI * np.round(lift[0] / TWO_PI)
    return CircleDiffeo(lift, {"kind": "from_pair", "K": p.K})
