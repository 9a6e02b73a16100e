"""Smooth orientation preserving circle diffeomorphisms on a uniform grid.

A diffeomorphism is stored through its angle lift ``Theta`` sampled at
``theta_j = 2 pi j / M``.  The periodic part ``Theta(theta) - theta`` is
smooth, so derivatives and off-grid evaluation are spectral.

The derivative convention follows the complex variable ``z = e^{i theta}``:
``dz`` holds ``d gamma / dz = Theta'(theta) gamma / z``.
"""

from dataclasses import dataclass, field

import numpy as np

from .constants import c_const
from .errors import BadMobiusParameter, NewtonDivergence, NotMonotone

TWO_PI = 2.0 * np.pi


def grid(M):
    return TWO_PI * np.arange(M) / M


def _spectral_derivative(values, order=1, denoise=16.0):
    """d^order/dtheta^order of a smooth periodic grid function.

    Modes within ``denoise`` times the roundoff floor (median magnitude of
    the upper half band) are dropped, so repeated differentiation does not
    amplify them. ``denoise=0`` disables the filter.
    """
    M = len(values)
    k = np.fft.fftfreq(M, 1.0 / M)
    F = np.fft.fft(values)
    if denoise:
        a = np.abs(F)
        floor = np.median(a[np.abs(k) > M // 4])
        F[a < denoise * floor] = 0
    F *= (1j * k) ** order
    if M % 2 == 0:
        F[M // 2] = 0
    out = np.fft.ifft(F)
    return out.real if np.isrealobj(values) else out


@dataclass(frozen=True, eq=False)
class CircleDiffeo:
    lift: np.ndarray
    spec: dict = field(default=None, compare=False)

    def __post_init__(self):
        lift = np.array(self.lift, dtype=float)
        lift.setflags(write=False)
        object.__setattr__(self, "lift", lift)
        M = len(lift)
        if M < 8 or M & (M - 1):
            raise ValueError("grid size must be a power of two >= 8")
        ext = np.concatenate([lift, [lift[0] + TWO_PI]])
        if np.any(np.diff(ext) <= 0):
            raise NotMonotone("lift is not strictly increasing")

    @property
    def grid_size(self):
        return len(self.lift)

    M = grid_size

    @property
    def theta(self):
        return grid(self.grid_size)

    @property
    def periodic(self):
        return self.lift - self.theta

    @property
    def lift_derivative(self):
        return 1.0 + _spectral_derivative(self.periodic)

    @property
    def values(self):
        return np.exp(1j * self.lift)

    cached_values = values

    @property
    def dz(self):
        z = np.exp(1j * self.theta)
        return self.lift_derivative * self.values / z

    cached_dz = dz

    def derivative_range(self):
        d = self.lift_derivative
        return float(d.min()), float(d.max())

    def modes(self):
        """Fourier coefficients of the periodic part (numpy fft order)."""
        return np.fft.fft(self.periodic) / self.grid_size

    def eval_lift(self, phi, tol=1e-16):
        """Theta at arbitrary angles, by the trigonometric interpolant."""
        phi = np.asarray(phi, dtype=float)
        M = self.grid_size
        P = self.modes()
        k = np.fft.fftfreq(M, 1.0 / M).astype(int)
        if M % 2 == 0:
            P = P.copy()
            P[M // 2] = 0
        keep = np.abs(P) > tol * max(1.0, np.abs(P).max())
        keep[0] = True
        kk, PP = k[keep], P[keep]
        flat = phi.ravel()
        out = np.empty(flat.shape)
        for s in range(0, len(flat), 4096):
            ph = flat[s:s + 4096]
            out[s:s + 4096] = ph + np.real(np.exp(1j * np.outer(ph, kk)) @ PP)
        return out.reshape(phi.shape)

    def eval_lift_derivative(self, phi, tol=1e-16):
        phi = np.asarray(phi, dtype=float)
        M = self.grid_size
        P = self.modes()
        k = np.fft.fftfreq(M, 1.0 / M).astype(int)
        if M % 2 == 0:
            P = P.copy()
            P[M // 2] = 0
        keep = np.abs(P) > tol * max(1.0, np.abs(P).max())
        kk, PP = k[keep], P[keep]
        flat = phi.ravel()
        out = np.empty(flat.shape)
        for s in range(0, len(flat), 4096):
            ph = flat[s:s + 4096]
            out[s:s + 4096] = 1.0 + np.real(np.exp(1j * np.outer(ph, kk)) @ (1j * kk * PP))
        return out.reshape(phi.shape)

    def resample(self, M):
        """The same diffeomorphism on a grid of size M (band-limited)."""
        M = int(M)
        if M == self.grid_size:
            return self
        F = np.fft.fft(self.periodic)
        N = self.grid_size
        G = np.zeros(M, complex)
        h = min(N, M) // 2
        G[:h] = F[:h]
        G[-h + 1:] = F[-h + 1:]
        if M > N:
            # split the Nyquist mode between +-N/2
            G[h] = 0.5 * F[h]
            G[-h] = 0.5 * F[h]
        p = np.real(np.fft.ifft(G)) * (M / N)
        return CircleDiffeo(grid(M) + p, self.spec)

    def smoothness_tail(self):
        """Largest Fourier mode magnitude of gamma beyond M/4."""
        F = np.fft.fft(self.values) / self.grid_size
        k = np.abs(np.fft.fftfreq(self.grid_size, 1.0 / self.grid_size))
        return float(np.abs(F[k > self.grid_size // 4]).max())

    def to_json(self):
        return {"spec": self.spec, "M": self.grid_size}


@dataclass(frozen=True)
class TangentVector:
    """Holomorphic part v(z) = sum_{k>=2} c_k z^(k+1); ``modes[i]`` is c_{i+2}."""

    modes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "modes", np.asarray(self.modes, dtype=complex))

    @classmethod
    def single(cls, k, c):
        m = np.zeros(k - 1, complex)
        m[k - 2] = c
        return cls(m)

    @property
    def ks(self):
        return np.arange(2, 2 + len(self.modes))

    def field(self, theta):
        """s(theta) = 2 Im sum c_k e^{ik theta}."""
        theta = np.asarray(theta, dtype=float)
        e = np.exp(1j * np.multiply.outer(theta, self.ks))
        return 2.0 * np.imag(e @ self.modes)

    def field_derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        e = np.exp(1j * np.multiply.outer(theta, self.ks))
        return 2.0 * np.imag(e @ (1j * self.ks * self.modes))


def wp_norm(v):
    """2 pi sum (k^3 - k) |c_k|^2."""
    k = v.ks.astype(float)
    return float(TWO_PI * np.sum((k ** 3 - k) * np.abs(v.modes) ** 2))


def mobius_map(w):
    """sigma_w as a callable, together with its derivative."""
    w = complex(w)
    if abs(w) <= 1:
        raise BadMobiusParameter(f"|w| = {abs(w)} must exceed 1")
    lam = (1 - w) / (1 - np.conj(w))
    wb = np.conj(w)

    def sigma(z):
        return lam * (1 - z * wb) / (z - w)

    def dsigma(z):
        return lam * (wb * w - 1) / (z - w) ** 2

    return sigma, dsigma


def _flow_modes(spec):
    modes = spec.get("modes", [])
    ks = np.array([int(m[0]) for m in modes], dtype=int)
    cs = np.array([complex(m[1], m[2]) for m in modes], dtype=complex)
    return ks, cs


def flow_field(spec, theta):
    ks, cs = _flow_modes(spec)
    if len(ks) == 0:
        return np.zeros_like(theta), np.zeros_like(theta)
    e = np.exp(1j * np.multiply.outer(theta, ks))
    return 2.0 * np.imag(e @ cs), 2.0 * np.imag(e @ (1j * ks * cs))


def make_diffeo(spec, M=1024):
    """Build an identity, rotation, mobius or flow diffeomorphism.

    ``flow`` has lift ``theta + s(theta)`` with
    ``s(theta) = sum 2 Im(c_k e^{ik theta})`` from ``spec["modes"]``.
    """
    kind = spec["kind"]
    th = grid(M)
    if kind == "identity":
        return CircleDiffeo(th.copy(), dict(spec))
    if kind == "rotation":
        return CircleDiffeo(th + float(spec["alpha"]), dict(spec))
    if kind == "mobius":
        w = spec["w"]
        w = complex(*w) if isinstance(w, (list, tuple)) else complex(w)
        sigma, _ = mobius_map(w)
        lift = np.unwrap(np.angle(sigma(np.exp(1j * th))))
        lift -= TWO_PI * np.round(lift[0] / TWO_PI)
        return CircleDiffeo(lift, dict(spec))
    if kind == "flow":
        s, ds = flow_field(spec, th)
        if np.max(np.abs(ds)) >= 1:
            raise NotMonotone("flow needs max|s'| < 1")
        return CircleDiffeo(th + s, dict(spec))
    raise ValueError(f"unknown diffeo kind {kind!r}")


def flow_spec(modes):
    """Spec for the flow family from a {k: c_k} mapping."""
    return {"kind": "flow", "modes": [[int(k), float(np.real(c)), float(np.imag(c))] for k, c in sorted(modes.items())]}


# reference input: s = 0.1 sin 2 theta - 0.06 sin 3 theta
REFERENCE_SPEC = flow_spec({2: 0.05, 3: -0.03})


def compose(outer, inner):
    """outer o inner on the inner grid."""
    lift = outer.eval_lift(inner.lift)
    return CircleDiffeo(lift, {"kind": "compose", "outer": outer.spec, "inner": inner.spec})


def invert(gamma, tol=1e-13, maxiter=50):
    """gamma^{-1} by per-point Newton on the lift, bisection as fallback."""
    M = gamma.grid_size
    th = gamma.theta
    ext_x = np.concatenate([gamma.lift - TWO_PI, gamma.lift, gamma.lift + TWO_PI])
    ext_y = np.concatenate([th - TWO_PI, th, th + TWO_PI])
    phi = np.interp(th, ext_x, ext_y)
    done = np.zeros(M, bool)
    for _ in range(maxiter):
        r = gamma.eval_lift(phi) - th
        d = gamma.eval_lift_derivative(phi)
        step = r / d
        phi = phi - step
        done = np.abs(step) < tol
        if done.all():
            break
    bad = np.abs(gamma.eval_lift(phi) - th) > 1e3 * tol
    if bad.any():
        phi[bad] = _bisect(gamma, th[bad], ext_x, ext_y, tol)
    out = CircleDiffeo(phi, {"kind": "inverse", "of": gamma.spec})
    return out


def _bisect(gamma, targets, ext_x, ext_y, tol):
    j = np.searchsorted(ext_x, targets)
    a = ext_y[np.maximum(j - 1, 0)].copy()
    b = ext_y[np.minimum(j, len(ext_y) - 1)].copy()
    for _ in range(200):
        m = 0.5 * (a + b)
        left = gamma.eval_lift(m) < targets
        a = np.where(left, m, a)
        b = np.where(left, b, m)
        if np.max(b - a) < tol:
            break
    else:
        raise NewtonDivergence("inversion failed to bracket")
    return 0.5 * (a + b)


def deform(gamma, v, t):
    """gamma_t = h_t o gamma with h_t the flow of t * s, s the field of v."""
    if t == 0:
        return gamma
    Th = gamma.lift
    s = v.field(Th)
    ds = v.field_derivative(Th)
    if np.max(np.abs(t * ds)) >= 1:
        raise NotMonotone("deformation step too large")
    return CircleDiffeo(Th + t * s, {"kind": "deform", "base": gamma.spec, "t": float(t)})


def schwarzian_on_circle(gamma, kmax=None):
    """S(gamma) w.r.t. z on the grid, and its c[2]-normalized modes.

    Returns ``(values, ks, modes)`` with
    ``S(gamma)(e^{i theta}) = sum_k modes[k] c[2]_k e^{i(k-2) theta}``.
    """
    M = gamma.grid_size
    z = np.exp(1j * gamma.theta)
    p = gamma.periodic
    t1 = 1.0 + _spectral_derivative(p, 1)
    # S_theta(Theta) = phi'' - phi'^2 / 2 with phi = log Theta'
    phi = np.log(t1)
    d1 = _spectral_derivative(phi, 1)
    d2 = _spectral_derivative(phi, 2)
    s_theta = d2 - 0.5 * d1 ** 2
    # chain rule through z = e^{i theta} and gamma = e^{i Theta}
    S = (1.0 - t1 ** 2 - 2.0 * s_theta) / (2.0 * z ** 2)
    F = np.fft.fft(S) / M
    if kmax is None:
        kmax = M // 4
    ks = np.arange(-kmax, kmax + 1)
    modes = np.array([F[(k - 2) % M] / c_const(2, k) for k in ks])
    return S, ks, modes


def normalize_three_points(gamma):
    """Post-compose with the disc automorphism sending gamma(1), gamma(-i), gamma(-1) to 1, -i, -1."""
    src = np.exp(1j * gamma.eval_lift(np.array([0.0, 1.5 * np.pi, np.pi])))
    dst = np.array([1.0, -1j, -1.0])

    def cross(z, p):
        return (z - p[0]) * (p[1] - p[2]) / ((z - p[2]) * (p[1] - p[0]))

    vals = gamma.values
    u = cross(vals, src)
    # invert the cross ratio for the destination triple
    a, b, c = dst
    out = (a * (b - c) - c * u * (b - a)) / ((b - c) - u * (b - a))
    lift = np.unwrap(np.angle(out))
    lift -= TWO_PI * np.round((lift[0] - 0.0) / TWO_PI)
    return CircleDiffeo(lift, {"kind": "normalized", "of": gamma.spec})
