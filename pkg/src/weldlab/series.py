"""Truncated Laurent series with explicit windows.

A :class:`LaurentSeries` stores the coefficients of ``z**lo .. z**hi``.  The
``center`` says where the series is expanded, and with it where the omitted
(unknown) terms live:

* ``"zero"``: the series is known through ``z**hi``; higher terms are unknown.
* ``"infinity"``: the series is known down to ``z**lo``; lower terms are unknown.

Internally everything runs in the local variable ``t = z`` (at zero) or
``t = 1/z`` (at infinity).  In that variable a series is a start exponent
``s`` and a coefficient vector ``c`` of length ``L``: it knows every
coefficient through ``t**(s + L - 1)``, which we call its *order*.  The
bookkeeping rule for products is then simply that the result has length
``min(L_a, L_b)``, so no operation ever claims more terms than its operands
can support.

Example: a geometric series and its reciprocal.

>>> s = LaurentSeries.polynomial([1, -1], order=5)
>>> reciprocal(s).coeffs.real
array([1., 1., 1., 1., 1., 1.])

Composition with a polynomial inner series.

>>> w2 = LaurentSeries.polynomial([0, 0, 1], order=4)
>>> inner = LaurentSeries.polynomial([0, 1, 1], order=4)
>>> r = compose(w2, inner)
>>> r.lo, r.coeffs.real
(2, array([1., 2., 1.]))
"""

from dataclasses import dataclass

import numpy as np

from .errors import NotInvertible, ShapeMismatch, WindowUnderflow, ZeroLeadingCoefficient

ZERO = "zero"
INF = "infinity"


def _as_center(center):
    if center in (ZERO, "AtZero", 0):
        return ZERO
    if center in (INF, "AtInfinity", "inf"):
        return INF
    raise ValueError(f"unknown center {center!r}")


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    lo: int
    hi: int
    coeffs: np.ndarray
    center: str = ZERO

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "center", _as_center(self.center))
        if len(c) != self.hi - self.lo + 1:
            raise ValueError("coeffs length must equal hi - lo + 1")

    # construction -----------------------------------------------------------

    @classmethod
    def from_coeffs(cls, coeffs, lo=0, center=ZERO):
        coeffs = np.asarray(coeffs, dtype=complex)
        return cls(int(lo), int(lo) + len(coeffs) - 1, coeffs, center)

    @classmethod
    def polynomial(cls, coeffs, lo=0, center=ZERO, order=None):
        """An exact Laurent polynomial ``sum coeffs[j] z**(lo+j)``.

        ``order`` pads with the (exactly known) zero coefficients so the
        polynomial carries as many terms as later operations need.
        """
        s = cls.from_coeffs(coeffs, lo, center)
        return s if order is None else s.padded(order)

    @classmethod
    def monomial(cls, k, center=ZERO, coeff=1.0, order=None):
        return cls.polynomial([coeff], lo=k, center=center, order=order)

    @classmethod
    def from_local(cls, start, coeffs, center):
        coeffs = np.asarray(coeffs, dtype=complex)
        if _as_center(center) == ZERO:
            return cls(start, start + len(coeffs) - 1, coeffs, ZERO)
        hi = -start
        return cls(hi - len(coeffs) + 1, hi, coeffs[::-1], INF)

    # local view -------------------------------------------------------------

    @property
    def local(self):
        """(start, coefficients) in the local variable."""
        if self.center == ZERO:
            return self.lo, self.coeffs
        return -self.hi, self.coeffs[::-1]

    @property
    def order(self):
        """Highest local exponent known: ``hi`` at zero, ``-lo`` at infinity."""
        return self.hi if self.center == ZERO else -self.lo

    def padded(self, order):
        """Extend the window with zeros, asserting the omitted terms vanish."""
        s, c = self.local
        n = order - s + 1
        if n <= len(c):
            return self
        return LaurentSeries.from_local(s, np.concatenate([c, np.zeros(n - len(c), complex)]), self.center)

    def truncated(self, order):
        s, c = self.local
        if order > s + len(c) - 1:
            raise WindowUnderflow(f"order {order} exceeds known order {s + len(c) - 1}")
        n = max(order - s + 1, 0)
        return LaurentSeries.from_local(s, c[:n], self.center) if n else LaurentSeries.from_local(order, [0], self.center)

    def coeff(self, k):
        """Coefficient of z**k, zero outside the stored window."""
        if self.lo <= k <= self.hi:
            return self.coeffs[k - self.lo]
        return 0j

    def coeff_range(self, ks):
        ks = np.asarray(ks)
        out = np.zeros(ks.shape, complex)
        m = (ks >= self.lo) & (ks <= self.hi)
        out[m] = self.coeffs[ks[m] - self.lo]
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        # Horner in z over the window, then the z**lo factor
        acc = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc * z ** self.lo

    evaluate = __call__

    # arithmetic sugar -------------------------------------------------------

    def __add__(self, other):
        return add(self, _coerce(other, self))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, scale(_coerce(other, self), -1))

    def __rsub__(self, other):
        return add(_coerce(other, self), scale(self, -1))

    def __neg__(self):
        return scale(self, -1)

    def __mul__(self, other):
        if np.isscalar(other):
            return scale(self, other)
        return mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, p):
        return pow_int(self, p)

    def __repr__(self):
        return f"LaurentSeries(lo={self.lo}, hi={self.hi}, center={self.center!r})"

    # serialization ----------------------------------------------------------

    def to_json(self):
        return {
            "lo": int(self.lo),
            "hi": int(self.hi),
            "center": self.center,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, d):
        coeffs = [complex(re, im) for re, im in d["coeffs"]]
        return cls(int(d["lo"]), int(d["hi"]), np.array(coeffs, complex), d["center"])


def _coerce(x, like):
    if isinstance(x, LaurentSeries):
        return x
    s, c = like.local
    acc = _add_const((s, np.zeros(len(c), complex)), complex(x))
    return LaurentSeries.from_local(acc[0], acc[1], like.center)


# local-array kernels ---------------------------------------------------------
# Each works on (start, coeffs) pairs in the local variable.


def _lmul(a, b):
    (sa, ca), (sb, cb) = a, b
    n = min(len(ca), len(cb))
    return sa + sb, np.convolve(ca[:n], cb[:n])[:n]


def _series_recip(c, n):
    """First n coefficients of 1/c for a power series with c[0] != 0."""
    c = np.asarray(c, complex)[:n]
    if len(c) < n:
        c = np.concatenate([c, np.zeros(n - len(c), complex)])
    x = np.array([1.0 / c[0]])
    m = 1
    while m < n:
        m = min(2 * m, n)
        # Newton step x <- x (2 - c x), exact through 2m terms
        e = np.convolve(c[:m], x)[:m]
        e = -e
        e[0] += 2.0
        x = np.convolve(x, e)[:m]
    return x


def _lrecip(a):
    s, c = a
    k = np.flatnonzero(c)
    if len(c) == 0 or c[0] == 0:
        raise ZeroLeadingCoefficient("reciprocal of a series with vanishing leading coefficient"
                                     + ("" if len(k) == 0 else f" (first nonzero at offset {k[0]})"))
    return -s, _series_recip(c, len(c))


def _series_pow(c, p, n):
    """First n coefficients of c**p (integer p, c[0] != 0), Miller recurrence."""
    c = np.asarray(c, complex)[:n]
    if len(c) < n:
        c = np.concatenate([c, np.zeros(n - len(c), complex)])
    out = np.zeros(n, complex)
    out[0] = c[0] ** p
    inv = 1.0 / c[0]
    for k in range(1, n):
        j = np.arange(1, k + 1)
        out[k] = np.dot((p * j - (k - j)) * c[j], out[k - j]) * inv / k
    return out


def _lpow(a, p):
    s, c = a
    if p == 0:
        return 0, np.concatenate([[1.0 + 0j], np.zeros(len(c) - 1, complex)])
    if p == 1:
        return s, np.array(c, complex)
    if c[0] == 0:
        raise ZeroLeadingCoefficient("power of a series with vanishing leading coefficient")
    if p > 0 and p <= 8:
        out = (s, np.array(c, complex))
        for _ in range(p - 1):
            out = _lmul(out, a)
        return out
    return p * s, _series_pow(c, p, len(c))


def _ladd(a, b):
    (sa, ca), (sb, cb) = a, b
    s = min(sa, sb)
    top = min(sa + len(ca), sb + len(cb)) - 1
    out = np.zeros(top - s + 1, complex)
    na = min(len(ca), top - sa + 1)
    nb = min(len(cb), top - sb + 1)
    out[sa - s:sa - s + na] += ca[:na]
    out[sb - s:sb - s + nb] += cb[:nb]
    return s, out


def _trunc_local(a, order):
    s, c = a
    have = s + len(c) - 1
    if order > have:
        raise WindowUnderflow(f"requested order {order} exceeds supportable order {have}")
    return s, c[:order - s + 1]


def _finish(a, center, order):
    if order is not None:
        a = _trunc_local(a, order)
    return LaurentSeries.from_local(a[0], a[1], center)


def _same_center(ops):
    center = ops[0].center
    for o in ops[1:]:
        if o.center != center:
            raise ShapeMismatch("operands must share a center")
    return center


# public algebra --------------------------------------------------------------


def add(a, b, order=None):
    center = _same_center([a, b])
    return _finish(_ladd(a.local, b.local), center, order)


def scale(a, x):
    s, c = a.local
    return LaurentSeries.from_local(s, c * x, a.center)


def mul(a, b, order=None):
    center = _same_center([a, b])
    return _finish(_lmul(a.local, b.local), center, order)


def reciprocal(a, order=None):
    return _finish(_lrecip(a.local), a.center, order)


def pow_int(a, p, order=None):
    return _finish(_lpow(a.local, int(p)), a.center, order)


def log(a, order=None):
    """log of ``a / (a_s t**s)`` plus ``log a_s``.

    The monomial factor ``t**s`` of the leading term is extracted (it has no
    series logarithm); the remainder has unit constant term.
    """
    s, c = a.local
    if len(c) == 0 or c[0] == 0:
        raise ZeroLeadingCoefficient("log of a series with vanishing leading coefficient")
    u = c / c[0]
    n = len(u)
    du = np.arange(1, n) * u[1:]
    q = np.convolve(du, _series_recip(u, n - 1))[:n - 1] if n > 1 else np.zeros(0)
    out = np.zeros(n, complex)
    out[0] = np.log(c[0])
    out[1:] = q / np.arange(1, n)
    return _finish((0, out), a.center, order)


def algebra(kind, operands, order=None, exponent=None):
    """Dispatch ``kind`` in {add, mul, reciprocal, pow_int, log}."""
    if kind == "add":
        out = operands[0]
        for o in operands[1:]:
            out = add(out, o)
        return out if order is None else out.truncated(order)
    if kind == "mul":
        out = operands[0]
        for o in operands[1:]:
            out = mul(out, o)
        return out if order is None else out.truncated(order)
    if kind == "reciprocal":
        return reciprocal(operands[0], order)
    if kind == "pow_int":
        return pow_int(operands[0], exponent, order)
    if kind == "log":
        return log(operands[0], order)
    raise ValueError(f"unknown algebra kind {kind!r}")


def derivative(a):
    """d/dz; the exponent window shifts down by one.

    The structural zero produced by differentiating a z**0 term at the
    leading end of the window is dropped, so ``s'`` keeps a usable lead.
    """
    k = np.arange(a.lo, a.hi + 1)
    c = a.coeffs * k
    lo, hi = a.lo - 1, a.hi - 1
    if len(c) > 1 and a.center == ZERO and a.lo == 0:
        c, lo = c[1:], lo + 1
    elif len(c) > 1 and a.center == INF and a.hi == 0:
        c, hi = c[:-1], hi - 1
    return LaurentSeries(lo, hi, c, a.center)


# composition -----------------------------------------------------------------


def _strip_leading(a):
    """Drop exact zeros at the leading end of a local series."""
    s, c = a
    nz = np.flatnonzero(c)
    if len(nz) == 0 or nz[0] == 0:
        return s, c
    return s + int(nz[0]), c[nz[0]:]


def _add_const(a, value):
    """Add an exact constant at local exponent 0."""
    if value == 0:
        return a
    s, c = a
    top = s + len(c) - 1
    if top < 0:
        return a  # the constant sits in the unknown part
    if s > 0:
        c = np.concatenate([np.zeros(s, complex), c])
        s = 0
    else:
        c = np.array(c, complex)
    c[-s] += value
    return s, c


def _power_sum(coeffs, lo, x):
    """sum_j coeffs[j] * x**(lo+j) for a local series x with nonzero lead.

    Inner powers are cached incrementally; negative powers use 1/x.
    """
    hi = lo + len(coeffs) - 1
    acc = None
    pos = None
    for j in range(max(lo, 1), hi + 1):
        pos = x if pos is None else _lmul(pos, x)
        cj = coeffs[j - lo]
        if cj != 0:
            term = (pos[0], cj * pos[1])
            acc = term if acc is None else _ladd(acc, term)
    if lo < 0:
        xr = _lrecip(x)
        neg = None
        for j in range(-1, lo - 1, -1):
            neg = xr if neg is None else _lmul(neg, xr)
            if j > hi:
                continue
            cj = coeffs[j - lo]
            if cj != 0:
                term = (neg[0], cj * neg[1])
                acc = term if acc is None else _ladd(acc, term)
    if acc is None:
        # only a constant (or nothing): exact to the inner series' length
        acc = (0, np.zeros(len(x[1]), complex))
    if lo <= 0 <= hi:
        acc = _add_const(acc, coeffs[-lo])
    return acc


def _dense(a, start, m):
    """Local coefficients for exponents start .. start+m-1 (zeros below a's start)."""
    s, c = a
    if start + m - 1 > s + len(c) - 1:
        raise WindowUnderflow("series too short for the requested coefficients")
    out = np.zeros(m, complex)
    for i in range(m):
        e = start + i
        if e >= s:
            out[i] = c[e - s]
    return out


def compose(outer, inner, order=None):
    """outer(inner(z)).

    Matching centers compose a truncated outer series: at zero the inner
    series must vanish at 0, at infinity it must have a simple pole.  When
    the centers differ the outer series is read as an exact Laurent
    polynomial (for instance a Faber polynomial in ``w`` composed with ``g``
    at infinity).
    """
    si, ci = _strip_leading(inner.local)
    inner = LaurentSeries.from_local(si, ci, inner.center)
    if len(ci) == 0 or ci[0] == 0:
        raise ShapeMismatch("inner series has a vanishing leading coefficient")
    rc = inner.center
    if outer.center == inner.center:
        if inner.center == ZERO:
            if si < 1:
                raise ShapeMismatch("inner series must map 0 to 0")
            x = inner.local
        else:
            if si != -1:
                raise ShapeMismatch("inner series must have a simple pole at infinity")
            x = _lrecip(inner.local)  # the outer's local variable 1/w, of start 1
        so, co = outer.local
        acc = _power_sum(co, so, x)
        # terms of outer beyond its order would start at x-start * (order+1)
        cap = x[0] * (so + len(co)) - 1
        have = acc[0] + len(acc[1]) - 1
        if cap < have:
            acc = (acc[0], acc[1][:cap - acc[0] + 1])
        return _finish(acc, rc, order)
    # mismatched centers: exact polynomial outer in w (at zero) or in 1/w
    if inner.center == INF and si != -1:
        raise ShapeMismatch("inner series at infinity must have a simple pole")
    if inner.center == ZERO and si < 1:
        raise ShapeMismatch("inner series must map 0 to 0")
    acc = _power_sum(outer.coeffs, outer.lo, inner.local)
    return _finish(acc, rc, order)


def revert(s, order=None):
    """Compositional inverse.

    At zero ``s = a1 z + O(z^2)`` with ``a1 != 0``; at infinity
    ``s = r z + O(1)`` with ``r != 0``, handled through ``1/s(1/u)``.
    """
    st, c = _strip_leading(s.local)
    if s.center == ZERO:
        if st != 1:
            raise NotInvertible("series must be a1 z + O(z^2)")
        if c[0] == 0:
            raise NotInvertible("vanishing linear coefficient")
        n = len(c)
        x = _revert_power(c, n)
        out = (1, x)
        return _finish(out, ZERO, order)
    if st != -1 or c[0] == 0:
        raise NotInvertible("series at infinity must be r z + O(1) with r != 0")
    # G(u) = 1/s(1/u) is u/r + O(u^2) at zero
    g = _lrecip((st, c))
    x = _revert_power(g[1], len(g[1]))
    inv = _lrecip((1, x))
    return _finish(inv, INF, order)


def _revert_power(c, n):
    """Coefficients of the inverse of t*(c0 + c1 t + ...), through t**n.

    Newton iteration x <- x - (s(x) - t) / s'(x) on the composition residual,
    doubling the number of correct terms per step, plus one polish pass.
    """
    c = np.asarray(c, complex)
    x = np.zeros(n, complex)
    x[0] = 1.0 / c[0]
    dc = np.arange(1, n + 1) * c[:n]  # s'(t) = sum (j+1) c_j t^j
    m = 1
    passes = 0
    while passes < 2:
        m = min(2 * m, n)
        if m == n:
            passes += 1
        xs = (1, x[:m])
        res = _dense(_power_sum(c[:m], 1, xs), 1, m)
        res[0] -= 1.0
        d = _dense(_power_sum(dc[:m], 0, xs), 0, m)
        x[:m] = x[:m] - np.convolve(res, _series_recip(d, m))[:m]
    return x


def schwarzian(s):
    """S(s) = s'''/s' - (3/2) (s''/s')^2."""
    d1 = derivative(s)
    d2 = derivative(d1)
    d3 = derivative(d2)
    inv = reciprocal(d1)
    q = mul(d2, inv)
    return add(mul(d3, inv), scale(mul(q, q), -1.5))
