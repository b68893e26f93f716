"""Carleman kernel k_gamma(v, w), its symmetrisation p_gamma, and the
weighted kernel integrals used by the bound checks.

Every kernel function takes the three rotation invariants |v|, |w| and
|v - w| (broadcastable arrays). The constant angular kernel b = ell_b/|S^{d-1}|
enters as an overall factor, so ell_b = |S^{d-1}| recovers the hard-sphere
kernel with b = 1.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from . import bessel
from .errors import DiagonalSingularityError, InfeasibleError, PreconditionError, QuadratureError
from .model import ModelSpec, WeightSpec, maxwellian_r
from .quadrature import gauss_legendre, graded_rule, sphere_area


@dataclass(frozen=True)
class KernelPoint:
    v_mag: float
    w_mag: float
    dist: float

    def __post_init__(self):
        if not self.dist > 0:
            raise DiagonalSingularityError("dist must be positive")
        if self.v_mag < 0 or self.w_mag < 0:
            raise PreconditionError("speeds must be nonnegative")
        slack = 1e-12 * (self.v_mag + self.w_mag + self.dist)
        if not (abs(self.v_mag - self.w_mag) - slack <= self.dist <= self.v_mag + self.w_mag + slack):
            raise PreconditionError("triangle inequality violated")

    def swapped(self):
        return KernelPoint(self.w_mag, self.v_mag, self.dist)


@dataclass
class BoundReport:
    quantity: str
    columns: list
    samples: list
    sup_ratio: float
    passed: bool
    tolerance: float = 0.0
    meta: dict = field(default_factory=dict)


def _check_dist(dist):
    if np.any(np.asarray(dist) <= 0):
        raise DiagonalSingularityError("kernel is singular on the diagonal v = w")


def _gauss_exponent(v_mag, w_mag, dist):
    # dist + (v-w).w/dist written with (|v|-|w|)(|v|+|w|) to limit cancellation
    return (dist * dist + (v_mag - w_mag) * (v_mag + w_mag)) / (2.0 * dist)


def kernel_hs(v_mag, w_mag, dist, d=3):
    """Closed-form kernel for gamma = d - 2 with b = 1."""
    v_mag, w_mag, dist = (np.asarray(x, float) for x in (v_mag, w_mag, dist))
    _check_dist(dist)
    e = _gauss_exponent(v_mag, w_mag, dist)
    out = 2.0 ** (d - 1) * (2 * np.pi) ** -0.5 / dist * np.exp(-0.5 * e * e)
    return out if out.ndim else float(out)


def kernel_hs_vec(v, w):
    """Same kernel from velocity vectors, using the exponent (|v-w| + (v-w).w/|v-w|)^2 / 2."""
    v = np.asarray(v, float)
    w = np.asarray(w, float)
    d = v.shape[-1]
    u = v - w
    dist = np.sqrt(np.sum(u * u, axis=-1))
    _check_dist(dist)
    e = dist + np.sum(u * w, axis=-1) / dist
    return 2.0 ** (d - 1) * (2 * np.pi) ** -0.5 / dist * np.exp(-0.5 * e * e)


def vperp(v_mag, w_mag, dist):
    """|V_perp|: component of (v+w)/2 orthogonal to v - w."""
    v2 = np.asarray(v_mag, float) ** 2
    w2 = np.asarray(w_mag, float) ** 2
    d2 = np.asarray(dist, float) ** 2
    full = (2 * v2 + 2 * w2 - d2) / 4.0
    along = (v2 - w2) ** 2 / (4.0 * d2)
    return np.sqrt(np.maximum(full - along, 0.0))


def _pow(x, p):
    """x**p with cheap special cases for the exponents that occur most."""
    if p == 0:
        return np.ones_like(x)
    if p == 1:
        return x
    if p == 2:
        return x * x
    if p == -1:
        return 1.0 / x
    if p == 0.5:
        return np.sqrt(x)
    if p == -0.5:
        return 1.0 / np.sqrt(x)
    return x ** p


def _i_gamma_bessel(a, delta, gamma, d, n=16, inhouse=False):
    """Polar reduction of the hyperplane integral, vectorised over (a, delta)."""
    q = (gamma - d + 2) / 2.0
    nd = d - 1                      # dimension of the hyperplane
    nu = (nd - 2) / 2.0
    const = sphere_area(nd - 1) * np.sqrt(np.pi) * gamma_fn(nu + 0.5)
    a = np.asarray(a, float)[..., None]
    delta = np.asarray(delta, float)[..., None]

    def radial(rho, a):
        z = a * rho
        if nu == 0 and inhouse:
            return np.exp(-0.5 * (rho - a) ** 2) * bessel.i0e(z)
        return np.exp(-0.5 * (rho - a) ** 2) * bessel.scaled_ratio(nu, z)

    # [0, 1] in rho = delta sinh(u): resolves (rho^2 + delta^2)^q for small delta
    x, w = gauss_legendre(2 * n)
    umax = np.arcsinh(1.0 / delta)
    u = 0.5 * (x + 1.0) * umax
    wu = 0.5 * w * umax
    rho = delta * np.sinh(u)
    jac = _pow(delta, nd + 2 * q) * _pow(np.sinh(u), nd - 1) * _pow(np.cosh(u), 2 * q + 1)
    total = np.sum(jac * radial(rho, a) * wu, axis=-1)
    # bulk of the Gaussian around rho = a
    lo = np.maximum(1.0, a - 9.0)
    hi = np.maximum(a + 9.0, 10.0)
    xb, wb = gauss_legendre(n)
    for k in range(3):
        l = lo + (hi - lo) * k / 3.0
        h = lo + (hi - lo) * (k + 1) / 3.0
        rr = 0.5 * (h - l) * xb + 0.5 * (h + l)
        ww = 0.5 * (h - l) * wb
        total = total + np.sum(_pow(rr, nd - 1) * _pow(rr * rr + delta * delta, q) * radial(rr, a) * ww, axis=-1)
    return const * total


def _i_gamma_tensor(a, delta, gamma, n=24, n_theta=48):
    """d = 3 only: 2-D quadrature in polar coordinates about the point a e1."""
    q = (gamma - 1) / 2.0
    a = np.asarray(a, float)[..., None, None]
    delta = np.asarray(delta, float)[..., None, None]
    th, wth = gauss_legendre(n_theta, 0.0, np.pi)
    cos_t = np.cos(th)[:, None]
    wth = 2.0 * wth[:, None]

    def ring(rho, wr):
        g = np.exp(-0.5 * (a * a + rho * rho + 2 * a * rho * cos_t))
        return np.sum(np.sum(g * wth, axis=-2) * wr[..., 0, :], axis=-1)

    x, w = gauss_legendre(2 * n)
    umax = np.arcsinh(1.0 / delta)
    u = 0.5 * (x + 1.0) * umax
    rho = delta * np.sinh(u)                                  # shape (..., 1, 2n)
    wr = 0.5 * w * umax * delta ** (2 + 2 * q) * np.sinh(u) * np.cosh(u) ** (2 * q + 1)
    total = ring(rho, wr)
    top = float(np.max(a)) + 12.0
    edges = np.linspace(1.0, top, int(np.ceil(top - 1.0)) + 1)
    for l, h in zip(edges[:-1], edges[1:]):
        rr, ww = gauss_legendre(n, l, h)
        rr = np.broadcast_to(rr, a.shape[:-2] + (1, n))
        wr = ww * rr * (rr * rr + delta * delta) ** q
        total = total + ring(rr, wr)
    return total


_TABLES = {}


def _table(gamma, d, amax, dmax):
    """Quintic spline of log I_gamma over (|V_perp|, log dist), cached per (gamma, d)."""
    from scipy.interpolate import RectBivariateSpline

    key = (float(gamma), int(d))
    hit = _TABLES.get(key)
    if hit is not None and hit[1] >= amax and hit[2] >= dmax:
        return hit
    amax = max(20.0, 1.25 * amax, hit[1] if hit else 0.0)
    dmax = max(60.0, 1.25 * dmax, hit[2] if hit else 0.0)
    na = int(16 * amax) + 1
    a = np.linspace(0.0, amax, na)
    x = np.linspace(np.log(1e-20), np.log(dmax), 541)
    vals = np.log(_i_gamma_bessel(a[:, None], np.exp(x)[None, :], gamma, d))
    entry = (RectBivariateSpline(a, x, vals, kx=5, ky=5), amax, dmax)
    _TABLES[key] = entry
    return entry


def _i_gamma_table(a, delta, gamma, d):
    a, delta = np.broadcast_arrays(a, delta)
    spl, _, _ = _table(gamma, d, float(np.max(a, initial=0.0)), float(np.max(delta, initial=0.0)))
    x = np.log(np.maximum(delta, 1e-20))
    return np.exp(spl.ev(a.ravel(), x.ravel())).reshape(a.shape)


def i_gamma(vperp_mag, dist, gamma, d=3, method="bessel", check=False):
    """Hyperplane integral I_gamma(|V_perp|, |v-w|).

    method: "bessel" (polar reduction, scipy Bessel), "bessel-inhouse" (same
    reduction with the local I0 evaluation, d = 3), "tensor" (2-D quadrature,
    d = 3) or "table" (cached spline of the bessel path, relative error around
    1e-9, used for matrix assembly). With check=True the quadrature order is
    doubled and compared.
    """
    a = np.asarray(vperp_mag, float)
    delta = np.asarray(dist, float)
    _check_dist(delta)
    if gamma <= -d:
        raise PreconditionError("gamma must exceed -d")
    if gamma == d - 2:
        out = np.full(np.broadcast(a, delta).shape, (2 * np.pi) ** ((d - 1) / 2))
        return out if out.ndim else float(out)
    if method == "table":
        out = _i_gamma_table(a, delta, gamma, d)
        return out if out.ndim else float(out)
    if method == "tensor":
        if d != 3:
            raise PreconditionError("tensor quadrature path is implemented for d = 3")
        f = lambda m: _i_gamma_tensor(a, delta, gamma, n=m)
        n0 = 24
    elif method in ("bessel", "bessel-inhouse"):
        inh = method == "bessel-inhouse"
        if inh and d != 3:
            raise PreconditionError("in-house Bessel path is implemented for d = 3")
        f = lambda m: _i_gamma_bessel(a, delta, gamma, d, n=m, inhouse=inh)
        n0 = 16
    else:
        raise PreconditionError(f"unknown method {method!r}")
    out = f(n0)
    if check:
        ref = f(2 * n0)
        if np.any(np.abs(out - ref) > 1e-8 * np.abs(ref)):
            raise QuadratureError("I_gamma quadrature did not converge")
        out = ref
    return out if np.ndim(out) else float(out)


def kernel_gamma(v_mag, w_mag, dist, spec, method="bessel"):
    """k_gamma(v, w) for the constant angular kernel b = ell_b/|S^{d-1}|."""
    v_mag, w_mag, dist = np.broadcast_arrays(*(np.asarray(x, float) for x in (v_mag, w_mag, dist)))
    _check_dist(dist)
    d = spec.d
    e = _gauss_exponent(v_mag, w_mag, dist)
    pref = spec.ell_b / sphere_area(d) * 2.0 ** (d - 1) * (2 * np.pi) ** (-d / 2)
    I = i_gamma(vperp(v_mag, w_mag, dist), dist, spec.gamma, d, method=method)
    out = pref / dist * np.exp(-0.5 * e * e) * I
    return out if out.ndim else float(out)


def p_gamma(v_mag, w_mag, dist, spec, method="bessel"):
    """M^{-1/2}(v) k_gamma(v, w) M^{1/2}(w), evaluated in a manifestly symmetric form."""
    v_mag, w_mag, dist = np.broadcast_arrays(*(np.asarray(x, float) for x in (v_mag, w_mag, dist)))
    _check_dist(dist)
    d = spec.d
    delta = (v_mag - w_mag) * (v_mag + w_mag)
    d2 = dist * dist
    expo = -(d2 * d2 + delta * delta) / (8.0 * d2)
    pref = spec.ell_b / sphere_area(d) * 2.0 ** (d - 1) * (2 * np.pi) ** (-d / 2)
    I = i_gamma(vperp(v_mag, w_mag, dist), dist, spec.gamma, d, method=method)
    out = pref / dist * np.exp(expo) * I
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# angular averages over the relative direction of v and w

def angle_rule(r, rp, d=3, n_angle=48):
    """Nodes for averaging over the angle between v (|v| = r) and w (|w| = rp).

    Returns (dist, weight) arrays with a trailing axis of length n_angle; the
    weights integrate against the normalised sphere measure. The substitution
    mu = 1 - 2 t^2, t = eps sinh(u) with eps = |r - rp| / (2 sqrt(r rp))
    clusters nodes where |v - w| is smallest.
    """
    r = np.asarray(r, float)[..., None]
    rp = np.asarray(rp, float)[..., None]
    rr = np.maximum(r * rp, 1e-300)
    eps = np.maximum(np.abs(r - rp) / (2.0 * np.sqrt(rr)), 1e-15)
    if d == 3:
        t, wt = _sinh_piece(eps, 1.0, n_angle)
    else:
        # (1 - t^2)^{(d-3)/2} is not smooth at t = 1 for even d; t = sin(phi) there
        m = n_angle // 2
        t1, w1 = _sinh_piece(eps, np.sqrt(0.5), m)
        x, w = gauss_legendre(n_angle - m)
        phi = np.pi / 4 + (x + 1.0) * np.pi / 8
        t2 = np.broadcast_to(np.sin(phi), t1.shape[:-1] + phi.shape)
        w2 = np.broadcast_to(4.0 * np.sin(phi) * np.cos(phi) * w * np.pi / 8, t2.shape)
        t = np.concatenate([t1, t2], axis=-1)
        wt = np.concatenate([w1, w2], axis=-1)
        wt = wt * (4.0 * t * t * np.maximum(1.0 - t * t, 0.0)) ** ((d - 3) / 2.0)
    dist = np.sqrt((r - rp) ** 2 + 4.0 * r * rp * t * t)
    wt = wt * sphere_area(d - 1) / sphere_area(d)
    return dist, wt


def _sinh_piece(eps, t_top, n):
    """Nodes t in [0, t_top] and weights for 4 t dt, clustered near t = 0 on scale eps."""
    umax = np.arcsinh(t_top / eps)
    x, w = gauss_legendre(n)
    u = 0.5 * (x + 1.0) * umax
    t = eps * np.sinh(u)
    dt = eps * np.cosh(u) * 0.5 * w * umax
    return t, 4.0 * t * dt


def angular_average(fun, r, rp, d=3, n_angle=48):
    """Average of fun(r, rp, dist) over the sphere of directions of w."""
    dist, wt = angle_rule(r, rp, d, n_angle)
    r = np.asarray(r, float)[..., None]
    rp = np.asarray(rp, float)[..., None]
    return np.sum(fun(r, rp, dist) * wt, axis=-1)


def reduced_kernel(r, rp, spec, n_angle=48, method="bessel"):
    """Angular average of k_gamma(r e, rp omega) over omega in S^{d-1}.

    sum_i W_i kappa(r_i, r) with W_i = |S^{d-1}| r_i^{d-1} h_i approximates Sigma(r).
    """
    r = np.asarray(r, float)
    rp = np.asarray(rp, float)
    if np.any(r <= 0) or np.any(rp <= 0):
        raise PreconditionError("reduced kernel needs r, r' > 0")
    out = angular_average(lambda a, b, c: kernel_gamma(a, b, c, spec, method), r, rp, spec.d, n_angle)
    return out if out.ndim else float(out)


def _radial_integral(fun, lo, hi, focus, d, n=16, levels=14):
    """|S^{d-1}| int_lo^hi s^{d-1} fun(s) ds, graded toward `focus`."""
    if hi <= lo:
        return 0.0
    s, w = graded_rule(lo, hi, focus, n=n, levels=levels)
    return float(sphere_area(d) * np.sum(w * s ** (d - 1) * fun(s)))


def h_gamma(w_mag, spec, r_max=8.0, n_angle=48, n=16, method="bessel"):
    """H_gamma(w) = int_{|v| < r_max} k_gamma(v, w) m^{-1}(v) dv."""
    w_mag = float(w_mag)
    if spec.gamma > spec.d - 2:
        raise PreconditionError("H_gamma needs gamma <= d - 2")
    wt = spec.weight
    if w_mag == 0.0:
        # k(v, 0) depends on |v| only
        f = lambda s: kernel_gamma(s, 0.0, s, spec) * wt.inv(s)
    else:
        f = lambda s: reduced_kernel(s, w_mag, spec, n_angle, method) * wt.inv(s)
    return _radial_integral(f, 0.0, r_max, w_mag, spec.d, n=n) if w_mag > 0 else \
        _radial_integral(f, 1e-300, r_max, 0.0, spec.d, n=n)


def h_gamma_bound_exponent(spec):
    """Growth exponent of H_gamma / m^{-1} claimed for the weight of `spec`."""
    w = spec.weight
    if w.kind == "exponential" and w.a > 0:
        return spec.gamma - w.s
    if w.kind == "algebraic" and w.beta > 0:
        return spec.gamma - 2.0
    return spec.gamma


def h_gamma_report(spec, w_values, r_max=8.0, n_angle=48):
    """Sup of H_gamma(w) / ((1 + |w|^e) m^{-1}(w)) over the sample, e from h_gamma_bound_exponent."""
    e = h_gamma_bound_exponent(spec)
    rows = []
    for w in w_values:
        lhs = h_gamma(w, spec, r_max=r_max, n_angle=n_angle)
        rhs = (1.0 + w ** e) * float(spec.weight.inv(w))
        rows.append((float(w), lhs, rhs, lhs / rhs))
    sup = max(r[3] for r in rows)
    return BoundReport("h_gamma", ["w", "H", "bound_shape", "ratio"], rows, sup,
                       bool(np.isfinite(sup)), meta={"exponent": e, "r_max": r_max})


def dp_tail(w_mag, r, spec, r_max=8.0, n_angle=48):
    """m(w) (1+|w|)^{-gamma} int_{r < |v| < r_max} k_gamma(v, w) m^{-1}(v) dv."""
    if r >= r_max:
        return 0.0
    wt = spec.weight
    f = lambda s: reduced_kernel(s, w_mag, spec, n_angle) * wt.inv(s)
    focus = min(max(w_mag, r), r_max)
    val = _radial_integral(f, r, r_max, focus, spec.d)
    return val / (float(wt.inv(w_mag)) * (1.0 + w_mag) ** spec.gamma)


def lemma_g_integral(v_mag, spec, r_max=8.0, n_angle=64):
    """int_{|w| < r_max} p_gamma(v, w)^2 dw."""
    if spec.gamma <= (spec.d - 2) / 2:
        raise PreconditionError("square integrability of p_gamma needs gamma > (d-2)/2")
    v_mag = float(v_mag)
    if v_mag == 0.0:
        f = lambda s: p_gamma(0.0, s, s, spec) ** 2
        return _radial_integral(f, 1e-300, r_max, 0.0, spec.d)
    f = lambda s: angular_average(lambda a, b, c: p_gamma(a, b, c, spec) ** 2, v_mag, s, spec.d, n_angle)
    return _radial_integral(f, 0.0, r_max, v_mag, spec.d)


def dissipativity_margin(v, spec, c0, sigma0):
    """c0 (1 + |v|^e) - sigma0 (1 + |v|)^gamma + sigma0; nonpositive where the inequality holds."""
    e = h_gamma_bound_exponent(spec)
    v = np.asarray(v, float)
    with np.errstate(divide="ignore"):
        pw = np.where(v > 0, v ** e, 0.0 if e > 0 else np.inf) if e != 0 else np.ones_like(v)
    return c0 * (1.0 + pw) - sigma0 * (1.0 + v) ** spec.gamma + sigma0


def dissipativity_radius(spec, c0, sigma0, r_max=8.0, n_scan=8001):
    """Smallest scanned radius R with the dissipativity inequality holding on (R, r_max]."""
    w = spec.weight
    ok = (w.kind == "exponential" and w.a > 0 and spec.gamma + w.s > 1) or \
         (w.kind == "algebraic" and w.beta > 0)
    if not ok:
        raise PreconditionError("needs an exponential weight with gamma + s > 1 or an algebraic weight")
    if not (c0 > 0 and sigma0 > 0):
        raise PreconditionError("c0 and sigma0 must be positive")
    v = np.linspace(0.0, r_max, n_scan)
    m = dissipativity_margin(v, spec, c0, sigma0)
    bad = np.nonzero(m > 0)[0]
    if bad.size == 0:
        return 0.0
    if bad[-1] == v.size - 1:
        raise InfeasibleError(f"inequality fails at r_max with margin {m[-1]:.6g}", margin=float(m[-1]))
    return float(v[bad[-1] + 1])
