"""Exponentially scaled modified Bessel functions.

`i0e` is a self-contained evaluation of exp(-x) I_0(x): power series for
x <= 25 and the scaled large-argument expansion above. The hot loops of the
kernel quadratures call scipy's `ive`; `i0e` is the independent second
path used to cross-check it.
"""
import numpy as np
from scipy.special import gamma, i0e as _i0e_fast, i1e as _i1e_fast, ive

SERIES_CUTOFF = 25.0


def _i0e_series(x):
    q = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 120):
        term = term * q / (k * k)
        total = total + term
        if np.all(term <= 1e-17 * total):
            break
    return total * np.exp(-x)


def _i0e_asymptotic(x):
    # e^{-x} I0(x) ~ (2 pi x)^{-1/2} sum_k ((2k-1)!!)^2 / (k! (8x)^k)
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 40):
        nxt = term * (2 * k - 1) ** 2 / (k * 8.0 * x)
        if np.all(nxt >= term):
            break
        term = np.where(nxt < term, nxt, 0.0)
        total = total + term
    return total / np.sqrt(2.0 * np.pi * x)


def i0e(x):
    """exp(-|x|) I_0(x), elementwise."""
    x = np.abs(np.asarray(x, float))
    out = np.empty_like(x)
    small = x <= SERIES_CUTOFF
    if np.any(small):
        out[small] = _i0e_series(x[small])
    if np.any(~small):
        out[~small] = _i0e_asymptotic(x[~small])
    return out if out.ndim else float(out)


def scaled_ratio(nu, z):
    """(2/z)^nu exp(-z) I_nu(z), continuous at z = 0 where it equals 1/Gamma(nu+1).

    This is the angular average of exp(z cos theta) against the sphere measure,
    up to the normalisation used by the radial reductions.
    """
    z = np.asarray(z, float)
    if nu == 0:
        return _i0e_fast(z)
    if nu == 0.5:
        zs = np.where(z > 1e-8, z, 1.0)
        return np.where(z > 1e-8, -np.expm1(-2.0 * zs) / (zs * np.sqrt(np.pi)),
                        (2.0 / np.sqrt(np.pi)) * (1.0 - z + 2.0 * z * z / 3.0))
    zs = np.where(z > 1e-8, z, 1.0)
    val = (2.0 / zs) * _i1e_fast(zs) if nu == 1 else (2.0 / zs) ** nu * ive(nu, zs)
    # small-z limit keeps the leading two series terms
    lim = (1.0 / gamma(nu + 1)) * np.exp(-z) * (1.0 + z * z / (4.0 * (nu + 1)))
    return np.where(z > 1e-8, val, lim)
