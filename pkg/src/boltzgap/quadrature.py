"""Gauss-Legendre building blocks: composite panels, geometric grading, Lagrange bases."""
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=64)
def _gl(n):
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n, a=-1.0, b=1.0):
    """n-point rule mapped to [a, b]."""
    x, w = _gl(int(n))
    h = 0.5 * (b - a)
    return h * x + 0.5 * (a + b), h * w


def composite(edges, n):
    """Gauss rule with n nodes on each interval [edges[k], edges[k+1]]."""
    edges = np.asarray(edges, float)
    x, w = _gl(int(n))
    h = 0.5 * np.diff(edges)[:, None]
    c = 0.5 * (edges[1:] + edges[:-1])[:, None]
    return (h * x + c).ravel(), (h * w).ravel()


def geometric_edges(lo, hi, toward, levels):
    """Interval edges on [lo, hi] shrinking by halves toward `toward` (either lo or hi)."""
    frac = np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1)])
    L = hi - lo
    if toward == lo:
        return lo + L * frac
    return hi - L * frac[::-1]


def graded_rule(lo, hi, s, n=16, levels=14):
    """Quadrature on [lo, hi] with nodes graded geometrically toward the point s.

    s is clipped into [lo, hi]; both sides of s are graded, so a kink or an
    integrable singularity at s is integrated to near machine precision.
    """
    s = min(max(s, lo), hi)
    pts, wts = [], []
    if s > lo:
        p, w = composite(geometric_edges(lo, s, s, levels), n)
        pts.append(p)
        wts.append(w)
    if hi > s:
        p, w = composite(geometric_edges(s, hi, s, levels), n)
        pts.append(p)
        wts.append(w)
    return np.concatenate(pts), np.concatenate(wts)


def lagrange_basis(nodes, x):
    """Matrix L[j, e] = ell_j(x_e) for the interpolation basis on `nodes`."""
    nodes = np.asarray(nodes, float)
    x = np.asarray(x, float)
    L = np.ones((nodes.size, x.size))
    for j in range(nodes.size):
        for m in range(nodes.size):
            if m != j:
                L[j] *= (x - nodes[m]) / (nodes[j] - nodes[m])
    return L


def sphere_area(d):
    """Surface measure of the unit sphere S^{d-1} in R^d."""
    from scipy.special import gamma

    return 2.0 * np.pi ** (d / 2) / gamma(d / 2)
