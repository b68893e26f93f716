"""Reference values computed without the package, by routes different from the
ones it uses. Run as a script to print the numbers frozen in the tests."""
import numpy as np
from scipy import integrate
from scipy.special import erf, gamma as gamma_fn

SQ2PI = np.sqrt(2.0 * np.pi)


def sigma_hard_3d(v):
    """int |v - u| M(u) du in d = 3, closed form."""
    v = float(v)
    if v == 0.0:
        return 2.0 * np.sqrt(2.0 / np.pi)
    return np.sqrt(2.0 / np.pi) * np.exp(-v * v / 2) + (v + 1.0 / v) * erf(v / np.sqrt(2.0))


def sigma_coulomb_like_3d(v):
    """int |v - u|^{-1} M(u) du in d = 3 (potential of a Gaussian charge)."""
    v = float(v)
    if v == 0.0:
        return np.sqrt(2.0 / np.pi)
    return erf(v / np.sqrt(2.0)) / v


def sigma_power_3d(v, gamma):
    """int |v - u|^gamma M(u) du in d = 3 by a 1-D quadrature over rho = |u - v|,
    using the sphere average of M(v + rho sigma) = M_r(v, rho) sinh(v rho) / (v rho)."""
    v = float(v)

    def f(rho):
        if v == 0.0:
            avg = np.exp(-rho * rho / 2)
        else:
            # exp(-(v^2+rho^2)/2) sinh(v rho)/(v rho) without overflow
            avg = (np.exp(-(v - rho) ** 2 / 2) - np.exp(-(v + rho) ** 2 / 2)) / (2 * v * rho)
        return 4 * np.pi * rho ** (2 + gamma) * avg / (2 * np.pi) ** 1.5

    val, _ = integrate.quad(f, 0, v + 40, limit=400, epsabs=0, epsrel=1e-13, points=[v] if v > 0 else None)
    return val


def i_gamma_laplace(a, dist, gamma):
    """int_{R^2} exp(-|x|^2/2) (|a e1 - x|^2 + dist^2)^{(gamma-1)/2} dx for gamma < 1.

    x^{-p} = Gamma(p)^{-1} int t^{p-1} e^{-t x} dt turns the plane integral into a
    Gaussian one, leaving a single integral over t.
    """
    p = (1.0 - gamma) / 2.0

    def f(t):
        return t ** (p - 1) * 2 * np.pi / (1 + 2 * t) * np.exp(-t * dist ** 2 - a * a * t / (1 + 2 * t))

    val = 0.0
    for lo, hi in [(0, 1), (1, np.inf)]:
        v, _ = integrate.quad(f, lo, hi, limit=400, epsabs=0, epsrel=1e-13)
        val += v
    return val / gamma_fn(p)


def kernel_hs_3d(v, w, dist):
    """2^{d-1} (2 pi)^{-1/2} |v-w|^{-1} exp(-(1/8)(|v-w| + (|v|^2-|w|^2)/|v-w|)^2) in d = 3."""
    return 4.0 / SQ2PI / dist * np.exp(-((dist + (v * v - w * w) / dist) ** 2) / 8.0)


def theta_ref(r, s):
    """(1/r) / (1 - s / sqrt(r^2 + s^2)) evaluated in extended precision."""
    r, s = np.longdouble(r), np.longdouble(s)
    return float(1 / r / (1 - s / np.sqrt(r * r + s * s)))


if __name__ == "__main__":
    for v in (0.0, 0.5, 1.0, 3.0, 8.0):
        print("sigma_hard", v, repr(sigma_hard_3d(v)), repr(sigma_power_3d(v, 1.0)))
    for v in (0.0, 0.5, 2.0, 6.0):
        print("sigma_-1", v, repr(sigma_coulomb_like_3d(v)), repr(sigma_power_3d(v, -1.0)))
    for v in (0.0, 1.0, 4.0):
        print("sigma_0.5", v, repr(sigma_power_3d(v, 0.5)))
        print("sigma_-2", v, repr(sigma_power_3d(v, -2.0)))
    for a, d, g in [(0.0, 1.0, -1.0), (1.5, 0.7, -1.0), (3.0, 2.0, 0.5), (0.4, 0.05, -2.0), (5.0, 1.0, 0.0)]:
        print("i_gamma", a, d, g, repr(i_gamma_laplace(a, d, g)))
    print("kernel_hs", repr(kernel_hs_3d(1.0, 1.0, 1.0)), repr(kernel_hs_3d(2.0, 1.0, 1.5)))
    for r in (0.1, 1.0, 1e3):
        print("theta", r, repr(theta_ref(r, 1.0)))
