"""Eigenvalues, spectral gaps, resolvent norms, and the rate functions theta / theta_log."""
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.optimize import brentq

from .errors import DegenerateZeroError, PreconditionError, RangeError, SingularityError
from .model import QuadConfig, collision_frequency


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    lambda_star: float
    eta: float
    mu2: float
    zero_mode_residual: float
    zero_mode_min: float = float("nan")
    zero_mode_cosine: float = float("nan")
    n_zero: int = 1
    extra: dict = field(default_factory=dict)

    def summary(self):
        return {"lambda_star": self.lambda_star, "eta": self.eta, "mu2": self.mu2,
                "zero_mode_residual": self.zero_mode_residual, "zero_mode_min": self.zero_mode_min,
                "zero_mode_cosine": self.zero_mode_cosine, "n_zero": self.n_zero,
                "n_eigenvalues": int(self.eigenvalues.size), **self.extra}


@dataclass(frozen=True)
class RateFunctions:
    sigma_max: float

    def __post_init__(self):
        if not self.sigma_max > 0:
            raise PreconditionError("sigma_max must be positive")


def _cluster_real_parts(re, tol=1e-6):
    """Distinct real parts (descending) after merging values closer than tol."""
    out = []
    for x in np.sort(re)[::-1]:
        if not out or out[-1] - x > tol:
            out.append(x)
    return np.array(out)


def domain_sigma_range(gen):
    """(inf, sup) of Sigma over [0, R_max]: node values plus the two endpoints."""
    ends = collision_frequency(np.array([0.0, gen.grid.r_max]), gen.spec, QuadConfig(r_max=gen.grid.r_max))
    s = np.concatenate([gen.sigma, ends])
    return float(s.min()), float(s.max())


def spectrum(gen, hilbert=None, zero_tol=1e-6):
    """Dense eigensolve of L_h with gap, zero-mode diagnostics and (optionally) mu2."""
    L = gen.matrix
    vals, vecs = linalg.eig(L)
    order = np.lexsort((-vals.imag, -vals.real))
    vals, vecs = vals[order], vecs[:, order]
    near = np.abs(vals) < zero_tol
    nz = int(near.sum())
    if nz != 1:
        raise DegenerateZeroError(f"{nz} eigenvalues within {zero_tol:g} of zero (expected exactly one)")
    k0 = int(np.argmax(near))
    m0 = vecs[:, k0].real
    m0 = m0 / np.linalg.norm(m0)
    m0 = m0 if m0.sum() > 0 else -m0
    res = float(np.linalg.norm(L @ m0))
    M = gen.grid.maxwellian()
    cos = float(m0 @ M / (np.linalg.norm(M)))
    rest = np.delete(vals, k0)
    re = _cluster_real_parts(rest.real)
    lam = float(-re[0])
    eta, _ = domain_sigma_range(gen)
    mu2 = hilbert_gap(hilbert) if hilbert is not None else float("nan")
    return SpectrumReport(vals, lam, eta, mu2, res, float(m0.min()), cos, nz)


def hilbert_gap(sym, zero_tol=1e-6):
    """mu2 = -(second largest eigenvalue) of the symmetric matrix."""
    sym = np.asarray(sym, float)
    if not np.allclose(sym, sym.T, rtol=0, atol=1e-14 * np.max(np.abs(sym))):
        raise PreconditionError("hilbert_gap needs a symmetric matrix")
    ev = np.sort(linalg.eigvalsh(sym))[::-1]
    if abs(ev[0]) > zero_tol:
        raise DegenerateZeroError(f"largest eigenvalue {ev[0]:.3e} is not zero")
    if ev[1] >= 0 or abs(ev[1]) < zero_tol:
        raise DegenerateZeroError(f"second eigenvalue {ev[1]:.3e} is not negative")
    return float(-ev[1])


def theta(r, sm):
    """(1/r) / (1 - S/sqrt(r^2 + S^2)), written without the cancellation at large r."""
    r = np.asarray(r, float)
    if np.any(r <= 0):
        raise RangeError("theta needs r > 0")
    s = sm.sigma_max
    h = np.sqrt(r * r + s * s)
    out = h * (h + s) / r ** 3
    return out if out.ndim else float(out)


def theta_log(r, sm):
    t = np.asarray(theta(r, sm))
    out = t * np.log1p(t / np.asarray(r, float))
    return out if out.ndim else float(out)


def theta_log_inv(y, sm, lo=1e-12, hi=1e12, rtol=1e-10):
    """Inverse of the decreasing map theta_log, by bracketing in log r."""
    y = float(y)
    if not y > 0:
        raise RangeError("theta_log_inv needs y > 0")
    top, bot = theta_log(lo, sm), theta_log(hi, sm)
    if not (bot <= y <= top):
        raise RangeError(f"y={y:g} outside the range [{bot:.3g}, {top:.3g}] of theta_log")
    f = lambda x: np.log(theta_log(np.exp(x), sm)) - np.log(y)
    x = brentq(f, np.log(lo), np.log(hi), xtol=rtol * 1e-2, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(np.exp(x))


def resolvent_norm(gen, alpha):
    """Weighted-L1 operator norm of (i alpha - L_h)^{-1}: max_j sum_i w_i m_i^{-1} |R_ij| / (w_j m_j^{-1})."""
    alpha = float(alpha)
    if alpha == 0.0:
        raise SingularityError("alpha = 0 hits the zero eigenvalue")
    n = gen.n
    A = 1j * alpha * np.eye(n) - gen.matrix
    try:
        R = linalg.solve(A, np.eye(n, dtype=complex))
    except linalg.LinAlgError as exc:
        raise SingularityError(str(exc)) from exc
    mu = gen.grid.weights * gen.spec.weight.inv(gen.grid.nodes)
    return float(np.max((mu @ np.abs(R)) / mu))


def resolvent_sweep(gen, alphas, sm):
    """Rows (alpha, norm, theta(|alpha|), ratio)."""
    rows = []
    for a in alphas:
        nrm = resolvent_norm(gen, a)
        th = theta(abs(a), sm)
        rows.append((float(a), nrm, th, nrm / th))
    return rows
