"""Time evolution of df/dt = L_h f, the truncated Dyson-Phillips series, and
decay-rate / envelope diagnostics."""
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as leg
from scipy.linalg import expm

from .errors import ConservationError, PositivityError, PreconditionError, WindowError
from .model import weighted_l1_norm
from .quadrature import gauss_legendre
from .spectral import theta_log_inv

METHODS = ("rk4", "exponential-euler", "expm")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    norms: np.ndarray
    mass: np.ndarray
    rho0: float

    @property
    def min_component(self):
        return self.states.min(axis=1)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    prefactor: float
    window: tuple
    residual: float


@dataclass(frozen=True)
class EnvelopeReport:
    c: float
    max_ratio: float
    first_quarter_max: float
    last_quarter_max: float
    bounded: bool
    times: np.ndarray
    ratios: np.ndarray


def discrete_maxwellian(grid):
    """Node values of M rescaled to unit quadrature mass."""
    M = grid.maxwellian()
    return M / grid.mass(M)


def equilibrium_projection(f0, grid):
    """Pi_0 f = (mass of f) M_h."""
    return grid.mass(f0) * discrete_maxwellian(grid)


def certified_initial(gen, g, rho0=1.0, scale=None):
    """f0 = rho0 M_h + eps L_h g, a member of Ker + Im by construction.

    eps defaults to the largest value up to 1 (times 0.9) keeping f0 >= 0.
    Returns (f0, eps).
    """
    M = rho0 * discrete_maxwellian(gen.grid)
    Lg = gen.matrix @ np.asarray(g, float)
    if scale is None:
        neg = Lg < 0
        scale = 1.0 if not np.any(neg) else min(1.0, 0.9 * float(np.min(M[neg] / -Lg[neg])))
    return M + scale * Lg, scale


def _step_matrix(gen, dt, method):
    L = gen.matrix
    n = gen.n
    if method == "expm":
        return expm(dt * L)
    if method == "rk4":
        A = dt * L
        P = np.eye(n)
        term = np.eye(n)
        for k in range(1, 5):
            term = term @ A / k
            P = P + term
        return P
    # exponential Euler: exact loss, gain frozen over the step in conservative form
    s = gen.sigma
    phi = -np.expm1(-dt * s) / s
    return np.diag(np.exp(-dt * s)) + gen.gain * phi[None, :]


def evolve(gen, f0, t_end, dt=None, method="rk4", record_every=1, check=True):
    """Integrate from 0 to t_end with a fixed step.

    rk4 is positivity preserving for dt * max(Sigma) <= 1 since every derivative
    of its stability polynomial is nonnegative at -dt * max(Sigma); the
    precondition dt * max(Sigma) <= 0.5 leaves margin. The default dt is
    0.1 / max(Sigma).
    """
    if method not in METHODS:
        raise PreconditionError(f"method must be one of {METHODS}")
    f0 = np.asarray(f0, float)
    smax = float(np.max(gen.sigma))
    dt = 0.1 / smax if dt is None else float(dt)
    if t_end < 0 or dt <= 0:
        raise PreconditionError("need t_end >= 0 and dt > 0")
    nsteps = max(1, int(np.ceil(t_end / dt - 1e-9))) if t_end > 0 else 0
    if nsteps:
        dt = t_end / nsteps
    if method == "rk4" and dt * smax > 0.5:
        raise PreconditionError(f"rk4 needs dt*max(Sigma) <= 0.5, got {dt * smax:.3g}")
    scale = np.max(np.abs(f0))
    if np.any(f0 < -1e-12 * scale):
        raise PreconditionError("initial state must be nonnegative")
    grid = gen.grid
    P = _step_matrix(gen, dt, method) if nsteps else np.eye(gen.n)
    m0 = grid.mass(f0)
    Mh = discrete_maxwellian(grid)
    keep = [0]
    states = [f0]
    f = f0
    for k in range(1, nsteps + 1):
        f = P @ f
        if check:
            if f.min() < -1e-10 * np.max(np.abs(f)):
                raise PositivityError(f"negative component {f.min():.3e} at t={k * dt:.6g}")
            if abs(grid.mass(f) - m0) > 1e-6 * abs(m0):
                raise ConservationError(f"mass drift {grid.mass(f) - m0:.3e} at t={k * dt:.6g}")
        if k % record_every == 0 or k == nsteps:
            keep.append(k)
            states.append(f)
    states = np.array(states)
    times = np.array(keep, float) * dt
    norms = weighted_l1_norm(states - m0 * Mh, grid, gen.spec.weight)
    mass = grid.mass(states)
    return Trajectory(times, states, np.atleast_1d(norms), np.atleast_1d(mass), float(m0))


def _integration_matrix(n):
    """Q[k, l]: integral from -1 to x_k of the degree-(n-1) interpolant through the
    Gauss nodes with unit data at node l; q_end likewise up to x = 1."""
    x, _ = gauss_legendre(n)
    V = leg.legvander(x, n - 1)
    C = np.linalg.inv(V)                     # columns: Legendre coefficients of the cardinal functions
    anti = leg.legint(C, lbnd=-1.0, axis=0)
    Q = np.array([[leg.legval(xk, anti[:, l]) for l in range(n)] for xk in x])
    q_end = np.array([leg.legval(1.0, anti[:, l]) for l in range(n)])
    return x, Q, q_end


def dyson_phillips(gen, f0, t, m_terms, n_quad=16, partial_sums=False):
    """sum_{j<=m} U_j(t) f0 with U_0(t) = exp(-Sigma t) and U_{j+1} = int_0^t U_0(t-s) B U_j(s) ds.

    Each term is carried as w_j(s) = exp(Sigma s) U_j(s) f0 at Gauss nodes in
    [0, t]; the convolution becomes an antiderivative, applied through the
    spectral integration matrix of the node set.
    """
    if m_terms < 0:
        raise PreconditionError("m_terms must be >= 0")
    if t < 0:
        raise PreconditionError("t must be >= 0")
    f0 = np.asarray(f0, float)
    sig = gen.sigma
    decay = np.exp(-sig * t)
    u = decay * f0
    sums = [u.copy()]
    if t == 0 or m_terms == 0:
        return sums if partial_sums else u
    x, Q, q_end = _integration_matrix(n_quad)
    s = 0.5 * t * (x + 1.0)
    E = np.exp(np.outer(s, sig))              # (n_quad, n)
    half = 0.5 * t
    w = np.broadcast_to(f0, (n_quad, f0.size)).copy()
    B = gen.gain
    for _ in range(m_terms):
        h = E * ((w / E) @ B.T)               # integrand at the nodes
        w_end = half * (q_end @ h)
        w = half * (Q @ h)
        u = u + decay * w_end
        sums.append(u.copy())
    return sums if partial_sums else u


def fit_decay(traj, window):
    """Least-squares line through (t, log norm) on the window."""
    lo, hi = window
    sel = (traj.times >= lo) & (traj.times <= hi)
    if sel.sum() < 2:
        raise WindowError(f"fewer than two samples in window {window}")
    t = traj.times[sel]
    y = traj.norms[sel]
    if np.any(y < 1e-13):
        raise WindowError("norms reach the numerical floor inside the window")
    slope, icpt = np.polyfit(t, np.log(y), 1)
    fit = np.exp(icpt + slope * t)
    return DecayFit(float(-slope), float(np.exp(icpt)), (float(lo), float(hi)),
                    float(np.max(np.abs(fit / y - 1.0))))


def envelope_check(traj, sm, c=0.5, window=(10.0, 100.0)):
    """Ratio norm(t) / theta_log^{-1}(c t) on the window; bounded if the last-quarter
    max is at most twice the first-quarter max."""
    if not (0.0 < c < 1.0):
        raise PreconditionError("c must lie in (0, 1)")
    lo, hi = window
    sel = (traj.times >= lo) & (traj.times <= hi)
    t = traj.times[sel]
    if t.size < 4:
        raise WindowError("window holds fewer than four samples")
    env = np.array([theta_log_inv(c * tk, sm) for tk in t])
    ratio = traj.norms[sel] / env
    q = (hi - lo) / 4.0
    first = float(np.max(ratio[t <= lo + q]))
    last = float(np.max(ratio[t >= hi - q]))
    return EnvelopeReport(c, float(ratio.max()), first, last, bool(last <= 2.0 * first), t, ratio)
