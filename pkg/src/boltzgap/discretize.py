"""Radial grids and dense discretisations of the gain operator, the generator
L = K - Sigma, and its symmetrised (Hilbert-space) counterpart."""
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import roots_jacobi

from .carleman import angular_average, h_gamma, p_gamma, reduced_kernel
from .errors import DiscretizationError, GridError, PreconditionError, QuadratureError
from .model import QuadConfig, collision_frequency, maxwellian_r
from .quadrature import composite, gauss_legendre, geometric_edges, lagrange_basis, sphere_area

NORMALIZATIONS = ("raw", "column-stochastic")


@dataclass(frozen=True)
class RadialGrid:
    nodes: np.ndarray
    weights: np.ndarray
    n_angle: int
    d: int
    r_max: float
    edges: np.ndarray
    order: int

    @property
    def n(self):
        return self.nodes.size

    def panel_slice(self, k):
        return slice(k * self.order, (k + 1) * self.order)

    def maxwellian(self):
        return maxwellian_r(self.nodes, self.d)

    def mass(self, f):
        return np.sum(self.weights * np.asarray(f), axis=-1)

    def to_dict(self):
        return {"n_radial": int(self.n), "n_angle": self.n_angle, "d": self.d, "r_max": self.r_max,
                "order": self.order, "edges": [float(e) for e in self.edges]}


def build_grid(n_radial, n_angle=48, r_max=8.0, d=3, order=8, refine_origin=False, mass_tol=1e-8):
    """Composite Gauss-Legendre grid on (0, r_max] with surface-measure weights.

    n_radial counts the nodes of the uniform panels. refine_origin (a count,
    True meaning 1) halves the first panel that many times, adding `order`
    nodes per level next to r = 0. The grid must reproduce the unit mass of M
    to mass_tol; below r_max ~ 6.5 the Gaussian tail alone exceeds 1e-8.
    """
    if n_radial < 8 or n_angle < 8:
        raise GridError(f"grid too coarse: n_radial={n_radial}, n_angle={n_angle} (both must be >= 8)")
    if r_max <= 0:
        raise PreconditionError("r_max must be positive")
    if n_radial % order:
        raise PreconditionError(f"n_radial must be a multiple of the panel order {order}")
    edges = np.linspace(0.0, r_max, n_radial // order + 1)
    for _ in range(int(refine_origin)):
        edges = np.insert(edges, 1, 0.5 * edges[1])
    r, h = composite(edges, order)
    w = sphere_area(d) * r ** (d - 1) * h
    grid = RadialGrid(r, w, int(n_angle), int(d), float(r_max), edges, int(order))
    mass = float(np.sum(w * grid.maxwellian()))
    if abs(mass - 1.0) > mass_tol:
        raise GridError(f"grid does not resolve the Maxwellian: mass {mass!r}")
    return grid


@dataclass
class GeneratorMatrix:
    gain: np.ndarray
    sigma: np.ndarray
    grid: RadialGrid
    spec: object
    normalization: str = "raw"
    meta: dict = field(default_factory=dict)

    @property
    def matrix(self):
        return self.gain - np.diag(self.sigma)

    @property
    def n(self):
        return self.sigma.size


def _graded_nodes(lo, hi, s, n, levels):
    """Fixed-size rule on [lo, hi] graded toward s (vectorised over the leading axes)."""
    x, w = gauss_legendre(n)
    frac = np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1)])
    s = np.clip(s, lo, hi)
    left = s[..., None] - (s - lo)[..., None] * frac[::-1]      # lo ... s, shrinking toward s
    right = s[..., None] + (hi - s)[..., None] * frac            # s ... hi
    e = np.concatenate([left, right[..., 1:]], axis=-1)
    a, b = e[..., :-1, None], e[..., 1:, None]
    pts = 0.5 * (b - a) * x + 0.5 * (a + b)
    wts = 0.5 * (b - a) * w
    sh = pts.shape[:-2] + (-1,)
    return pts.reshape(sh), wts.reshape(sh)


def _product_gain(grid, spec, kappa_nodes, sub_n=16, levels=14, near=1, method="bessel"):
    """Gain matrix with product integration on the panels next to each row node.

    Far panels use kappa(r_i, r_j) W_j. On near panels the row integral
    int kappa(r_i, r') ell_j(r') |S| r'^{d-1} dr' is done with a rule graded
    toward r_i, which captures the kink of kappa at r' = r_i.
    """
    r, W = grid.nodes, grid.weights
    G = kappa_nodes * W[None, :]
    xref, _ = gauss_legendre(grid.order)
    area = sphere_area(grid.d)
    npan = grid.edges.size - 1
    for k in range(npan):
        lo, hi = grid.edges[k], grid.edges[k + 1]
        rows = np.arange(max(0, k - near) * grid.order, min(npan, k + near + 1) * grid.order)
        s, ws = _graded_nodes(np.full(rows.size, lo), np.full(rows.size, hi), r[rows], sub_n, levels)
        kap = reduced_kernel(np.broadcast_to(r[rows, None], s.shape), s, spec, grid.n_angle, method)
        vals = kap * area * s ** (grid.d - 1) * ws                  # (rows, pts)
        xe = (2.0 * s - (hi + lo)) / (hi - lo)
        for a, i in enumerate(rows):
            G[i, grid.panel_slice(k)] = lagrange_basis(xref, xe[a]) @ vals[a]
    return G


def node_sigma(grid, spec, quad=None):
    quad = quad or QuadConfig(r_max=grid.r_max)
    return collision_frequency(grid.nodes, spec, quad)


def kernel_method(spec):
    """Hard-sphere kernels are closed form; other exponents use the cached I_gamma table."""
    return "bessel" if spec.gamma == spec.d - 2 else "table"


def truncated_sigma(grid, spec):
    """Sigma_R(r_i) = int_{|u| < r_max} k(u, v_i) du by adaptive radial quadrature.

    This is what a column of the truncated gain should integrate to; it differs
    from Sigma by the collisions that leave the ball.
    """
    unit = type(spec)(d=spec.d, gamma=spec.gamma, ell_b=spec.ell_b)
    method = kernel_method(spec)
    return np.array([h_gamma(r, unit, r_max=grid.r_max, n_angle=grid.n_angle, method=method)
                     for r in grid.nodes])


def balance(G, W, M, target, tol=1e-14, maxit=500):
    """Two-sided scaling x_i G_ij y_j whose columns integrate to `target` against W
    and which maps M to target * M.

    With A_ij = W_i G_ij M_j both requirements say that A's row sums and column
    sums equal c = W * target * M, a Sinkhorn problem with a unique positive
    solution for positive A. Returns (x, y, iterations).
    """
    A = W[:, None] * G * M[None, :]
    c = W * target * M
    x = np.ones_like(c)
    y = np.ones_like(c)
    for it in range(1, maxit + 1):
        y = c / (A.T @ x)
        x = c / (A @ y)
        err = np.max(np.abs(y * (A.T @ x) / c - 1.0))
        if err < tol:
            return x, y, it
    raise DiscretizationError(f"balancing did not converge (column error {err:.3e})")


def assemble(grid, spec, normalization="raw", sigma=None, sub_n=None, levels=None, clip_tol=1e-3,
             check_identity=True):
    """Dense generator on `grid`.

    raw: product-integration Nystrom gain, loss Sigma(r_i).
    column-stochastic: with Sigma_R(r_i) = (K_h M)_i / M_i, the collision
    frequency of the truncated domain, the gain is rescaled on both sides so
    that every column integrates to Sigma_R and K_h M = Sigma_R M hold exactly
    (see `balance`). Collisions that would leave the ball of radius r_max,
    Sigma - Sigma_R, are then returned to the diagonal, so each gain column
    integrates to Sigma(r_j) and the loss stays Sigma. Mass conservation and
    L_h M = 0 are exact. The column factor Sigma / Sigma_R is recorded; it
    departs from 1 through quadrature error and through that leakage.

    With check_identity the column integrals are compared with Sigma_R from
    truncated_sigma, which isolates the quadrature error from the truncation
    leakage 1 - Sigma_R / Sigma (both recorded).

    Product weights next to very narrow kernels can come out slightly negative;
    entries above -clip_tol * max(gain) are set to zero (recorded), larger ones
    raise.
    """
    if normalization not in NORMALIZATIONS:
        raise PreconditionError(f"normalization must be one of {NORMALIZATIONS}")
    if spec.d != grid.d:
        raise PreconditionError("grid and model dimensions differ")
    r = grid.nodes
    sig = node_sigma(grid, spec) if sigma is None else np.asarray(sigma, float)
    method = kernel_method(spec)
    # the table path is ~1e-9 accurate, so a lighter near-panel rule suffices there
    sub_n = sub_n or (16 if method == "bessel" else 8)
    levels = levels or (14 if method == "bessel" else 8)
    kap = reduced_kernel(r[:, None], r[None, :], spec, grid.n_angle, method)
    G = _product_gain(grid, spec, kap, sub_n=sub_n, levels=levels, method=method)
    gmin = float(G.min())
    if gmin < -clip_tol * G.max():
        raise DiscretizationError(f"negative gain entry {gmin:.3e}")
    G = np.maximum(G, 0.0)
    W = grid.weights
    M = grid.maxwellian()
    col = (W @ G) / W
    meta = {
        "sub_rule": [int(sub_n), int(levels)],
        "clipped_negative_min": min(gmin, 0.0),
        "column_vs_sigma_max_rel_error": float(np.max(np.abs(col / sig - 1.0))),
        "equilibrium_residual_raw": float(np.linalg.norm(G @ M - sig * M) / np.linalg.norm(M)),
    }
    if check_identity:
        s_trunc = truncated_sigma(grid, spec)
        meta["column_identity_max_rel_error"] = float(np.max(np.abs(col / s_trunc - 1.0)))
        meta["truncation_leakage_max"] = float(np.max(1.0 - s_trunc / sig))
    if normalization == "column-stochastic":
        sig_r = (G @ M) / M
        factor = sig / sig_r
        meta["column_factor_min"] = float(factor.min())
        meta["column_factor_max"] = float(factor.max())
        if factor.min() < 0.9 or factor.max() > 1.1:
            raise DiscretizationError(f"column factor outside [0.9, 1.1]: [{factor.min():.4f}, {factor.max():.4f}]")
        x, y, its = balance(G, W, M, sig_r)
        G = x[:, None] * G * y[None, :] + np.diag(sig - sig_r)
        if G.min() < 0:
            raise DiscretizationError("returning the leakage to the diagonal made the gain negative")
        meta.update(balance_iterations=its, balance_row_range=[float(x.min()), float(x.max())],
                    balance_col_range=[float(y.min()), float(y.max())],
                    leakage_returned_max=float(np.max((sig - sig_r) / sig)))
        meta["column_factors"] = factor
    else:
        factor = sig / col
        meta["column_factor_min"] = float(factor.min())
        meta["column_factor_max"] = float(factor.max())
        meta["column_factors"] = factor
    gen = GeneratorMatrix(G, sig, grid, spec, normalization, meta)
    meta["equilibrium_residual"] = float(np.linalg.norm(gen.matrix @ M) / np.linalg.norm(M))
    meta["mass_defect_max"] = float(np.max(np.abs(W @ gen.matrix)) / np.max(W * sig))
    return gen


def assemble_hilbert(grid, spec, sigma=None, balance=True, tol=1e-6):
    """Symmetric matrix S_h on the grid's L^2(M^{-1}) coordinates.

    S_ij = sqrt(W_i) pbar(r_i, r_j) sqrt(W_j), with pbar the angular average of
    p_gamma. With balance=True the diagonal carries -Sigma_i plus the correction
    that makes S_h annihilate sqrt(W M) exactly (the symmetric counterpart of
    the column-stochastic correction); balance=False subtracts Sigma only.
    Returns (S_h, info).
    """
    r, W = grid.nodes, grid.weights
    sig = node_sigma(grid, spec) if sigma is None else np.asarray(sigma, float)
    method = kernel_method(spec)
    pbar = angular_average(lambda a, b, c: p_gamma(a, b, c, spec, method), r[:, None], r[None, :],
                           grid.d, grid.n_angle)
    sw = np.sqrt(W)
    S = sw[:, None] * pbar * sw[None, :]
    asym = float(np.max(np.abs(S - S.T)) / np.max(np.abs(S)))
    if asym > tol:
        raise DiscretizationError(f"pre-symmetrisation asymmetry {asym:.3e} exceeds {tol:g}")
    S = 0.5 * (S + S.T)
    u = np.sqrt(W * grid.maxwellian())
    corr = np.zeros_like(sig)
    if balance:
        corr = sig - (S @ u) / u
    S = S + np.diag(corr - sig)
    info = {"asymmetry": asym, "balance_correction_max_rel": float(np.max(np.abs(corr / sig))),
            "equilibrium_residual": float(np.linalg.norm(S @ u) / np.linalg.norm(u))}
    return S, info


def interpolant(grid, f):
    """Cubic interpolant of an isotropic grid function with a Maxwellian tail beyond the last node."""
    r = grid.nodes
    f = np.asarray(f, float)
    spl = CubicSpline(np.concatenate([-r[::-1], r]), np.concatenate([f[::-1], f]))
    last, flast = r[-1], f[-1]

    def g(x):
        x = np.abs(np.asarray(x, float))
        tail = flast * np.exp(-0.5 * (x * x - last * last))
        return np.where(x <= last, spl(np.minimum(x, last)), tail)
    return g


def _sigma_form_rule(v, spec, f, n, n_ang, rho_max):
    d = spec.d
    g = spec.gamma
    b = spec.ell_b / sphere_area(d)
    x, w = roots_jacobi(n, 0.0, g + 2)
    rho = list(0.5 * (x + 1.0))
    wr = list(w * 0.5 ** (g + 3))
    edges = np.arange(1.0, rho_max + 1.0)
    p, q = composite(edges, n)
    rho = np.concatenate([rho, p])
    wr = np.concatenate([wr, q * p ** (g + 2)])
    ca, wa = gauss_legendre(n_ang)
    xs, wx = gauss_legendre(n_ang)
    rho = rho[:, None, None]
    ca = ca[None, :, None]
    xs = xs[None, None, :]
    c2 = v * v - v * rho * ca + 0.25 * rho * rho
    c = np.sqrt(np.maximum(c2, 0.0))
    base = c2 + 0.25 * rho * rho
    vp = np.sqrt(np.maximum(base + rho * c * xs, 0.0))
    vs2 = np.maximum(base - rho * c * xs, 0.0)
    integrand = f(vp) * maxwellian_r(np.sqrt(vs2), d)
    inner = np.sum(integrand * wx[None, None, :], axis=-1) * 2 * np.pi
    mid = np.sum(inner * wa[None, :], axis=-1) * 2 * np.pi
    return b * float(np.sum(mid * wr))


def gain_sigma_form(f, v_mag, spec, grid=None, n=16, n_ang=48, rho_extra=12.0, tol=1e-6):
    """Gain K f(v) from the collision-integral form with pre-collisional velocities.

    v' = (v + v*)/2 + (|v - v*|/2) sigma, v*' = (v + v*)/2 - (|v - v*|/2) sigma.
    `f` is either a grid function (needs `grid`, interpolated cubically) or a
    callable of the speed. Integration runs over u = v - v* in spherical
    coordinates about v and over sigma about the direction of (v + v*)/2. d = 3.
    """
    if spec.d != 3:
        raise PreconditionError("the sigma-form oracle is implemented for d = 3")
    if not callable(f):
        if grid is None:
            raise PreconditionError("a grid function needs its grid")
        f = interpolant(grid, f)
    rho_max = float(v_mag) + rho_extra
    a = _sigma_form_rule(float(v_mag), spec, f, n, n_ang, rho_max)
    b = _sigma_form_rule(float(v_mag), spec, f, 2 * n, 2 * n_ang, rho_max)
    if abs(a - b) > tol * max(abs(b), 1e-300):
        raise QuadratureError(f"sigma-form gain not converged at |v|={v_mag}: {a} vs {b}")
    return b
