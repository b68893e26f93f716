"""Maxwellian, weights, and the collision frequency Sigma = ell_b (|.|^gamma * M)."""
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import roots_jacobi

from .bessel import scaled_ratio
from .errors import PreconditionError, QuadratureError
from .quadrature import composite, sphere_area

WEIGHT_KINDS = ("unit", "exponential", "algebraic")


@dataclass(frozen=True)
class WeightSpec:
    kind: str = "unit"
    a: float = 0.0
    s: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise PreconditionError(f"unknown weight kind {self.kind!r}")
        if self.kind == "exponential":
            if self.a < 0 or not (0 < self.s <= 1):
                raise PreconditionError("exponential weight needs a >= 0 and 0 < s <= 1")
        if self.kind == "algebraic" and self.beta < 0:
            raise PreconditionError("algebraic weight needs beta >= 0")

    @classmethod
    def unit(cls):
        return cls("unit")

    @classmethod
    def exponential(cls, a, s=1.0):
        return cls("exponential", a=float(a), s=float(s))

    @classmethod
    def algebraic(cls, beta):
        return cls("algebraic", beta=float(beta))

    @property
    def is_trivial(self):
        return (self.kind == "unit" or (self.kind == "exponential" and self.a == 0)
                or (self.kind == "algebraic" and self.beta == 0))

    def inv(self, r):
        """m^{-1} as a function of the speed |v|."""
        r = np.asarray(r, float)
        if self.kind == "exponential":
            return np.exp(self.a * r ** self.s)
        if self.kind == "algebraic":
            return 1.0 + r ** self.beta
        return np.ones_like(r)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "exponential":
            d.update(a=self.a, s=self.s)
        elif self.kind == "algebraic":
            d["beta"] = self.beta
        return d


@dataclass(frozen=True)
class ModelSpec:
    d: int = 3
    gamma: float = 1.0
    ell_b: float = 1.0
    weight: WeightSpec = field(default_factory=WeightSpec)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 3:
            raise PreconditionError("dimension d must be an integer >= 3")
        if not (-self.d < self.gamma <= self.d - 2):
            raise PreconditionError(f"gamma must lie in (-d, d-2], got {self.gamma}")
        if not self.ell_b > 0:
            raise PreconditionError("ell_b must be positive")

    @property
    def hard(self):
        return self.gamma >= 0

    @property
    def soft(self):
        return self.gamma < 0

    def to_dict(self):
        return {"d": self.d, "gamma": self.gamma, "ell_b": self.ell_b, "weight": self.weight.to_dict()}


@dataclass(frozen=True)
class SigmaBounds:
    sigma1: float
    sigma2: float
    eta: float
    sigma_max: float


@dataclass(frozen=True)
class QuadConfig:
    """Radial quadrature for the convolution defining Sigma."""
    n: int = 16
    r_max: float = 8.0
    tol: float = 1e-8


def maxwellian(v):
    """(2 pi)^{-d/2} exp(-|v|^2/2) for velocity vectors stored along the last axis."""
    v = np.asarray(v, float)
    d = v.shape[-1]
    return maxwellian_r(np.sqrt(np.sum(v * v, axis=-1)), d)


def maxwellian_r(r, d=3):
    r = np.asarray(r, float)
    return (2 * np.pi) ** (-d / 2) * np.exp(-0.5 * r * r)


def weight_inv(v, w):
    """m^{-1}(v) for a velocity vector v (last axis)."""
    v = np.asarray(v, float)
    return w.inv(np.sqrt(np.sum(v * v, axis=-1)))


def _shell_average(v, rho, d):
    """Integral of M(v + rho omega) over omega in S^{d-1}."""
    nu = (d - 2) / 2
    c = sphere_area(d - 1) * np.sqrt(np.pi) * gamma_fn(nu + 0.5)
    return (2 * np.pi) ** (-d / 2) * c * np.exp(-0.5 * (v - rho) ** 2) * scaled_ratio(nu, v * rho)


def _sigma_rule(v, spec, n, r_max):
    p = spec.gamma + spec.d - 1
    # first panel [0, 1] carries rho^p exactly through a Gauss-Jacobi weight
    x, w = roots_jacobi(n, 0.0, p)
    rho0 = 0.5 * (x + 1.0)
    w0 = w * 0.5 ** (p + 1)
    top = r_max + v
    edges = np.arange(1.0, top + 1.0)
    edges[-1] = max(edges[-1], top)
    rho1, w1 = composite(edges, n)
    w1 = w1 * rho1 ** p
    rho = np.concatenate([rho0, rho1])
    wt = np.concatenate([w0, w1])
    return spec.ell_b * np.sum(wt * _shell_average(v, rho, spec.d))


def collision_frequency(v, spec, quad=None):
    """Sigma(|v|) by spherical coordinates centred at v with an order-doubling check.

    `v` may be a vector (last axis of length d) or an array of speeds when its
    last axis does not match d; scalars are speeds.
    """
    quad = quad or QuadConfig()
    v = np.asarray(v, float)
    if v.ndim >= 1 and v.shape[-1] == spec.d and v.ndim > 1:
        v = np.sqrt(np.sum(v * v, axis=-1))
    if spec.gamma <= -spec.d:
        raise PreconditionError("gamma must exceed -d")
    flat = v.ravel()
    out = np.empty_like(flat)
    for k, vk in enumerate(flat):
        a = _sigma_rule(vk, spec, quad.n, quad.r_max)
        b = _sigma_rule(vk, spec, 2 * quad.n, quad.r_max)
        if abs(a - b) > quad.tol * abs(b):
            raise QuadratureError(f"Sigma({vk}) not converged: {a} vs {b}")
        out[k] = b
    out = out.reshape(v.shape)
    return out if out.ndim else float(out)


def sigma_bounds(spec, grid, sigma=None, quad=None):
    """Grid estimates of sigma1, sigma2 and of inf / sup of Sigma over [0, R_max]."""
    r = np.concatenate([[0.0], np.asarray(grid.nodes, float), [grid.r_max]])
    if sigma is None:
        s = collision_frequency(r, spec, quad)
    else:
        s0 = collision_frequency(np.array([0.0, grid.r_max]), spec, quad)
        s = np.concatenate([[s0[0]], np.asarray(sigma, float), [s0[1]]])
    ratio = s / (1.0 + r) ** spec.gamma
    return SigmaBounds(float(ratio.min()), float(ratio.max()), float(s.min()), float(s.max()))


def weighted_l1_norm(f, grid, w=None):
    """Quadrature of |f| m^{-1} over R^d for an isotropic grid function."""
    w = w or WeightSpec.unit()
    f = np.asarray(f)
    out = np.sum(np.asarray(grid.weights) * np.abs(f) * w.inv(grid.nodes), axis=-1)
    return out if np.ndim(out) else float(out)
