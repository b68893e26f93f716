"""Bound suite: each check returns a BoundReport with raw samples.

Dominance checks pass when sup(lhs / rhs) <= 1 + tolerance; limit checks pass
when the tail sequence decreases. A report whose meta carries
``expected_fail`` documents a property that is known not to hold; it does not
count against the overall verdict.
"""
import numpy as np

from .carleman import (BoundReport, dissipativity_margin, dissipativity_radius, dp_tail, h_gamma,
                       h_gamma_bound_exponent, i_gamma, kernel_gamma, kernel_hs, lemma_g_integral)
from .errors import InfeasibleError
from .quadrature import sphere_area
from .model import ModelSpec, QuadConfig, WeightSpec, collision_frequency, maxwellian_r
from .spectral import RateFunctions, domain_sigma_range, resolvent_norm, theta


def random_triples(rng, n, r_hi=6.0):
    """Admissible (|v|, |w|, |v-w|) with the distance kept away from both triangle limits."""
    v = rng.uniform(0.0, r_hi, n)
    w = rng.uniform(0.0, r_hi, n)
    lo, hi = np.abs(v - w), v + w
    dist = lo + (hi - lo) * rng.uniform(0.02, 0.98, n)
    dist = np.maximum(dist, 1e-3)
    return v, w, dist


def detailed_balance(spec, rng, n=200, tol=1e-8):
    v, w, dist = random_triples(rng, n)
    lhs = kernel_gamma(v, w, dist, spec) * maxwellian_r(w, spec.d)
    rhs = kernel_gamma(w, v, dist, spec) * maxwellian_r(v, spec.d)
    err = np.abs(lhs / rhs - 1.0)
    rows = [(float(a), float(b), float(c), float(x), float(y), float(e))
            for a, b, c, x, y, e in zip(v, w, dist, lhs, rhs, err)]
    sup = float(err.max())
    return BoundReport(f"detailed_balance_gamma_{spec.gamma:g}", ["v", "w", "dist", "lhs", "rhs", "rel_error"],
                       rows, sup, sup < tol, tol)


def comparison(spec, rng, n=200, tol=1e-8):
    """k_gamma <= |v-w|^{gamma-(d-2)} k_{d-2} with the same angular normalisation."""
    v, w, dist = random_triples(rng, n)
    lhs = kernel_gamma(v, w, dist, spec)
    hard = kernel_hs(v, w, dist, spec.d) * spec.ell_b / sphere_area(spec.d)
    rhs = dist ** (spec.gamma - (spec.d - 2)) * hard
    ratio = lhs / rhs
    rows = [(float(a), float(b), float(c), float(x), float(y), float(q))
            for a, b, c, x, y, q in zip(v, w, dist, lhs, rhs, ratio)]
    sup = float(ratio.max())
    return BoundReport(f"comparison_gamma_{spec.gamma:g}", ["v", "w", "dist", "lhs", "rhs", "ratio"],
                       rows, sup, sup <= 1.0 + tol, tol)


def i_gamma_paths(rng, gamma=-1.0, n=40, tol=1e-6):
    """Bessel reduction against 2-D tensor quadrature (d = 3)."""
    a = rng.uniform(0.0, 6.0, n)
    dist = rng.uniform(0.05, 6.0, n)
    b = i_gamma(a, dist, gamma, 3, method="bessel")
    t = i_gamma(a, dist, gamma, 3, method="tensor")
    err = np.abs(b / t - 1.0)
    rows = [(float(x), float(y), float(p), float(q), float(e)) for x, y, p, q, e in zip(a, dist, b, t, err)]
    sup = float(err.max())
    return BoundReport(f"i_gamma_paths_gamma_{gamma:g}", ["vperp", "dist", "bessel", "tensor", "rel_error"],
                       rows, sup, sup < tol, tol)


def h_gamma_bound(spec, r_max=8.0, w_far=(8.0, 16.0, 32.0, 64.0, 128.0), slope_tol=0.25):
    """Sup of H / ((1 + |w|^e) m^{-1}) on [0.5, r_max] and the growth exponent at large |w|.

    The inner sample uses the truncated domain of radius r_max. The far sample
    integrates over |v| < |w| + 12 so that truncation plays no role; the
    claimed exponent e is accepted when the log-slope of the ratio over the
    last octave is at most slope_tol.
    """
    e = h_gamma_bound_exponent(spec)
    inv = spec.weight.inv
    rows = []
    for w in np.linspace(0.5, r_max, 16):
        lhs = h_gamma(w, spec, r_max=r_max)
        rhs = (1.0 + w ** e) * float(inv(w))
        rows.append((float(w), r_max, lhs, rhs, lhs / rhs))
    sup = max(r[-1] for r in rows)
    far = []
    for w in w_far:
        lhs = h_gamma(w, spec, r_max=w + 12.0)
        rhs = (1.0 + w ** e) * float(inv(w))
        far.append((float(w), w + 12.0, lhs, rhs, lhs / rhs))
    slope = float(np.log(far[-1][-1] / far[-2][-1]) / np.log(far[-1][0] / far[-2][0]))
    passed = bool(np.isfinite(sup) and slope <= slope_tol)
    meta = {"exponent": e, "last_octave_slope": slope, "slope_tolerance": slope_tol, "weight": spec.weight.to_dict()}
    if spec.weight.kind == "algebraic":
        meta["expected_fail"] = True
        meta["tag"] = "algebraic weight: observed growth exponent is gamma, not gamma - 2"
    return BoundReport("h_gamma", ["w", "r_max", "H", "bound_shape", "ratio"], rows + far, float(sup),
                       passed, slope_tol, meta)


def lemma_g(spec, v_values=(0.0, 1.0, 2.0, 4.0, 6.0), r_max=8.0, factor=3.0):
    """(1 + |v|) int p^2 dw stays within `factor` of its value at |v| = 0."""
    rows = []
    for v in v_values:
        val = lemma_g_integral(v, spec, r_max=r_max)
        rows.append((float(v), val, (1.0 + v) * val))
    base = rows[0][2]
    ratios = [r[2] / base for r in rows]
    rows = [r + (q,) for r, q in zip(rows, ratios)]
    sup = float(max(ratios))
    return BoundReport("lemma_g", ["v", "integral", "weighted", "ratio_to_origin"], rows, sup,
                       bool(sup <= factor), factor)


def dissipativity(spec, c0, sigma0, r_max=8.0, n_check=100):
    """Radius beyond which c0 (1 + |v|^e) - sigma0 (1+|v|)^gamma <= -sigma0, rechecked on n_check radii."""
    meta = {"c0": c0, "sigma0": sigma0}
    try:
        R = dissipativity_radius(spec, c0, sigma0, r_max=r_max)
    except InfeasibleError as exc:
        meta["margin"] = exc.margin
        return BoundReport("dissipativity", ["v", "margin"], [], float("inf"), False, 0.0, meta)
    v = np.linspace(R, r_max, n_check + 1)[1:]
    m = dissipativity_margin(v, spec, c0, sigma0)
    meta["radius"] = R
    rows = [(float(a), float(b)) for a, b in zip(v, m)]
    return BoundReport("dissipativity", ["v", "margin"], rows, float(m.max()), bool(m.max() <= 0.0), 0.0, meta)


def dp_tail_weighted(spec, w=2.0, r_max=8.0, n_r=9):
    """Tail functional at fixed |w| for radii approaching r_max; passes if it decreases to 0."""
    rs = np.linspace(0.0, r_max, n_r + 1)[1:]
    vals = np.array([dp_tail(w, r, spec, r_max=r_max) for r in rs])
    rows = [(float(w), float(r), float(t)) for r, t in zip(rs, vals)]
    dec = bool(np.all(np.diff(vals) <= 0.0) and vals[-1] == 0.0)
    return BoundReport("dp_tail_weighted", ["w", "r", "tail"], rows, float(vals.max()), dec, 0.0,
                       {"weight": spec.weight.to_dict()})


def dp_tail_unweighted(spec, radii=(1.0, 2.0, 4.0, 8.0, 16.0), floor=0.1):
    """Unit weight, |w| = 2r, domain |v| < 2r + 12: the tail stays above `floor`, so it does not vanish."""
    unit = ModelSpec(d=spec.d, gamma=spec.gamma, ell_b=spec.ell_b, weight=WeightSpec.unit())
    rows = []
    for r in radii:
        rows.append((2.0 * r, float(r), dp_tail(2.0 * r, r, unit, r_max=2.0 * r + 12.0)))
    vals = np.array([x[2] for x in rows])
    vanishes = bool(np.all(np.diff(vals) <= 0.0) and vals[-1] < floor)
    return BoundReport("dp_tail_unit_weight", ["w", "r", "tail"], rows, float(vals.min()), vanishes, floor,
                       {"expected_fail": True, "tag": "unit weight: K is not weakly compact",
                        "tail_min": float(vals.min())})


def resolvent_bound(gen, alphas=(-20.0, -5.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 5.0, 20.0), tol=1e-6,
                    alpha_large=1e3, large_tol=0.05):
    _, smax = domain_sigma_range(gen)
    sm = RateFunctions(smax)
    rows = []
    for a in alphas:
        nrm = resolvent_norm(gen, a)
        th = theta(abs(a), sm)
        rows.append((float(a), nrm, th, nrm / th))
    sup = max(r[3] for r in rows)
    big = alpha_large * resolvent_norm(gen, alpha_large)
    passed = bool(sup <= 1.0 + tol and abs(big - 1.0) <= large_tol)
    return BoundReport("resolvent", ["alpha", "norm", "theta", "ratio"], rows, float(sup), passed, tol,
                       {"sigma_max": smax, "alpha_large": alpha_large, "alpha_times_norm": big})


def sigma_one(spec, r_max=8.0, n=65):
    """Grid estimate of the largest sigma1 with Sigma(v) >= sigma1 (1 + |v|)^gamma on [0, r_max]."""
    v = np.linspace(0.0, r_max, n)
    s = collision_frequency(v, spec, QuadConfig(r_max=r_max))
    return float(np.min(s / (1.0 + v) ** spec.gamma))


def run_suite(spec, seed=0, r_max=8.0, resolvent_gen=None, slope_tol=0.25):
    """All bound checks for `spec`; returns the list of reports."""
    rng = np.random.default_rng(seed)
    reports = []
    for g in (1.0, 0.5, -1.0):
        s = ModelSpec(d=spec.d, gamma=g, ell_b=spec.ell_b, weight=spec.weight)
        reports.append(detailed_balance(s, rng))
        reports.append(comparison(s, rng))
    if spec.d == 3:
        reports.append(i_gamma_paths(rng))
    hrep = h_gamma_bound(spec, r_max=r_max, slope_tol=slope_tol)
    reports.append(hrep)
    if spec.gamma > (spec.d - 2) / 2:
        reports.append(lemma_g(spec, r_max=r_max))
    w = spec.weight
    if (w.kind == "exponential" and w.a > 0 and spec.gamma + w.s > 1) or (w.kind == "algebraic" and w.beta > 0):
        reports.append(dissipativity(spec, hrep.sup_ratio, sigma_one(spec, r_max), r_max=r_max))
    if not w.is_trivial:
        reports.append(dp_tail_weighted(spec, r_max=r_max))
    reports.append(dp_tail_unweighted(spec))
    if resolvent_gen is not None:
        reports.append(resolvent_bound(resolvent_gen))
    return reports


def overall(reports):
    """True when every report that is not marked expected_fail passed."""
    return all(r.passed for r in reports if not r.meta.get("expected_fail"))
