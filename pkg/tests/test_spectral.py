from dataclasses import replace

import numpy as np
import pytest

from boltzgap.discretize import assemble, build_grid
from boltzgap.errors import DegenerateZeroError, PreconditionError, RangeError, SingularityError
from boltzgap.model import ModelSpec
from boltzgap.spectral import (RateFunctions, domain_sigma_range, hilbert_gap, resolvent_norm, resolvent_sweep,
                               spectrum, theta, theta_log, theta_log_inv)

from conftest import HARD
from oracles import theta_ref

SM1 = RateFunctions(1.0)


@pytest.fixture(scope="module")
def hard_report(hard_raw, hard_hilbert):
    return spectrum(hard_raw, hilbert=hard_hilbert[0])


def test_hard_spectrum(hard_report):
    rep = hard_report
    assert rep.n_zero == 1
    assert 0 < rep.lambda_star < rep.eta
    assert rep.eta == pytest.approx(2 * np.sqrt(2 / np.pi), rel=1e-12)
    assert np.all(rep.eigenvalues.real[1:] < 0)
    assert np.all(np.diff(rep.eigenvalues.real) <= 1e-12)


def test_hard_gap_matches_hilbert(hard_report):
    assert hard_report.mu2 == pytest.approx(hard_report.lambda_star, rel=1e-2)


def test_zero_mode_is_maxwellian(hard_report):
    assert hard_report.zero_mode_residual < 1e-8
    assert hard_report.zero_mode_min > -1e-12
    assert hard_report.zero_mode_cosine > 0.9999


def test_gap_stable_under_doubling(hard_raw, hard_raw_half):
    a, b = spectrum(hard_raw_half).lambda_star, spectrum(hard_raw).lambda_star
    assert abs(a / b - 1) < 0.02


def test_top_eigenvalues_stable_under_doubling(hard_raw, hard_raw_half):
    a = np.sort(np.linalg.eigvals(hard_raw_half.matrix).real)[::-1][1:6]
    b = np.sort(np.linalg.eigvals(hard_raw.matrix).real)[::-1][1:6]
    np.testing.assert_allclose(a, b, rtol=0.02)


def test_gap_stable_under_larger_domain(hard_raw):
    wide = assemble(build_grid(160, r_max=10.0), HARD, "raw", check_identity=False)
    assert abs(spectrum(wide).lambda_star / spectrum(hard_raw).lambda_star - 1) < 0.02


def test_mu2_stable_under_doubling(hard_hilbert):
    from boltzgap.discretize import assemble_hilbert
    half, _ = assemble_hilbert(build_grid(64), HARD)
    assert abs(hilbert_gap(half) / hilbert_gap(hard_hilbert[0]) - 1) < 0.02


def test_maxwell_molecules_spectrum():
    gen = assemble(build_grid(64), ModelSpec(gamma=0.0), "raw", check_identity=False)
    rep = spectrum(gen)
    assert rep.eigenvalues.real.min() >= -1.0 - 1e-9
    assert rep.eigenvalues.real.max() <= 1e-9
    assert 0 < rep.lambda_star <= 1.0


def test_soft_eigenvalues_approach_zero(soft_by_radius):
    small = []
    for R in (6.0, 8.0, 10.0):
        ev = spectrum(soft_by_radius[R]).eigenvalues
        small.append(np.sort(np.abs(ev))[1:4])
    assert np.all(small[0] > small[1]) and np.all(small[1] > small[2])


def test_soft_gap_tracks_truncated_eta(soft_by_radius):
    # with nothing below the essential abscissa but truncation, lambda* sits just under eta = Sigma(r_max)
    for gen in soft_by_radius.values():
        rep = spectrum(gen)
        assert 0.8 * rep.eta < rep.lambda_star <= rep.eta * (1 + 1e-9)


def test_degenerate_zero(hard_raw_half):
    L = hard_raw_half
    n = L.n
    block = replace(L, gain=np.zeros((n, n)), sigma=np.where(np.arange(n) < 2, 0.0, L.sigma))
    with pytest.raises(DegenerateZeroError):
        spectrum(block)


def test_hilbert_gap_errors():
    with pytest.raises(DegenerateZeroError):
        hilbert_gap(np.diag([0.0, 0.0, -1.0]))
    with pytest.raises(DegenerateZeroError):
        hilbert_gap(np.diag([-0.5, -1.0]))
    with pytest.raises(PreconditionError):
        hilbert_gap(np.array([[0.0, 1.0], [0.0, -1.0]]))
    assert hilbert_gap(np.diag([0.0, -2.0, -3.0])) == 2.0


def test_domain_sigma_range(hard_raw):
    lo, hi = domain_sigma_range(hard_raw)
    assert lo == pytest.approx(2 * np.sqrt(2 / np.pi), rel=1e-12)
    assert hi > hard_raw.sigma.max()


@pytest.mark.parametrize("r, ref", [(0.1, 2014.9875621120887), (1.0, 3.414213562373095),
                                    (1e3, 0.0010010010004999998)])
def test_theta_oracle(r, ref):
    assert theta(r, SM1) == pytest.approx(ref, rel=1e-14)
    assert theta_ref(r, 1.0) == pytest.approx(ref, rel=1e-15)


def test_theta_limits():
    assert theta(1.0, SM1) == pytest.approx(2 + np.sqrt(2), rel=1e-15)
    # r theta(r) - 1 behaves like S / r, so the product approaches 1 from above
    gaps = np.array([theta(r, SM1) * r - 1.0 for r in (1e3, 1e4, 1e5)])
    np.testing.assert_allclose(gaps * np.array([1e3, 1e4, 1e5]), 1.0, rtol=2e-3)
    assert theta(1e-3, SM1) * 1e-9 == pytest.approx(2.0, rel=1e-3)
    assert theta(1e-3, RateFunctions(2.0)) * 1e-9 == pytest.approx(8.0, rel=1e-3)


def test_theta_decreasing():
    r = np.logspace(-3, 3, 200)
    assert np.all(np.diff(theta(r, SM1)) < 0)
    assert np.all(np.diff(theta_log(r, SM1)) < 0)


def test_theta_log_value():
    assert theta_log(1.0, SM1) == pytest.approx(5.0696, abs=1e-4)
    t = 2 + np.sqrt(2)
    assert theta_log(1.0, SM1) == pytest.approx(t * np.log1p(t), rel=1e-15)


def test_theta_log_near_zero():
    # r^{3.5} theta_log(r) ~ 2 sqrt(r) log(1 + 2 / r^4): bounded, and vanishing as r -> 0
    r = np.logspace(-4, -2, 50)
    scaled = r ** 3.5 * theta_log(r, SM1)
    np.testing.assert_allclose(scaled, 2 * np.sqrt(r) * np.log1p(2 / r ** 4), rtol=1e-3)
    assert scaled.max() < 4.0
    assert 1e-12 ** 3.5 * theta_log(1e-12, SM1) < 1e-3


def test_theta_domain_errors():
    for f in (theta, theta_log):
        with pytest.raises(RangeError):
            f(0.0, SM1)
        with pytest.raises(RangeError):
            f(np.array([1.0, -2.0]), SM1)
    with pytest.raises(PreconditionError):
        RateFunctions(0.0)


@pytest.mark.parametrize("y", [5.0696, 1e-9, 1.0, 1e6])
def test_theta_log_inv_roundtrip(y):
    r = theta_log_inv(y, SM1)
    assert theta_log(r, SM1) == pytest.approx(y, rel=1e-10)


def test_theta_log_inv_known_point():
    assert theta_log_inv(theta_log(1.0, SM1), SM1) == pytest.approx(1.0, abs=1e-8)


def test_theta_log_inv_range():
    with pytest.raises(RangeError):
        theta_log_inv(0.0, SM1)
    with pytest.raises(RangeError):
        theta_log_inv(1e300, SM1)


def test_theta_log_inv_large_time_slope():
    t = np.logspace(3, 6, 7)
    env = np.array([theta_log_inv(0.5 * x, SM1) for x in t])
    slope = np.polyfit(np.log(t), np.log(env), 1)[0]
    assert -1 / 3 <= slope <= -1 / 4


def test_resolvent_symmetric_in_alpha(soft_cs):
    for a in (0.1, 1.0, 5.0):
        assert resolvent_norm(soft_cs, a) == pytest.approx(resolvent_norm(soft_cs, -a), rel=1e-10)


def test_resolvent_singular_at_zero(soft_cs):
    with pytest.raises(SingularityError):
        resolvent_norm(soft_cs, 0.0)


def test_resolvent_sweep_rows(soft_cs):
    sm = RateFunctions(domain_sigma_range(soft_cs)[1])
    rows = resolvent_sweep(soft_cs, [0.5, -5.0], sm)
    assert [r[0] for r in rows] == [0.5, -5.0]
    for a, nrm, th, ratio in rows:
        assert ratio == pytest.approx(nrm / th)
        assert th == theta(abs(a), sm)


def test_resolvent_large_alpha(soft_cs):
    assert 1e3 * resolvent_norm(soft_cs, 1e3) == pytest.approx(1.0, rel=0.05)
