from dataclasses import replace

import numpy as np
import pytest

from boltzgap.errors import ConservationError, PositivityError, PreconditionError, WindowError
from boltzgap.evolve import (Trajectory, certified_initial, discrete_maxwellian, dyson_phillips, envelope_check,
                             equilibrium_projection, evolve, fit_decay)
from boltzgap.spectral import RateFunctions, domain_sigma_range, spectrum


def bump(grid, mass=1.0):
    r = grid.nodes
    f = np.clip(1.5 - r, 0.0, None) ** 2
    return mass * f / grid.mass(f)


@pytest.fixture(scope="module")
def hard_run(hard_cs):
    return evolve(hard_cs, bump(hard_cs.grid), 8.0, record_every=10)


@pytest.fixture(scope="module")
def soft_run(soft_cs):
    g = soft_cs.grid
    f0, eps = certified_initial(soft_cs, g.nodes ** 2 * g.maxwellian())
    return evolve(soft_cs, f0, 100.0, record_every=10), eps


def synthetic(times, norms):
    times = np.asarray(times, float)
    return Trajectory(times, np.zeros((times.size, 2)), np.asarray(norms, float), np.ones(times.size), 1.0)


def test_equilibrium_projection(hard_grid):
    Mh = discrete_maxwellian(hard_grid)
    np.testing.assert_allclose(equilibrium_projection(Mh, hard_grid), Mh, rtol=1e-14)
    f = hard_grid.nodes - 1.7
    f = f - hard_grid.mass(f) * Mh
    assert np.max(np.abs(equilibrium_projection(f, hard_grid))) < 1e-14 * np.max(np.abs(f))
    np.testing.assert_allclose(equilibrium_projection(bump(hard_grid, 0.5), hard_grid), 0.5 * Mh, rtol=1e-12)


def test_maxwellian_is_stationary(hard_cs):
    Mh = discrete_maxwellian(hard_cs.grid)
    traj = evolve(hard_cs, Mh, 10.0, record_every=20)
    assert np.max(np.abs(traj.states - Mh)) <= 1e-6 * np.max(Mh)
    assert traj.norms.max() <= 1e-6


def test_positivity_and_mass(hard_run):
    assert hard_run.min_component.min() >= 0.0
    assert np.max(np.abs(hard_run.mass - 1.0)) < 1e-8


def test_contraction(hard_run):
    assert np.all(np.diff(hard_run.norms) <= 1e-14)


def test_hard_decay_rate(hard_cs, hard_run):
    fit = fit_decay(hard_run, (2.0, 8.0))
    lam = spectrum(hard_cs).lambda_star
    assert fit.rate == pytest.approx(lam, rel=0.05)
    assert fit.residual < 0.05


@pytest.mark.parametrize("method", ["rk4", "exponential-euler"])
def test_methods_agree_with_expm(hard_cs, method):
    f0 = bump(hard_cs.grid)
    ref = evolve(hard_cs, f0, 1.0, dt=1.0, method="expm").states[-1]
    got = evolve(hard_cs, f0, 1.0, method=method).states[-1]
    tol = 1e-8 if method == "rk4" else 5e-2
    assert np.max(np.abs(got - ref)) <= tol * np.max(np.abs(ref))


def test_semigroup_composition(hard_cs):
    f0 = bump(hard_cs.grid)
    scale = np.max(np.abs(f0))
    exact = evolve(hard_cs, f0, 2.0, dt=2.0, method="expm").states[-1]
    whole = evolve(hard_cs, f0, 2.0).states[-1]
    half = evolve(hard_cs, evolve(hard_cs, f0, 1.0).states[-1], 1.0).states[-1]
    integrator = max(np.max(np.abs(whole - exact)) / scale, 1e-13)
    assert np.max(np.abs(half - whole)) / scale <= 10 * integrator


def test_evolve_preconditions(hard_cs):
    f0 = bump(hard_cs.grid)
    with pytest.raises(PreconditionError):
        evolve(hard_cs, f0, 1.0, method="euler")
    with pytest.raises(PreconditionError):
        evolve(hard_cs, -f0, 1.0)
    with pytest.raises(PreconditionError):
        evolve(hard_cs, f0, 1.0, dt=1.0 / hard_cs.sigma.max())
    with pytest.raises(PreconditionError):
        evolve(hard_cs, f0, -1.0)


def test_evolve_zero_time(hard_cs):
    f0 = bump(hard_cs.grid)
    traj = evolve(hard_cs, f0, 0.0)
    assert traj.times.tolist() == [0.0]
    np.testing.assert_array_equal(traj.states[0], f0)


def test_positivity_violation(hard_cs):
    bad = replace(hard_cs, gain=hard_cs.gain - 2.0 * np.diag(np.diag(hard_cs.gain)) - 0.5 * hard_cs.gain.max())
    with pytest.raises(PositivityError):
        evolve(bad, bump(hard_cs.grid), 1.0)


def test_conservation_violation(hard_cs):
    leaky = replace(hard_cs, gain=0.9 * hard_cs.gain)
    with pytest.raises(ConservationError):
        evolve(leaky, bump(hard_cs.grid), 1.0)
    assert evolve(leaky, bump(hard_cs.grid), 1.0, check=False).mass[-1] < 1.0


def test_dyson_phillips_zero_terms(hard_cs):
    f0 = bump(hard_cs.grid)
    np.testing.assert_array_equal(dyson_phillips(hard_cs, f0, 0.7, 0), np.exp(-hard_cs.sigma * 0.7) * f0)


def test_dyson_phillips_partial_sums(hard_cs):
    f0 = bump(hard_cs.grid)
    t = 0.2 / hard_cs.sigma.max()
    ref = evolve(hard_cs, f0, t, dt=t, method="expm").states[-1]
    sums = dyson_phillips(hard_cs, f0, t, 8, partial_sums=True)
    errs = [np.linalg.norm(s - ref) / np.linalg.norm(ref) for s in sums]
    assert errs[-1] < 1e-6
    assert np.all(np.diff(errs[:7]) < 0)
    np.testing.assert_allclose(sums[-1], evolve(hard_cs, f0, t).states[-1], rtol=1e-6, atol=1e-12)
    # each added term is nonnegative, so the partial sums increase componentwise
    assert np.all(np.diff(np.array(sums), axis=0) >= -1e-15)


def test_dyson_phillips_preconditions(hard_cs):
    with pytest.raises(PreconditionError):
        dyson_phillips(hard_cs, np.ones(hard_cs.n), 1.0, -1)
    with pytest.raises(PreconditionError):
        dyson_phillips(hard_cs, np.ones(hard_cs.n), -1.0, 2)


def test_fit_decay_synthetic():
    t = np.linspace(0, 10, 41)
    fit = fit_decay(synthetic(t, 3 * np.exp(-0.7 * t)), (2.0, 8.0))
    assert fit.rate == pytest.approx(0.7, abs=1e-6)
    assert fit.prefactor == pytest.approx(3.0, rel=1e-9)
    assert fit.residual < 1e-12


def test_fit_decay_window_errors(hard_cs):
    t = np.linspace(0, 10, 41)
    with pytest.raises(WindowError):
        fit_decay(synthetic(t, np.exp(-t)), (20.0, 30.0))
    traj = evolve(hard_cs, discrete_maxwellian(hard_cs.grid), 4.0, record_every=5)
    with pytest.raises(WindowError):
        fit_decay(traj, (1.0, 4.0))


def test_certified_initial(soft_cs):
    g = soft_cs.grid
    f0, eps = certified_initial(soft_cs, g.nodes ** 2 * g.maxwellian(), rho0=1.0)
    assert 0 < eps <= 1.0
    assert f0.min() >= 0.0
    assert g.mass(f0) == pytest.approx(1.0, abs=1e-12)


def test_soft_decay_not_exponential(soft_run):
    traj, _ = soft_run
    assert np.max(np.abs(traj.mass - 1.0)) < 1e-8
    assert fit_decay(traj, (10.0, 100.0)).residual > 0.05


def test_soft_envelope_bounded(soft_cs, soft_run):
    traj, _ = soft_run
    sm = RateFunctions(domain_sigma_range(soft_cs)[1])
    rep = envelope_check(traj, sm, c=0.5, window=(10.0, 100.0))
    assert rep.bounded
    assert rep.last_quarter_max <= 2 * rep.first_quarter_max


def test_hard_envelope_ratio_vanishes(hard_cs):
    traj = evolve(hard_cs, bump(hard_cs.grid), 20.0, record_every=10)
    rep = envelope_check(traj, RateFunctions(domain_sigma_range(hard_cs)[1]), window=(4.0, 20.0))
    assert rep.ratios[-1] < 1e-3 * rep.ratios[0]


def test_envelope_constant_range(hard_run):
    with pytest.raises(PreconditionError):
        envelope_check(hard_run, RateFunctions(1.0), c=1.2)
    with pytest.raises(WindowError):
        envelope_check(hard_run, RateFunctions(1.0), window=(7.9, 8.0))
