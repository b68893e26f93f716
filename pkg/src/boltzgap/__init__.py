"""Numerical lab for the spectral gap of the linearised Boltzmann operator with
power-law collision kernels and angular cutoff."""
from .carleman import (BoundReport, KernelPoint, dp_tail, h_gamma, i_gamma, kernel_gamma, kernel_hs,
                       lemma_g_integral, p_gamma)
from .discretize import GeneratorMatrix, RadialGrid, assemble, assemble_hilbert, build_grid, gain_sigma_form
from .errors import BoltzgapError, ConfigError, NumericalError
from .evolve import DecayFit, Trajectory, dyson_phillips, envelope_check, evolve, fit_decay
from .model import ModelSpec, QuadConfig, WeightSpec, collision_frequency, maxwellian, sigma_bounds
from .spectral import RateFunctions, SpectrumReport, resolvent_norm, spectrum, theta, theta_log, theta_log_inv

__version__ = "0.1.0"
