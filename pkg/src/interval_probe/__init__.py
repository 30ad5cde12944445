"""Recover the length of an interval from the heat or wave flux observed at one end."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Grid,
    HeatProblem,
    InvalidInputError,
    Signal,
    SpaceTimeField,
    WaveProblem,
    inner_product,
    seeded_rng,
    trapezoid_integral,
)
from .forms import Mirrored, Polynomial, Sampled, Sine, sine_cubed, sine_modes, zero  # noqa: E402
from .heat import (  # noqa: E402
    boundary_flux_left,
    boundary_flux_right,
    fourier_coefficients,
    heat_fd_solve,
    heat_series,
    heat_series_flux,
)
from .inverse import (  # noqa: E402
    InverseProblem,
    add_noise,
    cost,
    make_target,
    minimize_length,
    noise_sweep,
    scan_cost,
)
from .wave import (  # noqa: E402
    dalembert_left_value,
    wave_energy,
    wave_fd_solve,
    wave_series,
    wave_series_flux,
)

__all__ = [
    "Grid", "HeatProblem", "InvalidInputError", "Signal", "SpaceTimeField", "WaveProblem",
    "inner_product", "seeded_rng", "trapezoid_integral",
    "Mirrored", "Polynomial", "Sampled", "Sine", "sine_cubed", "sine_modes", "zero",
    "boundary_flux_left", "boundary_flux_right", "fourier_coefficients", "heat_fd_solve",
    "heat_series", "heat_series_flux",
    "InverseProblem", "add_noise", "cost", "make_target", "minimize_length", "noise_sweep", "scan_cost",
    "dalembert_left_value", "wave_energy", "wave_fd_solve", "wave_series", "wave_series_flux",
]
