"""The six reference experiments, compiled in so that runs need no external files."""

from __future__ import annotations

import math

from .config import ExperimentConfig
from .core import InvalidInputError
from .forms import Polynomial, Sine, sine_cubed, zero

_HALF_PI = math.pi / 2

PRESETS: dict[str, ExperimentConfig] = {
    c.name: c
    for c in (
        ExperimentConfig(
            name="heat-1.1",
            title="heat, zero initial data, eta = 5 sin^3 t",
            equation="heat",
            horizon=5.0,
            eta=sine_cubed(5.0),
            u0=zero(),
            u1=None,
            L_d=2.0,
            ell_init=3.0,
            bracket=(0.5, 4.0),
        ),
        ExperimentConfig(
            name="heat-1.2",
            title="heat, u0 = 5x(2-x), eta = 0.2 t (2 + t)",
            equation="heat",
            horizon=5.0,
            eta=Polynomial((0.0, 0.4, 0.2)),
            u0=Polynomial((0.0, 10.0, -5.0)),
            u1=None,
            L_d=2.0,
            ell_init=0.5,
            bracket=(0.25, 4.0),
        ),
        ExperimentConfig(
            name="heat-1.3",
            title="heat, eta = 0, u0 = sin(pi x / 2): lengths 4 and 6 share the observation",
            equation="heat",
            horizon=5.0,
            eta=zero(),
            u0=Sine(1.0, _HALF_PI),
            u1=None,
            L_d=6.0,
            ell_init=5.5,
            bracket=(3.0, 7.0),
        ),
        ExperimentConfig(
            name="wave-2.1",
            title="wave, zero initial data, eta = 3 sin^3 t",
            equation="wave",
            horizon=4.0,
            eta=sine_cubed(3.0),
            u0=zero(),
            u1=zero(),
            L_d=2.0,
            ell_init=1.5,
            bracket=(0.5, 3.5),
        ),
        ExperimentConfig(
            name="wave-2.2",
            title="wave, u0 = 0.4 sin(pi x), u1 = 0, eta = 3 sin^3 t",
            equation="wave",
            horizon=4.0,
            eta=sine_cubed(3.0),
            u0=Sine(0.4, math.pi),
            u1=zero(),
            L_d=2.0,
            ell_init=1.5,
            bracket=(0.5, 3.5),
        ),
        ExperimentConfig(
            name="wave-2.3",
            title="wave, eta = 0, u0 = sin(pi x / 2), u1 = 0: lengths 4 and 6 share the observation",
            equation="wave",
            horizon=4.0,
            eta=zero(),
            u0=Sine(1.0, _HALF_PI),
            u1=zero(),
            L_d=6.0,
            ell_init=5.5,
            bracket=(3.0, 7.0),
        ),
    )
}


def get_preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise InvalidInputError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


def preset_record(c: ExperimentConfig) -> dict:
    """Plain-data description of a preset (stable key order)."""
    return {
        "name": c.name,
        "title": c.title,
        "equation": c.equation,
        "T": c.horizon,
        "eta": c.eta.describe(),
        "u0": c.u0.describe(),
        "u1": None if c.u1 is None else c.u1.describe(),
        "L_d": c.L_d,
        "ell_init": c.ell_init,
        "bracket": list(c.bracket),
        "noise_levels": list(c.noise_levels),
        "seed": c.seed,
        "nx": c.nx,
        "nt": c.nt,
    }
