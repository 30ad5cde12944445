"""Shared types and numerics: signals, problem definitions, grids, quadrature, RNG."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .forms import Profile, ProfileError, Sampled


class InvalidInputError(ValueError):
    """Raised when an operation's preconditions are not met."""


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled real time series; sample j lives at ``t0 + j*dt``."""

    samples: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1 or s.size < 2:
            raise InvalidInputError("a signal needs at least 2 samples")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise InvalidInputError(f"signal step must be positive, got {self.dt}")
        if not (np.isfinite(self.t0) and self.t0 >= 0):
            raise InvalidInputError(f"signal start must be >= 0, got {self.t0}")
        if not np.all(np.isfinite(s)):
            raise InvalidInputError("signal samples must be finite")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "t0", float(self.t0))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) * self.dt

    @property
    def t_end(self) -> float:
        return self.t0 + (self.samples.size - 1) * self.dt

    def __call__(self, t):
        """Linear interpolation, clamped at the ends."""
        return np.interp(np.asarray(t, dtype=float), self.times, self.samples)

    def same_grid(self, other: "Signal") -> bool:
        return len(self) == len(other) and self.dt == other.dt and self.t0 == other.t0

    def with_samples(self, samples) -> "Signal":
        return Signal(samples, self.dt, self.t0)


TimeInput = Union[Profile, Signal]


def evaluate_input(eta: TimeInput, t) -> np.ndarray:
    """Boundary input values at times ``t`` (closed form or interpolated signal)."""
    return np.asarray(eta(np.asarray(t, dtype=float)), dtype=float)


def input_is_zero(eta: TimeInput) -> bool:
    if isinstance(eta, Signal):
        return not np.any(eta.samples)
    return eta.is_zero


def uniform_times(start: float, stop: float, n: int) -> np.ndarray:
    """``n`` equispaced times from ``start`` to ``stop`` inclusive, computed without accumulation."""
    if n < 2:
        raise InvalidInputError("need at least 2 times")
    dt = (stop - start) / (n - 1)
    return start + np.arange(n) * dt


def as_time_grid(times) -> tuple[float, float, int]:
    """(t0, dt, n) for a Signal or a uniformly spaced array of times."""
    if isinstance(times, Signal):
        return times.t0, times.dt, len(times)
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise InvalidInputError("time grid needs at least 2 points")
    dt = (t[-1] - t[0]) / (t.size - 1)
    if dt <= 0 or not np.allclose(np.diff(t), dt, rtol=1e-9, atol=1e-12):
        raise InvalidInputError("time grid must be uniformly increasing")
    return float(t[0]), float(dt), int(t.size)


@dataclass(frozen=True)
class Grid:
    """Node counts: ``nx`` intervals in space (dx = length/nx), ``nt`` steps in time (dt = T/nt)."""

    nx: int = 200
    nt: int = 1000

    def __post_init__(self):
        if int(self.nx) != self.nx or self.nx < 8:
            raise InvalidInputError(f"nx must be an integer >= 8, got {self.nx}")
        if int(self.nt) != self.nt or self.nt < 8:
            raise InvalidInputError(f"nt must be an integer >= 8, got {self.nt}")

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.nx * factor, self.nt * factor)


def _check_length_horizon(length: float, horizon: float) -> None:
    if not (np.isfinite(length) and length > 0):
        raise InvalidInputError(f"length must be positive, got {length}")
    if not (np.isfinite(horizon) and horizon > 0):
        raise InvalidInputError(f"horizon must be positive, got {horizon}")


def _check_profile(p, name: str) -> None:
    if not isinstance(p, Profile):
        raise InvalidInputError(f"{name} must be a Profile, got {type(p).__name__}")


def _check_input(eta) -> None:
    if not isinstance(eta, (Profile, Signal)):
        raise InvalidInputError(f"eta must be a Profile or Signal, got {type(eta).__name__}")


@dataclass(frozen=True)
class HeatProblem:
    """u_t = u_xx on (0, length) x (0, horizon); u(0,t) = eta(t), u(length,t) = 0, u(x,0) = u0(x)."""

    length: float
    horizon: float
    eta: TimeInput
    u0: Profile

    def __post_init__(self):
        _check_length_horizon(self.length, self.horizon)
        _check_input(self.eta)
        _check_profile(self.u0, "u0")
        if isinstance(self.u0, Sampled):
            end = float(self.u0(self.length))
            scale = max(1.0, float(np.max(np.abs(self.u0.values))))
            if abs(end) > 1e-8 * scale:
                raise InvalidInputError(
                    f"sampled u0 must vanish at x = length (u0({self.length}) = {end})"
                )

    def at_length(self, length: float) -> "HeatProblem":
        return HeatProblem(length, self.horizon, self.eta, self.u0)


@dataclass(frozen=True)
class WaveProblem:
    """u_tt = u_xx on (0, length) x (0, horizon) with Dirichlet data eta / 0 and Cauchy data u0, u1."""

    length: float
    horizon: float
    eta: TimeInput
    u0: Profile
    u1: Profile

    def __post_init__(self):
        _check_length_horizon(self.length, self.horizon)
        _check_input(self.eta)
        _check_profile(self.u0, "u0")
        _check_profile(self.u1, "u1")
        if self.horizon <= self.length:
            warnings.warn(
                f"wave horizon {self.horizon} does not exceed length {self.length}; "
                "the far boundary is invisible in the observation window",
                stacklevel=3,
            )

    def at_length(self, length: float) -> "WaveProblem":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return WaveProblem(length, self.horizon, self.eta, self.u0, self.u1)


Problem = Union[HeatProblem, WaveProblem]


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Nodal solution values[i, j] = u(i*dx, j*dt) with dx = length/nx."""

    values: np.ndarray
    length: float
    dt: float

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise InvalidInputError("field values must be a 2-D array with at least 2x2 nodes")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def nx(self) -> int:
        return self.values.shape[0] - 1

    @property
    def nt(self) -> int:
        return self.values.shape[1] - 1

    @property
    def dx(self) -> float:
        return self.length / self.nx

    @property
    def horizon(self) -> float:
        return self.nt * self.dt

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx + 1) * self.dx

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.nt + 1) * self.dt


def trapezoid_integral(f: Signal) -> float:
    """Composite trapezoid rule over the whole span of ``f``."""
    if not isinstance(f, Signal) or len(f) < 2:
        raise InvalidInputError("trapezoid_integral needs a Signal with at least 2 samples")
    s = f.samples
    return float(f.dt * (s.sum() - 0.5 * (s[0] + s[-1])))


def window_integral(f: Signal, a: float, b: float) -> float:
    """Trapezoid integral of the linear interpolant of ``f`` over [a, b] inside its span."""
    eps = 1e-9 * max(1.0, abs(f.t_end))
    if a < f.t0 - eps or b > f.t_end + eps or b < a:
        raise InvalidInputError(
            f"window [{a}, {b}] not inside signal span [{f.t0}, {f.t_end}]"
        )
    t = f.times
    inside = (t > a) & (t < b)
    nodes = np.concatenate(([a], t[inside], [b]))
    vals = f(nodes)
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(nodes)))


def inner_product(f: Profile, g: Profile, length: float, n_quad: int = 2000) -> float:
    """Trapezoid approximation of (f, g) on (0, length) with n_quad + 1 nodes."""
    if n_quad < 2:
        raise InvalidInputError("n_quad must be at least 2")
    if not (length > 0):
        raise InvalidInputError("length must be positive")
    x = np.arange(n_quad + 1) * (length / n_quad)
    try:
        prod = np.asarray(f(x), dtype=float) * np.asarray(g(x), dtype=float)
    except ProfileError as exc:
        raise InvalidInputError(str(exc)) from exc
    return trapezoid_integral(Signal(prod, length / n_quad))


def seeded_rng(seed) -> np.random.Generator:
    """PCG64 generator; the stream depends only on ``seed``."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(int(seed) & (2**64 - 1)))


def spawn_seeds(seed: int, n: int) -> list[int]:
    """``n`` independent integer sub-seeds derived from ``seed``."""
    children = np.random.SeedSequence(int(seed) & (2**64 - 1)).spawn(n)
    return [int(c.generate_state(2, dtype=np.uint64)[0]) for c in children]
