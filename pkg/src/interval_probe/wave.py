"""Forward solvers for the wave equation, its energy, and the d'Alembert identity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Grid,
    InvalidInputError,
    Signal,
    SpaceTimeField,
    WaveProblem,
    as_time_grid,
    evaluate_input,
    window_integral,
)
from .forms import Profile, ProfileError
from .heat import fourier_coefficients


class CourantError(InvalidInputError):
    """The explicit scheme would be unstable (dt > dx)."""


def _check_fast_decay(p: Profile, length: float, name: str) -> None:
    # sine coefficients of a smooth f decay like 1/n^2 only if f(0) = f(length) = 0
    if not p.closed_form:
        raise InvalidInputError(
            f"{name}: sampled profiles have no guaranteed O(1/n^2) coefficient decay; "
            "use a tagged closed form or the finite-difference solver"
        )
    ends = np.abs(np.asarray(p(np.array([0.0, length])), dtype=float))
    if np.any(ends > 1e-9):
        raise InvalidInputError(
            f"{name} does not vanish at the ends of (0, {length}) "
            f"(values {ends.tolist()}): coefficients decay like 1/n and the "
            "differentiated series does not converge uniformly"
        )


@dataclass(frozen=True, eq=False)
class WaveSeriesSolution:
    """sum_n [a_n cos(k_n t) + b_n sin(k_n t) / k_n] phi_n(x), k_n = n pi / length."""

    length: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        if a.shape != b.shape or a.ndim != 1 or a.size < 1:
            raise InvalidInputError("coefficient sequences must be 1-D and of equal length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidInputError("coefficients must be finite")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(1, self.a.size + 1) * np.pi / self.length


def wave_series(u0: Profile, u1: Profile, length: float, n_modes: int = 200) -> WaveSeriesSolution:
    """Expansion coefficients of the undriven problem (eta = 0); rejects slowly decaying data."""
    _check_fast_decay(u0, length, "u0")
    _check_fast_decay(u1, length, "u1")
    a = fourier_coefficients(u0, length, n_modes)
    b = fourier_coefficients(u1, length, n_modes)
    return WaveSeriesSolution(length, a, b)


def wave_series_flux(sol: WaveSeriesSolution, n_modes: int, times) -> Signal:
    """u_x(0, t) from the first ``n_modes`` terms; no tail bound is claimed."""
    t0, dt, n = as_time_grid(times)
    N = min(int(n_modes), sol.a.size)
    if N < 1:
        raise InvalidInputError("n_modes must be >= 1")
    t = t0 + np.arange(n) * dt
    k = sol.frequencies[:N]
    s = np.sqrt(2.0 / sol.length)
    phase = np.outer(t, k)
    flux = np.cos(phase) @ (s * k * sol.a[:N]) + np.sin(phase) @ (s * sol.b[:N])
    return Signal(flux, dt, t0)


def wave_fd_solve(p: WaveProblem, g: Grid, courant: float = 1.0) -> SpaceTimeField:
    """Explicit leapfrog solution of ``p``.

    The time step is ``courant * dx`` with dx = length / g.nx, and the run
    covers [0, horizon] with ceil(horizon / dt) steps, so the last level may
    lie slightly past the horizon.  ``g.nt`` is not used: at courant = 1 the
    scheme reproduces nodal values of the exact solution, which is what makes
    the misfit a smooth function of the length.

    The first level uses the Taylor start
    u1 = u0 + dt*S(v) + (c^2/2) * delta^2 u0, where S(v) is the Simpson
    average of the initial velocity over one step of characteristic spread.
    """
    if not (0 < courant <= 1.0):
        raise CourantError(f"Courant number must lie in (0, 1], got {courant}")
    nx = g.nx
    L, T = p.length, p.horizon
    dx = L / nx
    dt = courant * dx
    nt = max(2, math.ceil(T / dt - 1e-9))
    c2 = courant * courant
    x = np.arange(nx + 1) * dx
    t = np.arange(nt + 1) * dt

    try:
        u0 = np.asarray(p.u0(x), dtype=float)
        v0 = np.asarray(p.u1(x), dtype=float)
    except ProfileError as exc:
        raise InvalidInputError(f"initial data not evaluable: {exc}") from exc
    eta = evaluate_input(p.eta, t)

    U = np.empty((nx + 1, nt + 1))
    U[:, 0] = u0
    U[0, 0] = eta[0]
    U[nx, 0] = 0.0

    prev = U[:, 0]
    cur = np.empty(nx + 1)
    cur[1:nx] = (
        prev[1:nx]
        + 0.5 * c2 * (prev[2:] - 2.0 * prev[1:nx] + prev[:-2])
        + dt * (v0[1:nx] + c2 / 6.0 * (v0[2:] - 2.0 * v0[1:nx] + v0[:-2]))
    )
    cur[0], cur[nx] = eta[1], 0.0
    U[:, 1] = cur

    for j in range(1, nt):
        nxt = U[:, j + 1]
        nxt[1:nx] = (
            2.0 * (1.0 - c2) * cur[1:nx] + c2 * (cur[2:] + cur[:-2]) - prev[1:nx]
        )
        nxt[0], nxt[nx] = eta[j + 1], 0.0
        prev, cur = cur, nxt

    return SpaceTimeField(U, L, dt)


@dataclass(frozen=True, eq=False)
class EnergyTrace:
    """E(t_j) = integral of u_t^2 + u_x^2 over the interval, at times t0 + j*dt."""

    values: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise InvalidInputError("energy trace needs at least one value")
        if np.any(v < 0):
            raise InvalidInputError("energy values must be non-negative")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.values.size) * self.dt

    def relative_drift(self) -> float:
        e0 = self.values[0]
        if e0 == 0:
            return 0.0 if not np.any(self.values) else math.inf
        return float(np.max(np.abs(self.values - e0)) / e0)


def wave_energy(f: SpaceTimeField) -> EnergyTrace:
    """Discrete energy at every time level that has both neighbours (t_1 .. t_{nt-1}).

    u_t is centred in time, u_x centred in space; at the two boundary nodes
    u_x comes from a one-sided difference corrected with u_xx = u_tt (the
    equation restricted to the boundary), which keeps it second order.
    Integration in x is by the trapezoid rule.
    """
    U = f.values
    if f.nt < 2:
        raise InvalidInputError("energy needs at least 3 time levels")
    dx, dt = f.dx, f.dt
    mid = U[:, 1:-1]
    ut = (U[:, 2:] - U[:, :-2]) / (2.0 * dt)
    utt = (U[:, 2:] - 2.0 * mid + U[:, :-2]) / dt**2
    ux = np.empty_like(mid)
    ux[1:-1] = (mid[2:] - mid[:-2]) / (2.0 * dx)
    ux[0] = (mid[1] - mid[0]) / dx - 0.5 * dx * utt[0]
    ux[-1] = (mid[-1] - mid[-2]) / dx + 0.5 * dx * utt[-1]
    dens = ut * ut + ux * ux
    E = dx * (dens.sum(axis=0) - 0.5 * (dens[0] + dens[-1]))
    return EnergyTrace(np.maximum(E, 0.0), dt, dt)


def dalembert_left_value(flux_at_ell: Signal, length: float, t: float) -> float:
    """-1/2 times the integral of u_x(length, s) over [t - length, t + length].

    Equals u(0, t) for a solution vanishing at x = length on that window.
    """
    if not (length > 0):
        raise InvalidInputError("length must be positive")
    return -0.5 * window_integral(flux_at_ell, t - length, t + length)
