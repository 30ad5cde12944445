"""Forward solvers for the heat equation with Dirichlet input at x = 0.

Two routes to the observed heat flow u_x(0, t):

* ``heat_series`` / ``heat_series_flux``: Dirichlet eigenfunction expansion,
  valid for eta = 0 and t > 0.
* ``heat_fd_solve`` + ``boundary_flux_left``: Crank-Nicolson finite differences
  for arbitrary eta, used inside the reconstruction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .core import (
    Grid,
    HeatProblem,
    InvalidInputError,
    Signal,
    SpaceTimeField,
    as_time_grid,
    evaluate_input,
    inner_product,
)
from .forms import Harmonic, Profile, ProfileError, Scaled, Sum

TAIL_TOL = 1e-12


def _sine_mode_terms(u0: Profile, length: float) -> dict[int, float] | None:
    """Mode index -> amplitude when u0 is a finite sum of Dirichlet sine modes on (0, length)."""
    if u0.is_zero:
        return {}
    if isinstance(u0, Harmonic):
        k = u0.mode_index(length)
        return None if k is None else {k: u0.a}
    if isinstance(u0, Scaled):
        inner = _sine_mode_terms(u0.base, length)
        return None if inner is None else {k: u0.factor * a for k, a in inner.items()}
    if isinstance(u0, Sum):
        out: dict[int, float] = {}
        for t in u0.terms:
            sub = _sine_mode_terms(t, length)
            if sub is None:
                return None
            for k, a in sub.items():
                out[k] = out.get(k, 0.0) + a
        return out
    return None


def fourier_coefficients(u0: Profile, length: float, n_modes: int, n_quad: int = 8192) -> np.ndarray:
    """Coefficients c_n = (u0, phi_n) for phi_n = sqrt(2/length) sin(n pi x / length), n = 1..n_modes.

    Tagged sine modes are projected exactly; other closed forms use their exact
    sine moments when available and fall back to trapezoid quadrature.
    """
    if n_modes < 1:
        raise InvalidInputError("n_modes must be >= 1")
    if not isinstance(u0, Profile):
        raise InvalidInputError("u0 must be a Profile")
    norm = np.sqrt(2.0 / length)
    modes = _sine_mode_terms(u0, length)
    c = np.zeros(n_modes)
    if modes is not None:
        for k, a in modes.items():
            if k <= n_modes:
                c[k - 1] = a * np.sqrt(length / 2.0)
        return c
    for n in range(1, n_modes + 1):
        omega = n * np.pi / length
        m = u0.sine_moment(omega, length)
        if m is None:
            try:
                m = inner_product(u0, Harmonic(1.0, 0.0, omega), length, n_quad)
            except InvalidInputError as exc:
                raise InvalidInputError(f"u0 is not evaluable on [0, {length}]: {exc}") from exc
        c[n - 1] = norm * m
    return c


@dataclass(frozen=True, eq=False)
class HeatSeriesSolution:
    """Truncated expansion sum_n c_n phi_n(x) exp(-lambda_n t) for eta = 0.

    ``u0_norm`` bounds every |c_n| (Bessel), which gives a tail bound for the
    modes beyond ``coefficients``; ``exact`` marks expansions known to have no
    such modes.
    """

    length: float
    coefficients: np.ndarray
    u0_norm: float
    exact: bool = False

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.ndim != 1 or c.size < 1 or not np.all(np.isfinite(c)):
            raise InvalidInputError("need at least one finite coefficient")
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    @property
    def n_modes(self) -> int:
        return self.coefficients.size

    @property
    def eigenvalues(self) -> np.ndarray:
        n = np.arange(1, self.n_modes + 1)
        return (n * np.pi / self.length) ** 2


def heat_series(u0: Profile, length: float, n_modes: int = 400) -> HeatSeriesSolution:
    c = fourier_coefficients(u0, length, n_modes)
    modes = _sine_mode_terms(u0, length)
    exact = modes is not None and all(k <= n_modes for k in modes)
    if exact:
        u0_norm = float(np.sqrt(np.sum(c**2)))
    else:
        try:
            u0_norm = float(np.sqrt(inner_product(u0, u0, length, 8192)))
        except InvalidInputError:
            u0_norm = float(np.sqrt(np.sum(c**2)))
    return HeatSeriesSolution(length, c, u0_norm, exact)


def _tail_weights(length: float, t_min: float, start: int) -> float:
    # sum_{n >= start} (n pi / l) sqrt(2/l) exp(-(n pi / l)^2 t_min), terms decay super-exponentially
    total = 0.0
    n = start
    while True:
        k = n * np.pi / length
        term = k * np.sqrt(2.0 / length) * np.exp(-k * k * t_min)
        total += term
        if term < 1e-30 or n > start + 10**6:
            return total
        n += 1


def heat_series_flux(sol: HeatSeriesSolution, times) -> Signal:
    """u_x(0, t) from the series, truncated once the remaining tail is below 1e-12.

    ``times`` is a Signal (its sample times are used) or a uniform array; all
    times must be positive.
    """
    t0, dt, n = as_time_grid(times)
    if t0 <= 0:
        raise InvalidInputError("series flux needs t_min > 0 (no tail bound at t = 0)")
    t = t0 + np.arange(n) * dt
    L = sol.length
    k = np.arange(1, sol.n_modes + 1) * np.pi / L
    w = k * np.sqrt(2.0 / L) * np.exp(-k * k * t0)
    beyond = 0.0 if sol.exact else sol.u0_norm * _tail_weights(L, t0, sol.n_modes + 1)
    # tail[N] = bound on everything past the first N terms
    partial = np.abs(sol.coefficients) * w
    tail = np.concatenate((np.cumsum(partial[::-1])[::-1], [0.0])) + beyond
    ok = np.nonzero(tail < TAIL_TOL)[0]
    if ok.size == 0:
        raise InvalidInputError(
            f"{sol.n_modes} modes leave a tail bound of {tail[-1]:.3e} at t_min={t0}; "
            "increase n_modes or t_min"
        )
    N = int(ok[0])
    if N == 0:
        return Signal(np.zeros(n), dt, t0)
    kk = k[:N]
    amp = sol.coefficients[:N] * np.sqrt(2.0 / L) * kk
    flux = np.exp(-np.outer(t, kk * kk)) @ amp
    return Signal(flux, dt, t0)


def _tridiag_factor(n: int, diag: float, off: float):
    dl = np.full(n - 1, off)
    d = np.full(n, diag)
    du = np.full(n - 1, off)
    dl, d, du, du2, ipiv, info = lapack.dgttrf(dl, d, du)
    if info != 0:
        raise RuntimeError(f"tridiagonal factorisation failed (info={info})")
    return dl, d, du, du2, ipiv


def _tridiag_solve(factors, rhs: np.ndarray) -> np.ndarray:
    x, info = lapack.dgttrs(*factors, rhs)
    if info != 0:
        raise RuntimeError(f"tridiagonal solve failed (info={info})")
    return x


def heat_fd_solve(p: HeatProblem, g: Grid, rannacher_steps: int = 2) -> SpaceTimeField:
    """Crank-Nicolson solution of ``p`` on ``g``.

    The first ``rannacher_steps`` steps are each replaced by two implicit Euler
    half steps, which damps the non-smooth modes excited by incompatible data
    (u0(length) != 0 or eta(0) != u0(0)) without lowering the global order.
    """
    nx, nt = g.nx, g.nt
    L, T = p.length, p.horizon
    dx, dt = L / nx, T / nt
    m = nx - 1
    r = dt / dx**2
    t = np.arange(nt + 1) * dt
    x = np.arange(nx + 1) * dx

    try:
        u_init = np.asarray(p.u0(x), dtype=float)
    except ProfileError as exc:
        raise InvalidInputError(f"u0 not evaluable: {exc}") from exc
    eta_t = evaluate_input(p.eta, t)

    U = np.empty((nx + 1, nt + 1))
    U[:, 0] = u_init
    U[0, :] = eta_t
    U[nx, :] = 0.0
    u = u_init[1:nx].copy()

    cn = _tridiag_factor(m, 1.0 + r, -0.5 * r)
    n_startup = min(max(int(rannacher_steps), 0), nt)
    if n_startup:
        rh = 0.5 * r
        be = _tridiag_factor(m, 1.0 + 2.0 * rh, -rh)
        eta_half = evaluate_input(p.eta, (np.arange(n_startup) + 0.5) * dt)

    for j in range(nt):
        if j < n_startup:
            rhs = u.copy()
            rhs[0] += rh * eta_half[j]
            u = _tridiag_solve(be, rhs)
            rhs = u.copy()
            rhs[0] += rh * eta_t[j + 1]
            u = _tridiag_solve(be, rhs)
        else:
            rhs = (1.0 - r) * u
            rhs[1:] += 0.5 * r * u[:-1]
            rhs[:-1] += 0.5 * r * u[1:]
            rhs[0] += 0.5 * r * (eta_t[j] + eta_t[j + 1])
            u = _tridiag_solve(cn, rhs)
        U[1:nx, j + 1] = u

    return SpaceTimeField(U, L, dt)


# one-sided first-derivative stencils at a boundary node, spacing 1
_STENCILS = {
    2: np.array([-3.0, 4.0, -1.0]) / 2.0,
    4: np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0,
}


def _one_sided(rows: np.ndarray, h: float, order: int) -> np.ndarray:
    if order not in _STENCILS:
        raise InvalidInputError(f"unsupported flux order {order}; use 2 or 4")
    w = _STENCILS[order]
    return (w @ rows[: w.size]) / h


def boundary_flux_left(f: SpaceTimeField, order: int = 2) -> Signal:
    """u_x(0, t_j) by a one-sided difference: 3-point (order 2) or 5-point (order 4)."""
    if f.nx < 3 or f.nx < _STENCILS.get(order, np.empty(0)).size - 1:
        raise InvalidInputError(f"need more spatial nodes for an order-{order} flux (nx={f.nx})")
    return Signal(_one_sided(f.values, f.dx, order), f.dt)


def boundary_flux_right(f: SpaceTimeField, order: int = 2) -> Signal:
    """u_x(length, t_j) by the mirrored one-sided difference."""
    if f.nx < 3 or f.nx < _STENCILS.get(order, np.empty(0)).size - 1:
        raise InvalidInputError(f"need more spatial nodes for an order-{order} flux (nx={f.nx})")
    return Signal(-_one_sided(f.values[::-1], f.dx, order), f.dt)
