"""Numerical checks of the structural results: shared observations, trace and energy estimates.

Everything here is a pure function of its arguments.  Series-based checks use
tagged closed forms so that both sides of each comparison are exact up to
round-off; finite-difference checks are used only where no series exists
(non-zero boundary input, mirrored data).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .core import (
    Grid,
    HeatProblem,
    InvalidInputError,
    Signal,
    WaveProblem,
    evaluate_input,
    input_is_zero,
    uniform_times,
)
from .forms import Harmonic, Mirrored, Profile, ProfileError, Sine, _int_cos, zero
from .heat import boundary_flux_left, heat_fd_solve, heat_series, heat_series_flux
from .wave import wave_energy, wave_fd_solve, wave_series, wave_series_flux

RATIO_TOL = 1e-9
MAX_DENOMINATOR = 10**6
N_TIMES = 2001


class IncommensurateError(InvalidInputError):
    """The two lengths do not admit a shared Dirichlet sine mode."""


class HypothesisError(InvalidInputError):
    """A hypothesis of the stability estimate is violated."""


# ---------------------------------------------------------------------------
# commensurate lengths


def rational_ratio(x: float, tol: float = RATIO_TOL, max_denominator: int = MAX_DENOMINATOR) -> Fraction:
    """Lowest-denominator continued-fraction convergent p/q of ``x`` with |x - p/q| <= tol * |x|.

    Raises IncommensurateError when no convergent with q <= max_denominator
    is close enough.
    """
    if not (math.isfinite(x) and x > 0):
        raise InvalidInputError(f"ratio must be positive and finite, got {x}")
    h0, h1 = 0, 1  # numerators p_{k-2}, p_{k-1}
    k0, k1 = 1, 0  # denominators q_{k-2}, q_{k-1}
    r = x
    while True:
        a = math.floor(r)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > max_denominator:
            break
        if abs(x - h1 / k1) <= tol * x:
            return Fraction(h1, k1)
        frac = r - a
        if frac < 1e-15:
            break
        r = 1.0 / frac
    raise IncommensurateError(
        f"ratio {x!r} has no rational approximation within {tol} with denominator <= {max_denominator}"
    )


@dataclass(frozen=True)
class CommensuratePair:
    """Lengths ell < L with L/ell = m0/n0 and a sine profile that is a Dirichlet mode on both.

    ``profile`` is sin(k1 pi x / ell) = sin(n1 pi x / L) with n1 = k1 m0 / n0.
    """

    ell: float
    L: float
    n0: int
    m0: int
    k1: int
    n1: int

    @property
    def omega(self) -> float:
        return self.k1 * math.pi / self.ell

    @property
    def profile(self) -> Harmonic:
        return Sine(1.0, self.omega)


def commensurate_initial_data(ell: float, L: float, k1: int) -> CommensuratePair:
    if not (0 < ell < L and math.isfinite(L)):
        raise InvalidInputError(f"need 0 < ell < L, got ell={ell}, L={L}")
    if int(k1) != k1 or k1 < 1:
        raise InvalidInputError(f"mode index k1 must be a positive integer, got {k1}")
    k1 = int(k1)
    q = rational_ratio(L / ell)
    m0, n0 = q.numerator, q.denominator
    if (k1 * m0) % n0:
        raise IncommensurateError(
            f"L/ell ~ {m0}/{n0}: mode {k1} on (0, {ell}) is not a Dirichlet mode on (0, {L}) "
            f"(k1*m0/n0 = {k1 * m0}/{n0} is not an integer)"
        )
    return CommensuratePair(float(ell), float(L), n0, m0, k1, k1 * m0 // n0)


def admissible_lengths(ell: float, n0: int, L_max: float) -> list[float]:
    """All L = N ell / n0 <= L_max with integer N >= n0."""
    if not (ell > 0):
        raise InvalidInputError("ell must be positive")
    if int(n0) != n0 or n0 < 1:
        raise InvalidInputError(f"n0 must be a positive integer, got {n0}")
    n0 = int(n0)
    if L_max < ell:
        return []
    N_max = math.floor(L_max * n0 / ell * (1 + 1e-12))
    return [N * ell / n0 for N in range(n0, N_max + 1)]


# ---------------------------------------------------------------------------
# shared observations


def _series_flux(equation: str, profile: Profile, length: float, times, variant: str, n_modes: int) -> Signal:
    if equation == "heat":
        if variant != "u0":
            raise InvalidInputError("the heat equation has no u1 variant")
        return heat_series_flux(heat_series(profile, length, n_modes), times)
    if equation == "wave":
        u0, u1 = (profile, zero()) if variant == "u0" else (zero(), profile)
        return wave_series_flux(wave_series(u0, u1, length, n_modes), n_modes, times)
    raise InvalidInputError(f"equation must be 'heat' or 'wave', got {equation!r}")


def flux_gap(
    profile: Profile,
    ell: float,
    L: float,
    equation: str,
    T: float,
    t_min: float,
    variant: str = "u0",
    n_modes: int = 400,
) -> float:
    """sup over [t_min, T] of |u_x(0, t)| differences for the same undriven data on (0, ell) and (0, L)."""
    if variant not in ("u0", "u1"):
        raise InvalidInputError(f"variant must be 'u0' or 'u1', got {variant!r}")
    if not (0 <= t_min < T):
        raise InvalidInputError(f"need 0 <= t_min < T, got t_min={t_min}, T={T}")
    if equation == "heat" and t_min <= 0:
        raise InvalidInputError("heat series fluxes need t_min > 0")
    times = uniform_times(t_min, T, N_TIMES)
    a = _series_flux(equation, profile, ell, times, variant, n_modes)
    b = _series_flux(equation, profile, L, times, variant, n_modes)
    return float(np.max(np.abs(a.samples - b.samples)))


def verify_flux_equality(
    pair: CommensuratePair, equation: str, T: float, t_min: float = 0.0, variant: str = "u0"
) -> float:
    """Sup gap between the series observations of the pair's shared profile on both intervals."""
    return flux_gap(pair.profile, pair.ell, pair.L, equation, T, t_min, variant)


def symmetric_data_check(
    ell: float,
    u0_half: Profile,
    T: float,
    grid: Grid | None = None,
    parity: int = -1,
) -> float:
    """Heat-flux gap at x = 0 between (0, ell) with data u0_half and (0, 2 ell) with its mirror image.

    ``parity`` = -1 extends u0_half antisymmetrically about ell, which keeps
    u(ell, t) = 0 on the long interval and therefore reproduces the short
    problem exactly; ``parity`` = +1 is the even extension, which does not.
    Both problems are solved by finite differences with the same spacing
    (2 nx intervals on the long one).
    """
    g = grid or Grid()
    short = HeatProblem(ell, T, zero(), u0_half)
    long = HeatProblem(2 * ell, T, zero(), Mirrored(u0_half, ell, parity))
    a = boundary_flux_left(heat_fd_solve(short, g))
    b = boundary_flux_left(heat_fd_solve(long, Grid(2 * g.nx, g.nt)))
    return float(np.max(np.abs(a.samples - b.samples)))


# ---------------------------------------------------------------------------
# trace constant

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(256)


def _gauss(f: Callable, a: float, b: float, panels: int = 8) -> float:
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        x = lo + half * (_GL_NODES + 1.0)
        total += half * float(np.dot(_GL_WEIGHTS, f(x)))
    return float(total)


def h2_norm(f: Profile, length: float) -> float:
    """(integral over (0, length) of f^2 + f'^2 + f''^2)^(1/2), by Gauss-Legendre quadrature."""
    try:
        d1, d2 = f.derivative(1), f.derivative(2)
    except ProfileError as exc:
        raise InvalidInputError(f"H2 norm needs a closed-form derivative: {exc}") from exc
    val = _gauss(lambda x: f(x) ** 2 + d1(x) ** 2 + d2(x) ** 2, 0.0, length)
    return math.sqrt(max(val, 0.0))


ProfileFamily = Union[Profile, Callable[[float], Profile]]


def trace_constant_probe(f: ProfileFamily, ell_values: Sequence[float]) -> np.ndarray:
    """r(ell) = |f'(0)| ell^(3/2) / ||f||_{H^2(0, ell)} for each ell.

    ``f`` is either one profile (restricted to each (0, ell)) or a callable
    returning the profile to use for a given ell.  A zero H2 norm gives r = 0.
    """
    out = []
    for ell in ell_values:
        if not (ell > 0):
            raise InvalidInputError(f"lengths must be positive, got {ell}")
        p = f if isinstance(f, Profile) else f(ell)
        slope = abs(float(p.derivative(1)(0.0)))
        norm = h2_norm(p, ell)
        out.append(0.0 if norm == 0 else slope * ell**1.5 / norm)
    return np.array(out)


def trace_constant_bound(L_star: float) -> float:
    """A constant C with r(ell) <= C for every f and every ell in (0, L_star].

    From ell f'(0) = integral of f' - integral of (ell - s) f''(s) ds and
    Cauchy-Schwarz: |f'(0)| <= (1/ell + ell/3)^(1/2) ||f||_{H^2}, hence
    r(ell) <= (ell^2 + ell^4/3)^(1/2), increasing in ell.
    """
    if not (L_star > 0):
        raise InvalidInputError("L_star must be positive")
    return L_star * math.sqrt(1.0 + L_star**2 / 3.0)


# ---------------------------------------------------------------------------
# direct inequality for standing waves


@dataclass(frozen=True)
class DirectInequality:
    lhs: float
    rhs: float
    lhs_quadrature: float
    rhs_quadrature: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12) + 1e-300


def direct_inequality_check(
    modes: Sequence[tuple[int, float]], ell: float, L: float, T0: float, T1: float
) -> DirectInequality:
    """Both sides of the lateral-flux estimate for w = sum_k A_k sin(w_k (x - ell)) cos(w_k (t - T0)).

    w_k = k pi / (L - ell).  lhs = ||w_x(ell, .)||^2 on (T0, T1);
    rhs = (T1 - T0 + 2 (L - ell)) / (L - ell) * (||w_t(., T0)||^2 + ||w_x(., T0)||^2) on (ell, L).
    Closed forms and Gauss-Legendre quadratures of both sides are returned.
    """
    if not (L > ell >= 0):
        raise InvalidInputError(f"need 0 <= ell < L, got ell={ell}, L={L}")
    if not (T1 > T0):
        raise InvalidInputError(f"need T1 > T0, got T0={T0}, T1={T1}")
    ks = np.array([int(k) for k, _ in modes], dtype=int)
    if ks.size and np.any(ks < 1):
        raise InvalidInputError("mode indices must be positive integers")
    A = np.array([float(a) for _, a in modes], dtype=float)
    D = L - ell
    tau = T1 - T0
    w = ks * math.pi / D
    c = A * w  # w_x(ell, t) = sum c_k cos(w_k (t - T0))

    lhs = 0.0
    for i in range(ks.size):
        for j in range(ks.size):
            lhs += 0.5 * c[i] * c[j] * (_int_cos(w[i] - w[j], tau) + _int_cos(w[i] + w[j], tau))
    # w_t(., T0) = 0; w_x(., T0) = sum c_k cos(w_k (x - ell)); distinct k are orthogonal on (ell, L)
    energy = 0.0
    for k in np.unique(ks):
        ck = c[ks == k].sum()
        energy += 0.5 * D * ck * ck
    factor = (tau + 2 * D) / D
    rhs = factor * energy

    def trace(t):
        return np.cos(np.outer(t - T0, w)) @ c if ks.size else np.zeros_like(t)

    def wx0(x):
        return np.cos(np.outer(x - ell, w)) @ c if ks.size else np.zeros_like(x)

    panels = max(8, int(np.max(w, initial=1.0) * max(tau, D) / 20) + 1)
    lhs_q = _gauss(lambda t: trace(t) ** 2, T0, T1, panels)
    rhs_q = factor * _gauss(lambda x: wx0(x) ** 2, ell, L, panels)
    return DirectInequality(float(lhs), float(rhs), lhs_q, rhs_q)


# ---------------------------------------------------------------------------
# stability estimate


def asymptotic_bound(ell0: float, ell1: float, T: float, M: float, delta0: float) -> float:
    """(ell1 / 2) (T + 2 ell1 - 4 ell0) M / delta0^2, under 0 < ell0 <= ell1, T > 4 ell1, M, delta0 > 0."""
    if not (0 < ell0 <= ell1):
        raise HypothesisError(f"need 0 < ell0 <= ell1, got ell0={ell0}, ell1={ell1}")
    if not (T > 4 * ell1):
        raise HypothesisError(f"need T > 4*ell1 = {4 * ell1}, got T={T}")
    if not (M > 0):
        raise HypothesisError(f"need M > 0, got {M}")
    if not (delta0 > 0):
        raise HypothesisError(f"need delta0 > 0, got {delta0}")
    return ell1 / 2 * (T + 2 * ell1 - 4 * ell0) * M / delta0**2


@dataclass(frozen=True)
class BoundReport:
    status: str  # "inapplicable" | "vacuous" | "hypothesis-violated" | "holds" | "violated"
    distance: float
    bound: float | None
    flux_gap: float
    energy_max: float
    delta0: float


def _common_flux(sig: Signal, t: np.ndarray) -> np.ndarray:
    return CubicSpline(sig.times, sig.samples)(t)


def bound_consistency_experiment(
    p_ell: WaveProblem,
    p_L: WaveProblem,
    grid: Grid | None = None,
    flux_tol: float = 1e-6,
) -> BoundReport:
    """Check |L - ell| <= asymptotic_bound(...) for two wave problems whose observations agree.

    The problems must share horizon and boundary input.  Observations are
    compared by finite differences on [0, T]; M is the largest measured
    energy of either solution and delta0 = sup |eta| on [2 ell1, T - 2 ell1]
    with ell1 = max(ell, L).
    """
    if p_ell.horizon != p_L.horizon:
        raise InvalidInputError("both problems must share the horizon")
    g = grid or Grid()
    T = p_ell.horizon
    ell0, ell1 = sorted((p_ell.length, p_L.length))
    distance = float(abs(p_L.length - p_ell.length))

    f_a, f_b = wave_fd_solve(p_ell, g), wave_fd_solve(p_L, g)
    t = uniform_times(0.0, T, N_TIMES)
    sa = boundary_flux_left(f_a, 4)
    sb = boundary_flux_left(f_b, 4)
    gap = float(np.max(np.abs(_common_flux(sa, t) - _common_flux(sb, t))))
    M = float(max(np.max(wave_energy(f_a).values), np.max(wave_energy(f_b).values)))

    def report(status, bound=None, delta0=0.0):
        return BoundReport(status, distance, bound, gap, M, delta0)

    if gap > flux_tol:
        return report("inapplicable")
    if input_is_zero(p_ell.eta) and input_is_zero(p_L.eta):
        return report("vacuous")
    if T <= 4 * ell1:
        return report("hypothesis-violated")
    window = uniform_times(2 * ell1, T - 2 * ell1, N_TIMES)
    delta0 = float(np.max(np.abs(evaluate_input(p_ell.eta, window))))
    if delta0 == 0 or M == 0:
        return report("vacuous", delta0=delta0)
    bound = asymptotic_bound(ell0, ell1, T, M, delta0)
    return report("holds" if distance <= bound else "violated", bound, delta0)
